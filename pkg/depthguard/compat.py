"""Backports of standard-library names missing from older Pythons."""
import enum

try:
    StrEnum = enum.StrEnum
except AttributeError:  # Python < 3.11

    class StrEnum(str, enum.Enum):
        """Backport of :class:`enum.StrEnum` (Python 3.11)."""

        def __new__(cls, *values):
            value = str(*values)
            member = str.__new__(cls, value)
            member._value_ = value
            return member

        __str__ = str.__str__
        __format__ = str.__format__

        @staticmethod
        def _generate_next_value_(name, start, count, last_values):
            return name.lower()
