import logging
import traceback

from django.core.management.base import CommandError
from rest_framework import serializers

from depthguard.exceptions import DepthGuardError

logger = logging.getLogger(__name__)

USAGE_ERROR = 2
INTERNAL_ERROR = 1

EXPECTED_ERRORS = (DepthGuardError, OSError, serializers.ValidationError)


def command_exception_handler(exc, command):
    """Map an exception raised by a command to a CommandError with its exit status."""
    if isinstance(exc, CommandError):
        return exc

    if isinstance(exc, EXPECTED_ERRORS):
        logger.debug(f"{command} failed: {type(exc).__name__}: {exc}")
        return CommandError(str(exc), returncode=USAGE_ERROR)

    # Anything else is a bug: keep the traceback for the report.
    logger.error(f"Unhandled exception in {command}: {exc}")
    logger.error(f"Traceback: {traceback.format_exc()}")
    return CommandError(f"internal error ({type(exc).__name__}): {exc}", returncode=INTERNAL_ERROR)
