import math
from dataclasses import dataclass

from depthguard.compat import StrEnum
from depthguard.exceptions import ValidationError


class Calibration(StrEnum):
    MANUAL = "manual"
    CLEAN_QUANTILE = "clean_quantile"


@dataclass(frozen=True)
class Threshold:
    """Decision threshold gamma; scores >= gamma are flagged adversarial."""

    gamma: float
    calibration: Calibration = Calibration.MANUAL
    q: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "calibration", Calibration(self.calibration))
        if not math.isfinite(self.gamma):
            raise ValidationError(f"gamma must be finite, got {self.gamma}")
        if self.calibration is Calibration.CLEAN_QUANTILE:
            if self.q is None or not 0 < self.q < 1:
                raise ValidationError(f"calibration quantile must lie in (0, 1), got {self.q}")

    def flags(self, score):
        return score >= self.gamma

    def __str__(self):
        if self.calibration is Calibration.CLEAN_QUANTILE:
            return f"gamma={self.gamma!r} (clean quantile q={self.q})"
        return f"gamma={self.gamma!r}"


@dataclass(frozen=True)
class Decision:
    id: str
    score: float
    flagged: bool
