"""
Django settings for the depthguard project.

depthguard runs as a command-line toolkit: there is no database, no URL
routing and no middleware. Settings carry the logging layout and the library
defaults that the management commands fall back to.

Every value below can be overridden from the environment or a `.env` file.
"""

from pathlib import Path
from decouple import config


# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals (signing); nothing here is secret.
SECRET_KEY = config("SECRET_KEY", default="depthguard-cli-not-a-secret")

DEBUG = config("DEBUG", default=False, cast=bool)

# Application definition

INSTALLED_APPS = [
    # Third-party apps
    "rest_framework",
    # Local apps
    "ingest",
    "depth",
    "scorers",
    "detector",
    "metrics",
    "transport",
    "bench",
    "cli",
]

# No database: every artifact lives in files.
DATABASES = {}

# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

REST_FRAMEWORK = {
    "COERCE_DECIMAL_TO_STRING": False,
    "UNAUTHENTICATED_USER": None,
}

# Library defaults
DEPTHGUARD = {
    # Halfspace-mass approximation (K directions, n_s sub-sample, lambda spread)
    "HM_K": config("DEPTHGUARD_HM_K", default=10000, cast=int),
    "HM_NS": config("DEPTHGUARD_HM_NS", default=32, cast=int),
    "HM_LAMBDA": config("DEPTHGUARD_HM_LAMBDA", default=0.5, cast=float),
    "HM_SEED": config("DEPTHGUARD_HM_SEED", default=0, cast=int),
    # Ridge added to each class covariance = this * trace(cov) / d
    "MAHALANOBIS_RELATIVE_RIDGE": config(
        "DEPTHGUARD_MAHALANOBIS_RELATIVE_RIDGE", default=1e-6, cast=float
    ),
    "FPR_TPR_TARGET": config("DEPTHGUARD_FPR_TPR_TARGET", default=0.90, cast=float),
    "CALIBRATION_QUANTILE": config(
        "DEPTHGUARD_CALIBRATION_QUANTILE", default=0.95, cast=float
    ),
    "OUTPUT_DIR": config("DEPTHGUARD_OUTPUT_DIR", default="runs"),
    "THREADS": config("DEPTHGUARD_THREADS", default=1, cast=int),
    # Working-set size (float64 cells) of one projection block
    "PROJECTION_BLOCK": config(
        "DEPTHGUARD_PROJECTION_BLOCK", default=4_000_000, cast=int
    ),
    "TIMING_TESTS": config("DEPTHGUARD_TIMING_TESTS", default=True, cast=bool),
}

# Logging Configuration
# Console output goes to stderr; stdout is reserved for data and tables.
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {module} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": "WARNING",
    },
    "loggers": {
        app: {
            "handlers": ["console"],
            "level": config("DEPTHGUARD_LOG_LEVEL", default="INFO"),
            "propagate": False,
        }
        for app in (
            "depthguard",
            "ingest",
            "depth",
            "scorers",
            "detector",
            "metrics",
            "transport",
            "bench",
            "cli",
        )
    },
}
