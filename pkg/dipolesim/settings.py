"""
Runtime settings for the dipolesim simulation package.

Every tunable is read from the environment (optionally through a `.env` file in the
working directory). Rates are in units of Gamma_0, lengths in lambda_0, times in 1/Gamma_0.
"""

import logging.config
import os
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

BASE_DIR = Path(__file__).resolve().parent.parent

PRESETS_DIR = BASE_DIR / "presets"

LOG_LEVEL = os.getenv("DIPOLESIM_LOG_LEVEL", "INFO").upper()

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
            "level": LOG_LEVEL,
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        "dipolesim": {
            "handlers": ["console"],
            "level": LOG_LEVEL,
            "propagate": False,
        },
        "scenarios": {
            "handlers": ["console"],
            "level": LOG_LEVEL,
            "propagate": False,
        },
        "cli": {
            "handlers": ["console"],
            "level": LOG_LEVEL,
            "propagate": False,
        },
    },
}


def _env_int(name, default):
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    return int(value)


# Worker cap for sweeps and disorder realizations; --threads on the command line wins
THREADS = _env_int("DIPOLESIM_THREADS", os.cpu_count() or 1)

# Resource budgets
MAX_BASIS_DIMENSION = _env_int("DIPOLESIM_MAX_BASIS_DIMENSION", 4096)
MAX_LIOUVILLIAN_DIMENSION = _env_int("DIPOLESIM_MAX_LIOUVILLIAN_DIMENSION", 60)
MAX_FULL_MODEL_EMITTERS = _env_int("DIPOLESIM_MAX_FULL_MODEL_EMITTERS", 6)

# Integrator defaults
DEFAULT_REL_TOL = float(os.getenv("DIPOLESIM_REL_TOL", "1e-8"))
DEFAULT_ABS_TOL = float(os.getenv("DIPOLESIM_ABS_TOL", "1e-10"))
# Steady-state residual threshold per basis state, multiplied by D
DEFAULT_STEADY_STATE_TOL = float(os.getenv("DIPOLESIM_STEADY_STATE_TOL", "1e-10"))
MAX_INTEGRATION_TIME = float(os.getenv("DIPOLESIM_MAX_INTEGRATION_TIME", "20000"))

# Detector defaults
DEFAULT_DELTA_PHI = 0.01 * 3.141592653589793
DEFAULT_R_FAR = 100.0
DEFAULT_N_QUAD = 5

# Tracing
ENABLE_TRACING = os.getenv("DIPOLESIM_ENABLE_TRACING", "False").lower() in ("true", "1", "t")
TRACING_SAMPLING_RATE = float(os.getenv("DIPOLESIM_TRACING_SAMPLING_RATE", "1.0"))


def configure_logging(config=None):
    """Apply the logging configuration (LOGGING by default)."""
    logging.config.dictConfig(config or LOGGING)
