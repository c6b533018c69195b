"""
Django settings for the stencil benchmark project.

The project hosts the `stencils` app: the Jacobi engine, its pipelined
temporal blocking scheduler, the loopback multi-rank driver, the analytic
performance models and the management commands that run them.

For the full list of Django settings and their values, see
https://docs.djangoproject.com/en/6.0/ref/settings/
"""

import os
import dj_database_url
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get("SECRET_KEY", "django-insecure-stencils-0b1c2d3e4f5a6b7c8d9e0f1a2b3c4d5e")

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.environ.get("DEBUG", "False").lower() == "true"

ALLOWED_HOSTS = os.environ.get("ALLOWED_HOSTS", "").split(" ")
if not ALLOWED_HOSTS or ALLOWED_HOSTS == [""]:
    ALLOWED_HOSTS = ["*"]  # Default/fallback


# Application definition

INSTALLED_APPS = [
    "django.contrib.contenttypes",
    "stencils.apps.StencilsConfig",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.middleware.common.CommonMiddleware",
]

ROOT_URLCONF = "config.urls"

TEMPLATES = []

WSGI_APPLICATION = "config.wsgi.application"


# Database
# Benchmark results are stored here when `bench --save` is used.

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": BASE_DIR / "db.sqlite3",
    }
}

database_url = os.environ.get("DATABASE_URL")
if database_url:
    DATABASES["default"] = dj_database_url.parse(database_url)


# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


# Logging

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "{asctime} {levelname} {name} {threadName}: {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        "stencils": {
            "handlers": ["console"],
            "level": os.environ.get("STENCILS_LOG_LEVEL", "WARNING"),
            "propagate": False,
        },
    },
}


def _env_float(name, default):
    return float(os.environ.get(name, default))


def _env_int(name, default):
    return int(os.environ.get(name, default))


# Stencil engine defaults. Defaults for the pipeline follow the parameter
# findings for the pipelined scheme: T = 2, d_l = 1, d_u in 1..4, no team delay,
# a long inner block dimension around 120 cells.
STENCILS = {
    "DEFAULT_TEAMS": _env_int("STENCILS_TEAMS", 1),
    "DEFAULT_TEAM_SIZE": _env_int("STENCILS_TEAM_SIZE", 2),
    "DEFAULT_UPDATES": _env_int("STENCILS_UPDATES", 2),
    "DEFAULT_DL": _env_int("STENCILS_DL", 1),
    "DEFAULT_DU": _env_int("STENCILS_DU", 4),
    "DEFAULT_DT": _env_int("STENCILS_DT", 0),
    "DEFAULT_BLOCK": (120, 8, 8),
    "SPIN_BUDGET": _env_int("STENCILS_SPIN_BUDGET", 64),
    "SPIN_TIMEOUT": _env_float("STENCILS_SPIN_TIMEOUT", 60.0),
    "PIN_THREADS": os.environ.get("STENCILS_PIN_THREADS", "False").lower() == "true",
    "RECV_TIMEOUT": _env_float("STENCILS_RECV_TIMEOUT", 0.05),
    "REPS": _env_int("STENCILS_REPS", 3),
    "VERIFY_MAX_CELLS": _env_int("STENCILS_VERIFY_MAX_CELLS", 64**3),
    "TOLERANCE": _env_float("STENCILS_TOLERANCE", 1e-13),
    # bytes/s; M_s/M_s1 = 2 and M_c/M_s1 = 8, M_s_socket is one measured socket
    "MACHINE": {
        "M_s": 20.0e9,
        "M_s1": 10.0e9,
        "M_c": 80.0e9,
        # measured STREAM COPY per socket, used by the baseline bound
        "M_s_socket": 18.5e9,
    },
    # QDR InfiniBand and a 2000 MLUP/s node
    "NETWORK": {
        "bandwidth": 3.2e9,
        "latency": 1.8e-6,
        "node_rate": 2.0e9,
    },
}
