"""
Django settings for the treespace project.

Only the pieces the tree-distance commands need are configured: there is no
database, no middleware and no URL routing.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/6.0/ref/settings/
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


def _env_float(name, default):
    value = os.environ.get(name)
    return float(value) if value else default


def _env_int(name, default):
    value = os.environ.get(name)
    return int(value) if value else default


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('SECRET_KEY', "treespace-local-secret-key")

DEBUG = os.environ.get('DEBUG', 'False').lower() in ('1', 'true', 'yes')

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'phylodist',
]

DATABASES = {}


# Internationalization
# https://docs.djangoproject.com/en/6.0/topics/i18n/

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True


# Tree-distance engines
# Tolerances are read once per command and handed to the engines, which
# never look at settings themselves.

PHYLODIST = {
    "COVER_TOLERANCE": _env_float("PHYLODIST_COVER_TOLERANCE", 1e-12),
    "RATIO_TOLERANCE": _env_float("PHYLODIST_RATIO_TOLERANCE", 1e-9),
    "FLOW_EPSILON": _env_float("PHYLODIST_FLOW_EPSILON", 1e-15),
    "DEFAULT_JOBS": _env_int("PHYLODIST_JOBS", None),  # None: one per core
    "MAST_MAX_LEAVES": _env_int("PHYLODIST_MAST_MAX_LEAVES", 16),
}


# Logging

LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {name} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'phylodist': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}
