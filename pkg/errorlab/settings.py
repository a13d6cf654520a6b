"""
Django settings for the errorlab project.

The project has no web surface: it hosts the ``errormodel`` app, whose
management commands are the batch front end of the toolkit.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""
import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / '.env')

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'django-insecure-errorlab-batch-toolkit')

DEBUG = os.environ.get('DJANGO_DEBUG', '') == '1'

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'errormodel',
]

# No persistence: every command reads files and writes reports.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Error-model toolkit

ERRORMODEL = {
    'DATA_DIR': Path(os.environ.get('ERRORMODEL_DATA_DIR', BASE_DIR / 'errormodel' / 'data')),
    # |observed - reference| must stay below this fraction of observed
    'SANITY_BOUND': float(os.environ.get('ERRORMODEL_SANITY_BOUND', '0.01')),
    'EFFECT_EPS_MM': float(os.environ.get('ERRORMODEL_EFFECT_EPS_MM', '1e-6')),
    'SINGULAR_TOL': float(os.environ.get('ERRORMODEL_SINGULAR_TOL', '1e-12')),
    'DEFAULT_WAVELENGTH_M': 20.0,
    # grids the tabulated error columns are printed on
    'ERROR_RESOLUTION': {
        'ppm': 1.0,
        'mm': 0.1,
    },
    'MC_DEFAULT_SAMPLES': 1_000_000,
}


# Logging: reports go to stdout, diagnostics to stderr

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'errormodel': {
            'handlers': ['console'],
            'level': os.environ.get('ERRORMODEL_LOG_LEVEL', 'WARNING'),
            'propagate': False,
        },
    },
}
