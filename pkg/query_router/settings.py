"""
Django settings for the query_router project.
"""

from pathlib import Path
from decouple import config, Csv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-query-router-dev-key')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = config('DEBUG', default=True, cast=bool)

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='localhost,127.0.0.1,testserver', cast=Csv())

# Application definition
INSTALLED_APPS = [
    # Django core apps
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'django.contrib.staticfiles',

    # Third-party apps
    'rest_framework',
    'corsheaders',
    'drf_spectacular',

    # Local apps
    'apps.registry',
    'apps.embed',
    'apps.classifier',
    'apps.prompts',
    'apps.extraction',
    'apps.routing',
    'apps.evaluation',
    'apps.datagen',
    'apps.datasets',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'corsheaders.middleware.CorsMiddleware',  # CORS before CommonMiddleware
    'django.middleware.common.CommonMiddleware',
]

ROOT_URLCONF = 'query_router.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
            ],
        },
    },
]

WSGI_APPLICATION = 'query_router.wsgi.application'

# No persistent models; sqlite keeps Django's checks and test runner happy
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

STATIC_URL = 'static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# CORS Settings
CORS_ALLOWED_ORIGINS = config(
    'CORS_ALLOWED_ORIGINS',
    default='http://localhost:3000,http://127.0.0.1:3000',
    cast=Csv(),
)

# REST Framework Settings
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny',
    ],
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'DEFAULT_PARSER_CLASSES': [
        'rest_framework.parsers.JSONParser',
    ],
    'UNAUTHENTICATED_USER': None,
    'DEFAULT_SCHEMA_CLASS': 'drf_spectacular.openapi.AutoSchema',
}

# API Documentation
SPECTACULAR_SETTINGS = {
    'TITLE': 'Query Router API',
    'DESCRIPTION': 'Two-step automotive query classification and entity extraction',
    'VERSION': '1.0.0',
    'SERVE_INCLUDE_SCHEMA': False,
}

# Query router settings
QUERY_ROUTER = {
    'MODEL_PATH': config('ROUTER_MODEL_PATH', default=str(BASE_DIR / 'artifacts' / 'classifier.json')),
    'PROMPT_POOL_DIR': config('ROUTER_PROMPT_POOL_DIR', default=str(BASE_DIR / 'apps' / 'prompts' / 'pool')),
    'SCHEMA_PATH': config('ROUTER_SCHEMA_PATH', default=''),
    'BACKEND': config('ROUTER_BACKEND', default='mock'),
    'ENDPOINT_URL': config('ROUTER_ENDPOINT_URL', default='http://localhost:8000/v1/chat/completions'),
    'MODEL_NAME': config('ROUTER_MODEL_NAME', default='llama-3.2-3b-instruct'),
    'API_KEY': config('ROUTER_API_KEY', default=''),
    'TIMEOUT_SECONDS': config('ROUTER_TIMEOUT_SECONDS', default=30.0, cast=float),
    'MAX_RETRIES': config('ROUTER_MAX_RETRIES', default=2, cast=int),
    'BACKOFF_SECONDS': config('ROUTER_BACKOFF_SECONDS', default=0.5, cast=float),
    'PROMPT_ROLE': config('ROUTER_PROMPT_ROLE', default='user'),
    'TEMPERATURE': config('ROUTER_TEMPERATURE', default=0.01, cast=float),
    'MAX_TOKENS': config('ROUTER_MAX_TOKENS', default=1024, cast=int),
    'PARALLELISM': config('ROUTER_PARALLELISM', default=4, cast=int),
    'MAX_QUERY_BYTES': config('ROUTER_MAX_QUERY_BYTES', default=4096, cast=int),
    'LOAD_ON_STARTUP': config('ROUTER_LOAD_ON_STARTUP', default=False, cast=bool),
    'BIND': config('ROUTER_BIND', default='127.0.0.1:8000'),
    'SYNONYMS_PATH': config('ROUTER_SYNONYMS_PATH', default=''),
}

# Logging
LOG_LEVEL = config('LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': LOG_LEVEL,
    },
}
