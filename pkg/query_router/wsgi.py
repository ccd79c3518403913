"""
WSGI config for query_router project.

It exposes the WSGI callable as a module-level variable named ``application``.
"""

import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'query_router.settings')

application = get_wsgi_application()

from apps.routing.runtime import load_on_startup  # noqa: E402

load_on_startup()
