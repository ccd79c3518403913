"""
ASGI config for query_router project.

It exposes the ASGI callable as a module-level variable named ``application``.
"""

import os

from django.core.asgi import get_asgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'query_router.settings')

application = get_asgi_application()

from apps.routing.runtime import load_on_startup  # noqa: E402

load_on_startup()
