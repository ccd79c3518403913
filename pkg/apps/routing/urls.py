"""
Routing app URLs
"""
from django.urls import path, include
from rest_framework.routers import SimpleRouter

from .views import RouterViewSet

router = SimpleRouter(trailing_slash=False)
router.register(r'v1', RouterViewSet, basename='router')

urlpatterns = [
    path('', include(router.urls)),
]
