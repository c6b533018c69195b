"""
URL configuration for the stencil benchmark project.

Only read-only report endpoints are exposed; runs are started from the
management commands.
"""

from django.urls import path, include

urlpatterns = [
    path("", include("stencils.urls")),
]
