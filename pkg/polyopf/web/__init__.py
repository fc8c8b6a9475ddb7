"""HTTP interface for polyopf."""

from .app import create_app

__all__ = ["create_app"]
