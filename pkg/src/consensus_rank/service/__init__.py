"""HTTP service exposing the pipeline and its stages over JSON."""

from .app import create_app

__all__ = ["create_app"]
