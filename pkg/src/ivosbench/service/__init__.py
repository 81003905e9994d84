"""FastAPI service wrapping the benchmark core."""

from .app import app

__all__ = ["app"]
