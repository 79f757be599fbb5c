from .app import app, create_app
from . import handlers, models

__all__ = ["app", "create_app", "handlers", "models"]
