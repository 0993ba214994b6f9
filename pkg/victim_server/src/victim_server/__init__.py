"""Reference victim classification server for the attack engine's wire protocol."""

from .app import ClassifierBackend, ServerConfig, create_app

__version__ = "0.1.0"
