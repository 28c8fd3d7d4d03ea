"""Session-oriented HTTP service for interactive patch triage."""

from .app import create_app
from .sessions import (
    EmptyActiveSet, Session, SessionStore, UnknownBug, UnknownCluster,
    UnknownPatch, UnknownSession,
)

__all__ = [
    "EmptyActiveSet", "Session", "SessionStore", "UnknownBug",
    "UnknownCluster", "UnknownPatch", "UnknownSession", "create_app",
]
