from .app import create_app
from .session import ApiError, Session, SessionConfig

__all__ = ["ApiError", "Session", "SessionConfig", "create_app"]
