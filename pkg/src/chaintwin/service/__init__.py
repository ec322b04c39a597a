from .config import EngineConfig
from .engine import EngineHandle

__all__ = ["EngineConfig", "EngineHandle"]
