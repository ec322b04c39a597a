from .pipeline import (
    CleanRecord,
    Drop,
    LoadResult,
    RawEvent,
    Rejection,
    SourceKind,
    TransformState,
    extract,
    load,
    transform,
)
from .alerts import AlertEngine, AlertEvent, AlertRule, DEFAULT_RULES
from .stream import IngestCounters, StreamIngestor

__all__ = [
    "CleanRecord", "Drop", "LoadResult", "RawEvent", "Rejection", "SourceKind",
    "TransformState", "extract", "load", "transform", "AlertEngine",
    "AlertEvent", "AlertRule", "DEFAULT_RULES", "IngestCounters",
    "StreamIngestor",
]
