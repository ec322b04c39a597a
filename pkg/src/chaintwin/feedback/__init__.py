from .loop import (
    DEFAULT_ALPHA,
    DEFAULT_TOLERANCES,
    Discrepancy,
    FeedbackLoop,
    ParameterCalibration,
    PredictionRecord,
    is_flagged,
)

__all__ = [
    "DEFAULT_ALPHA", "DEFAULT_TOLERANCES", "Discrepancy", "FeedbackLoop",
    "ParameterCalibration", "PredictionRecord", "is_flagged",
]
