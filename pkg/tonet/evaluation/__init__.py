"""TONet Evaluation"""

from .metrics import (
    METRIC_NAMES,
    EvalResult,
    GridMismatchError,
    MelodySeries,
    average_results,
    evaluate_contours,
    evaluate_pair,
    format_table,
    resample_contour,
    roa,
)

__all__ = [
    "METRIC_NAMES",
    "EvalResult",
    "GridMismatchError",
    "MelodySeries",
    "average_results",
    "evaluate_contours",
    "evaluate_pair",
    "format_table",
    "resample_contour",
    "roa",
]
