"""TONet Core Components"""

from .tensor import (
    Tensor,
    Graph,
    ShapeError,
    UnknownPrimitiveError,
    apply_primitive,
    backward,
    finite_diff_check,
)
from .checkpoint import CheckpointError, save_checkpoint, load_checkpoint

__all__ = [
    "Tensor",
    "Graph",
    "ShapeError",
    "UnknownPrimitiveError",
    "apply_primitive",
    "backward",
    "finite_diff_check",
    "CheckpointError",
    "save_checkpoint",
    "load_checkpoint",
]
