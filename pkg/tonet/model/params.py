"""
Parameter Store

TONetParams holds every trainable array plus the batch-norm running
statistics, grouped as:
- encoder_cfp, encoder_tcfp: backbone parameters (never aliased)
- tone_decoder, octave_decoder: transformer branches
- fusion: time-axis 1D convolution

Groups a variant does not use are absent. The fixed order below is the
checkpoint record order: groups in GROUP_ORDER, each group's parameters
then its buffers.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, Optional, Tuple, Union

import numpy as np

from ..core.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from ..core.tensor import Graph, Tensor

logger = logging.getLogger(__name__)

GROUP_ORDER = ("encoder_cfp", "encoder_tcfp", "tone_decoder", "octave_decoder", "fusion")
BUFFER_PREFIX = "buffer:"


@dataclass
class ParamGroup:
    params: Dict[str, np.ndarray] = field(default_factory=dict)
    buffers: Dict[str, np.ndarray] = field(default_factory=dict)

    def copy(self) -> "ParamGroup":
        return ParamGroup(
            params={k: v.copy() for k, v in self.params.items()},
            buffers={k: v.copy() for k, v in self.buffers.items()},
        )


@dataclass
class BoundGroup:
    """A group's parameters as graph tensors, with its buffers alongside."""

    tensors: Dict[str, Tensor]
    buffers: Dict[str, np.ndarray]

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]


class TONetParams:
    """All trainable parameters and buffers of one model replica."""

    def __init__(self, groups: Dict[str, ParamGroup]):
        unknown = set(groups) - set(GROUP_ORDER)
        if unknown:
            raise ValueError(f"Unknown parameter groups: {sorted(unknown)}")
        self.groups = {name: groups[name] for name in GROUP_ORDER if name in groups}

    def __contains__(self, group: str) -> bool:
        return group in self.groups

    def __getitem__(self, group: str) -> ParamGroup:
        return self.groups[group]

    def named_parameters(self) -> Iterator[Tuple[str, np.ndarray]]:
        for group_name, group in self.groups.items():
            for name, value in group.params.items():
                yield f"{group_name}.{name}", value

    def parameter(self, full_name: str) -> np.ndarray:
        group_name, name = full_name.split(".", 1)
        return self.groups[group_name].params[name]

    @property
    def num_parameters(self) -> int:
        return sum(v.size for _, v in self.named_parameters())

    def state_dict(self) -> Dict[str, np.ndarray]:
        """Checkpoint view in the fixed record order."""
        state: Dict[str, np.ndarray] = {}
        for group_name, group in self.groups.items():
            for name, value in group.params.items():
                state[f"{group_name}.{name}"] = value
            for name, value in group.buffers.items():
                state[f"{BUFFER_PREFIX}{group_name}.{name}"] = value
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]):
        """Copy values in place; names and shapes must match exactly."""
        expected = self.state_dict()
        missing = [k for k in expected if k not in state]
        extra = [k for k in state if k not in expected]
        if missing or extra:
            raise CheckpointError(f"Checkpoint does not match model: missing {missing[:5]}, unexpected {extra[:5]}")
        for name, target in expected.items():
            value = state[name]
            if value.shape != target.shape:
                raise CheckpointError(f"{name}: checkpoint shape {value.shape} != model shape {target.shape}")
            target[...] = value

    def copy(self) -> "TONetParams":
        return TONetParams({k: g.copy() for k, g in self.groups.items()})

    def bind(
        self, graph: Optional[Graph] = None, overrides: Optional[Dict[str, Tensor]] = None
    ) -> Dict[str, BoundGroup]:
        """
        Wrap every parameter in a Tensor for one forward pass.

        Args:
            graph: Graph to register the tensors on as named leaves
            overrides: Full names mapped to tensors used instead of the stored values

        Returns:
            Group name -> BoundGroup
        """
        overrides = overrides or {}
        bound: Dict[str, BoundGroup] = {}
        for group_name, group in self.groups.items():
            tensors: Dict[str, Tensor] = {}
            for name, value in group.params.items():
                full = f"{group_name}.{name}"
                tensor = overrides.get(full)
                if tensor is None:
                    tensor = Tensor(value)
                    if graph is not None:
                        graph.watch(full, tensor)
                tensors[name] = tensor
            bound[group_name] = BoundGroup(tensors=tensors, buffers=group.buffers)
        return bound


def save_params(path: Union[str, Path], params: TONetParams) -> Path:
    return save_checkpoint(path, params.state_dict())


def load_params(path: Union[str, Path], template: TONetParams) -> TONetParams:
    """Load a checkpoint into a copy of `template` (which fixes names and shapes)."""
    params = template.copy()
    params.load_state_dict(load_checkpoint(path))
    logger.info("Loaded %d parameters from %s", params.num_parameters, path)
    return params
