"""Adam with bias correction over a TONetParams store."""

from dataclasses import dataclass, field
from typing import Dict, Mapping, Tuple

import numpy as np

from ..model.params import TONetParams
from .config import TrainConfig


class NonFiniteGradientError(ValueError):
    """Raised before any update when a gradient holds NaN or Inf."""

    def __init__(self, name: str):
        super().__init__(f"Non-finite gradient for parameter '{name}'; step aborted")
        self.name = name


@dataclass
class AdamState:
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: TONetParams, grads: Mapping[str, np.ndarray], state: AdamState, config: TrainConfig
) -> Tuple[TONetParams, AdamState]:
    """
    One Adam update, applied in place.

    Args:
        params: Parameters to update
        grads: Gradient per full parameter name (same keys as params)
        state: Moments and step count, updated in place
        config: learning_rate, betas, epsilon

    Returns:
        (params, state), both updated in place
    """
    names = [name for name, _ in params.named_parameters()]
    missing = [n for n in names if n not in grads]
    if missing:
        raise ValueError(f"Missing gradients for {missing[:5]}")
    for name in names:
        if not np.all(np.isfinite(grads[name])):
            raise NonFiniteGradientError(name)

    beta1, beta2 = config.betas
    state.step += 1
    correction1 = 1.0 - beta1 ** state.step
    correction2 = 1.0 - beta2 ** state.step

    for name, value in params.named_parameters():
        g = grads[name]
        m = state.m.setdefault(name, np.zeros_like(value))
        v = state.v.setdefault(name, np.zeros_like(value))
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        value -= config.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + config.epsilon)
    return params, state
