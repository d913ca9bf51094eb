"""Sequence-probability math over per-step token scores.

All logarithms are natural. Log-sum-exp uses max subtraction, so every
per-step log-probability is exactly <= 0 in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class StepLogits:
    """Raw scores over one decoding step's vocabulary plus the chosen token index."""

    scores: tuple[float, ...]
    chosen_index: int

    def __post_init__(self) -> None:
        if not self.scores:
            raise ValueError("step must have at least one score")
        if not all(math.isfinite(s) for s in self.scores):
            raise ValueError("step scores must be finite")
        if not 0 <= self.chosen_index < len(self.scores):
            raise ValueError("chosen_index out of range")


@dataclass(frozen=True)
class Temperature:
    t: float

    def __post_init__(self) -> None:
        if not (isinstance(self.t, (int, float)) and math.isfinite(self.t) and self.t > 0):
            raise ValueError("temperature must be a finite positive number")


def softmax(scores: Sequence[float], t: float = 1.0) -> np.ndarray:
    """Temperature-scaled softmax with max subtraction."""
    if t <= 0:
        raise ValueError("temperature must be positive")
    z = np.asarray(scores, dtype=float) / t
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def _step_logprob(step: StepLogits, t: float) -> float:
    z = np.asarray(step.scores, dtype=float) / t
    m = float(z.max())
    return float(z[step.chosen_index]) - m - math.log(float(np.exp(z - m).sum()))


def sequence_logprob(steps: Iterable[StepLogits]) -> float:
    """Total log-likelihood: sum over steps of the chosen token's log-softmax."""
    steps = list(steps)
    if not steps:
        raise ValueError("step list must be non-empty")
    return math.fsum(_step_logprob(step, 1.0) for step in steps)


def sequence_logprob_scaled(steps: Iterable[StepLogits], temp: Temperature | float) -> float:
    """Total log-likelihood with each step's scores divided by the temperature.

    At t=1 this is the same code path as :func:`sequence_logprob`, so the two
    agree bit-for-bit.
    """
    if not isinstance(temp, Temperature):
        temp = Temperature(float(temp))
    steps = list(steps)
    if not steps:
        raise ValueError("step list must be non-empty")
    return math.fsum(_step_logprob(step, temp.t) for step in steps)


def normalize(weights: Sequence[float]) -> list[float]:
    """Scale nonnegative weights into a probability vector."""
    weights = [float(w) for w in weights]
    if not weights:
        raise ValueError("weights must be non-empty")
    for w in weights:
        if not math.isfinite(w):
            raise ValueError("weights must be finite")
        if w < 0:
            raise ValueError("weights must be nonnegative")
    total = math.fsum(weights)
    if total <= 0:
        raise ValueError("weights must not all be zero")
    return [w / total for w in weights]


def entropy(p: Sequence[float]) -> float:
    """Shannon entropy in nats, with 0*log(0) taken as 0."""
    p = [float(x) for x in p]
    for x in p:
        if not math.isfinite(x) or x < 0:
            raise ValueError("probabilities must be finite and nonnegative")
    if abs(math.fsum(p) - 1.0) > 1e-9:
        raise ValueError("probabilities must sum to 1")
    return -math.fsum(x * math.log(x) for x in p if x > 0)
