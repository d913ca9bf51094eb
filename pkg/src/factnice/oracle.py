"""Synthetic pseudo-model scorers for tests and desk-scale pipeline runs.

Scorer outputs are probabilities directly (no softmax layer); the natural log
is applied only when packing them into the candidate-score schema. Everything
is deterministic: beam selection breaks score ties by ascending value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from typing import Sequence

from .ingest import CandidateScore, CandidateSource, ScoredDistribution, format_value


class ScorerKind(str, Enum):
    SPIKE = "SPIKE"
    GAUSSIAN = "GAUSSIAN"
    UNIFORM = "UNIFORM"


@dataclass(frozen=True)
class SyntheticScorer:
    """A deterministic probability profile over the answer line."""

    kind: ScorerKind
    base_mass: float
    spike_value: float | None = None
    mu: float | None = None
    sigma: float | None = None
    lo: float | None = None
    hi: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.base_mass <= 1.0:
            raise ValueError("base_mass must lie in (0, 1]")
        if self.kind is ScorerKind.SPIKE:
            if self.spike_value is None or not math.isfinite(self.spike_value):
                raise ValueError("SPIKE needs a finite spike_value")
        elif self.kind is ScorerKind.GAUSSIAN:
            if self.mu is None or not math.isfinite(self.mu):
                raise ValueError("GAUSSIAN needs a finite mu")
            if self.sigma is None or not (math.isfinite(self.sigma) and self.sigma > 0):
                raise ValueError("GAUSSIAN needs sigma > 0")
        elif self.kind is ScorerKind.UNIFORM:
            if self.lo is None or self.hi is None or not self.lo < self.hi:
                raise ValueError("UNIFORM needs lo < hi")


def spike(value: float, base_mass: float) -> SyntheticScorer:
    return SyntheticScorer(kind=ScorerKind.SPIKE, base_mass=base_mass, spike_value=value)


def gaussian(mu: float, sigma: float, base_mass: float) -> SyntheticScorer:
    return SyntheticScorer(kind=ScorerKind.GAUSSIAN, base_mass=base_mass, mu=mu, sigma=sigma)


def uniform(lo: float, hi: float, base_mass: float) -> SyntheticScorer:
    return SyntheticScorer(kind=ScorerKind.UNIFORM, base_mass=base_mass, lo=lo, hi=hi)


def _same_decimal(a: float, b: float) -> bool:
    # Canonical decimal identity: 7.1 matches 7.1 but not 7.1000000001.
    return Decimal(repr(float(a))) == Decimal(repr(float(b)))


def score(scorer: SyntheticScorer, value: float) -> float:
    """Probability the scorer assigns to one answer value."""
    if scorer.kind is ScorerKind.SPIKE:
        return scorer.base_mass if _same_decimal(value, scorer.spike_value) else 0.0
    if scorer.kind is ScorerKind.GAUSSIAN:
        z = (value - scorer.mu) / scorer.sigma
        return scorer.base_mass * math.exp(-0.5 * z * z)
    return scorer.base_mass if scorer.lo <= value <= scorer.hi else 0.0


def beam_sample(
    scorer: SyntheticScorer,
    k: int,
    candidates: Sequence[float],
    item_id: str = "synthetic",
    step: float = 0.5,
) -> ScoredDistribution:
    """The k highest-scoring candidate values as a beam distribution.

    Zero-score candidates are excluded; ties break by ascending value. Fewer
    than 2 nonzero candidates is an error because calibration needs at least
    two beams.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(candidates):
        raise ValueError("k must not exceed the candidate count")
    scored = [(float(v), score(scorer, v)) for v in candidates]
    nonzero = [(v, p) for v, p in scored if p > 0.0]
    if len(nonzero) < 2:
        raise ValueError(f"only {len(nonzero)} candidates have nonzero score; need at least 2 beams")
    nonzero.sort(key=lambda vp: (-vp[1], vp[0]))
    chosen = nonzero[: min(k, len(nonzero))]
    return ScoredDistribution(
        item_id=item_id,
        candidates=tuple(
            CandidateScore(
                value=v,
                text=format_value(v, step),
                logprob=math.log(p),
                source=CandidateSource.BEAM,
            )
            for v, p in chosen
        ),
    )
