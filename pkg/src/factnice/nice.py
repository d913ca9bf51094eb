"""Neighborhood-informed confidence metrics and calibration.

A symmetric exclusion grid of ``2 * half_count`` points around an anchor
value supports three quantities:

* NCI  - total grid probability over ``t_points`` times the anchor's own
  probability; 1 means the model spreads comparable confidence across the
  anchor's neighborhood.
* NCE  - grid probabilities weighted by the alignment weight ``psi``, which
  decays with relative distance from the truth and is floored at ``zeta``.
* Nicon - reweights beam candidates by ``P**alpha * rho**(1 - alpha)`` where
  ``rho`` is the local consistency factor, then renormalizes. Isolated
  confidence spikes lose mass to candidates with neighborhood support.

Probabilities are consumed raw (no renormalization over the grid and no
length normalization of the underlying sequences).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from decimal import Decimal
from typing import Callable

from .ingest import ScoredDistribution

ScoreFn = Callable[[float], float]


class CalibrationCollapseError(ValueError):
    """No beam had neighborhood support: the calibrated distribution degenerates.

    This is a diagnostic signal of a neighborhood-blind model, not a bug, so
    it is reported instead of being silently replaced by a uniform output.
    """


@dataclass(frozen=True)
class NiceConfig:
    """All neighborhood-metric constants.

    ``half_count * step`` must equal ``delta`` so the grid exactly tiles the
    neighborhood radius; ``t_points`` is the grid size ``2 * half_count``.
    """

    delta: float = 2.5
    step: float = 0.5
    half_count: int = 5
    zeta: float = -1.0
    epsilon: float = 0.001
    alpha: float = 0.5
    k_beams: int = 10

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise ValueError("delta must be positive")
        if not (math.isfinite(self.step) and self.step > 0):
            raise ValueError("step must be positive")
        if self.half_count < 1:
            raise ValueError("half_count must be >= 1")
        if abs(self.half_count * self.step - self.delta) > 1e-9:
            raise ValueError("half_count * step must equal delta")
        if not (math.isfinite(self.zeta) and self.zeta <= 0):
            raise ValueError("zeta must be a nonpositive truncation bound")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError("epsilon must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.k_beams < 2:
            raise ValueError("k_beams must be >= 2")

    @property
    def t_points(self) -> int:
        return 2 * self.half_count


DEFAULT_CONFIG = NiceConfig()


@dataclass(frozen=True)
class NeighborhoodGrid:
    """Symmetric probe points around an anchor, excluding the anchor itself."""

    anchor: float
    points: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.points:
            raise ValueError("grid must contain points")
        if len(self.points) % 2 != 0:
            raise ValueError("grid must be symmetric (even point count)")
        if any(b <= a for a, b in zip(self.points, self.points[1:])):
            raise ValueError("grid points must be strictly ascending")
        if self.anchor in self.points:
            raise ValueError("anchor must not be a grid point")


def build_grid(anchor: float, cfg: NiceConfig = DEFAULT_CONFIG) -> NeighborhoodGrid:
    """The points ``anchor +- k * step`` for k = 1..half_count, ascending.

    Offsets are applied in decimal arithmetic so grid values match their
    short decimal forms exactly (6.6 - 2.5 is 4.1, not a float artifact).
    """
    if not math.isfinite(anchor):
        raise ValueError("anchor must be finite")
    anchor_d = Decimal(repr(float(anchor)))
    step_d = Decimal(repr(float(cfg.step)))
    below = [float(anchor_d - k * step_d) for k in range(cfg.half_count, 0, -1)]
    above = [float(anchor_d + k * step_d) for k in range(1, cfg.half_count + 1)]
    return NeighborhoodGrid(anchor=float(anchor), points=tuple(below + above))


def _probability_at(p_of: ScoreFn, value: float) -> float:
    p = float(p_of(value))
    if not math.isfinite(p) or p < 0:
        raise ValueError(f"probability at {value!r} must be finite and nonnegative, got {p!r}")
    return p


def grid_mass(anchor: float, p_of: ScoreFn, cfg: NiceConfig = DEFAULT_CONFIG) -> float:
    """Total probability mass on the anchor's neighborhood grid."""
    grid = build_grid(anchor, cfg)
    return math.fsum(_probability_at(p_of, point) for point in grid.points)


def nci(p_of: ScoreFn, truth: float, cfg: NiceConfig = DEFAULT_CONFIG) -> float:
    """Grid mass around the truth over ``t_points`` times the truth's probability."""
    p_truth = _probability_at(p_of, truth)
    if p_truth == 0:
        raise ValueError("ground-truth probability zero: neighborhood index undefined")
    return grid_mass(truth, p_of, cfg) / (cfg.t_points * p_truth)


def psi(candidate: float, truth: float, cfg: NiceConfig = DEFAULT_CONFIG) -> float:
    """Alignment weight: max(zeta, 1 - |candidate - truth| / (|truth| + epsilon))."""
    if truth == 0:
        raise ValueError("truth must be nonzero")
    return max(cfg.zeta, 1.0 - abs(candidate - truth) / (abs(truth) + cfg.epsilon))


def nce(
    p_of: ScoreFn,
    truth: float,
    cfg: NiceConfig = DEFAULT_CONFIG,
    include_anchor: bool = False,
) -> float:
    """Mean of grid probabilities weighted by their alignment weight.

    ``include_anchor=True`` adds the truth point itself to the candidate set
    (an ablation; the default grid excludes it).
    """
    if truth == 0:
        raise ValueError("truth must be nonzero")
    grid = build_grid(truth, cfg)
    points = grid.points + ((float(truth),) if include_anchor else ())
    total = math.fsum(_probability_at(p_of, c) * psi(c, truth, cfg) for c in points)
    return total / cfg.t_points


def local_consistency(anchor_value: float, p_of: ScoreFn, cfg: NiceConfig = DEFAULT_CONFIG) -> float:
    """Neighborhood mass over ``k_beams`` times the anchor's own probability."""
    p_anchor = _probability_at(p_of, anchor_value)
    if p_anchor == 0:
        raise ValueError("anchor probability zero: local consistency undefined")
    return grid_mass(anchor_value, p_of, cfg) / (cfg.k_beams * p_anchor)


@dataclass(frozen=True)
class CalibratedEntry:
    value: float
    raw_p: float
    rho: float | None
    calibrated_p: float


@dataclass(frozen=True)
class CalibratedDistribution:
    """Beam values with raw mass, local consistency, and calibrated mass."""

    entries: tuple[CalibratedEntry, ...]

    def __post_init__(self) -> None:
        if any(e.calibrated_p < 0 for e in self.entries):
            raise ValueError("calibrated probabilities must be nonnegative")
        if abs(math.fsum(e.calibrated_p for e in self.entries) - 1.0) > 1e-9:
            raise ValueError("calibrated probabilities must sum to 1")

    def probability_of(self, value: float) -> float | None:
        for entry in self.entries:
            if entry.value == value:
                return entry.calibrated_p
        return None


def nicon(
    beams: ScoredDistribution,
    p_of: ScoreFn,
    cfg: NiceConfig = DEFAULT_CONFIG,
) -> CalibratedDistribution:
    """Reweight beam candidates by ``P**alpha * rho**(1 - alpha)`` and renormalize.

    ``rho`` uses the beam's own raw probability as the anchor mass. Beams whose
    raw probability underflows to zero get zero weight with a warning; if every
    beam ends up with zero weight the calibration collapses, which is raised as
    :class:`CalibrationCollapseError`.
    """
    if len(beams.candidates) < 2:
        raise ValueError("calibration needs at least 2 beam candidates")
    raw_ps: list[float] = []
    rhos: list[float | None] = []
    weights: list[float] = []
    for cand in beams.candidates:
        raw_p = math.exp(cand.logprob)
        if raw_p <= 0.0:
            warnings.warn(
                f"beam value {cand.value!r} has zero raw probability; weight set to 0",
                RuntimeWarning,
                stacklevel=2,
            )
            raw_ps.append(0.0)
            rhos.append(None)
            weights.append(0.0)
            continue
        rho = grid_mass(cand.value, p_of, cfg) / (cfg.k_beams * raw_p)
        raw_ps.append(raw_p)
        rhos.append(rho)
        if cfg.alpha == 1.0:
            # Exponent pair (1, 0) exactly: keep the raw probability untouched
            # so the alpha=1 case is bit-identical to plain normalization.
            weights.append(raw_p)
        elif cfg.alpha == 0.0:
            weights.append(rho)
        else:
            weights.append(raw_p**cfg.alpha * rho ** (1.0 - cfg.alpha))
    total = math.fsum(weights)
    if total <= 0.0:
        raise CalibrationCollapseError(
            "calibration collapse: no beam candidate has neighborhood support"
        )
    entries = tuple(
        CalibratedEntry(value=cand.value, raw_p=raw_p, rho=rho, calibrated_p=w / total)
        for cand, raw_p, rho, w in zip(beams.candidates, raw_ps, rhos, weights)
    )
    return CalibratedDistribution(entries=entries)


def calibrated_score_fn(calibrated: CalibratedDistribution, fallback: ScoreFn) -> ScoreFn:
    """Score with calibrated mass where a beam value exists, raw mass otherwise.

    This is the convention for recomputing neighborhood metrics after
    calibration; downstream rows should carry a flag naming it.
    """
    by_value = {entry.value: entry.calibrated_p for entry in calibrated.entries}

    def score(value: float) -> float:
        hit = by_value.get(float(value))
        return hit if hit is not None else fallback(value)

    return score


POST_CALIBRATION_SCORING = "calibrated-with-raw-fallback"
