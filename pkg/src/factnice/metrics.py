"""Accuracy-facing metrics: relative-accuracy ladder, multi-label macro-F1,
KL divergence, tier partitioning, robustness aggregation, and context deltas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ingest import ProbeResponse

_DEFAULT_THRESHOLDS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95)


@dataclass(frozen=True)
class MraLadder:
    """The fixed 10-threshold confidence ladder for mean relative accuracy."""

    thresholds: tuple[float, ...] = _DEFAULT_THRESHOLDS

    def __post_init__(self) -> None:
        if len(self.thresholds) != 10:
            raise ValueError("ladder must have exactly 10 thresholds")
        if any(not (0.0 < t < 1.0) for t in self.thresholds):
            raise ValueError("thresholds must lie in (0, 1)")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly increasing")


DEFAULT_LADDER = MraLadder()


def mra(predicted: float, truth: float, ladder: MraLadder = DEFAULT_LADDER) -> float:
    """Fraction of ladder thresholds t with |predicted - truth| / |truth| < 1 - t.

    The comparison is strict, so the result takes only values k/10.
    """
    if truth == 0:
        raise ValueError("truth must be nonzero")
    ratio = abs(predicted - truth) / abs(truth)
    hits = sum(1 for theta in ladder.thresholds if ratio < 1.0 - theta)
    return hits / len(ladder.thresholds)


def sample_f1(response: ProbeResponse) -> float:
    """Set-overlap F1 of one response: 2|sel & gold| / (|sel| + |gold|)."""
    denom = len(response.selected) + len(response.gold)
    if denom == 0:
        return 1.0
    return 2.0 * len(response.selected & response.gold) / denom


def macro_f1(
    responses: Sequence[ProbeResponse],
    option_universe: Iterable[str],
    skip_vacuous: bool = False,
) -> tuple[float, dict[str, float]]:
    """Per-option F1 over a response list, averaged without weighting.

    Each option is scored as its own binary task: membership in ``selected``
    is the prediction, membership in ``gold`` the label. An option with no
    positive labels and no positive predictions counts as F1 = 1 (vacuous
    agreement); pass ``skip_vacuous=True`` to drop such options from both the
    per-option map and the macro average instead.
    """
    responses = list(responses)
    if not responses:
        raise ValueError("response list must be non-empty")
    kinds = {r.probe_kind for r in responses}
    if len(kinds) != 1:
        raise ValueError("responses mix probe kinds")
    universe = sorted(set(option_universe))
    mentioned = set().union(*(r.selected | r.gold for r in responses))
    if not mentioned <= set(universe):
        extra = sorted(mentioned - set(universe))
        raise ValueError(f"options outside the declared universe: {extra}")

    per_option: dict[str, float] = {}
    for option in universe:
        tp = fp = fn = 0
        for r in responses:
            predicted = option in r.selected
            labelled = option in r.gold
            if predicted and labelled:
                tp += 1
            elif predicted:
                fp += 1
            elif labelled:
                fn += 1
        denom = 2 * tp + fp + fn
        if denom == 0:
            if skip_vacuous:
                continue
            per_option[option] = 1.0
        else:
            per_option[option] = 2.0 * tp / denom
    if not per_option:
        raise ValueError("no scorable options (all vacuous and skipped)")
    macro = math.fsum(per_option.values()) / len(per_option)
    return macro, per_option


def kl_divergence(h: Sequence[float], p: Sequence[float]) -> float:
    """KL(h || p) in nats, with 0 * log(0 / x) taken as 0."""
    h = [float(x) for x in h]
    p = [float(x) for x in p]
    if len(h) != len(p):
        raise ValueError("distributions must have the same length")
    for vec, name in ((h, "h"), (p, "p")):
        if any(not math.isfinite(x) or x < 0 for x in vec):
            raise ValueError(f"{name} must contain finite nonnegative entries")
        if abs(math.fsum(vec) - 1.0) > 1e-9:
            raise ValueError(f"{name} must sum to 1")
    terms = []
    for hi, pi in zip(h, p):
        if hi == 0:
            continue
        if pi == 0:
            raise ValueError("infinite divergence: h puts mass where p has none")
        terms.append(hi * math.log(hi / pi))
    return math.fsum(terms)


class Tier(str, Enum):
    LOW = "LOW"
    MID = "MID"
    HIGH = "HIGH"


@dataclass(frozen=True)
class TierPartition:
    """Accuracy tiers: [0, low_high) / [low_high, mid_high) / [mid_high, 1]."""

    low_high: float = 0.33
    mid_high: float = 0.66

    def __post_init__(self) -> None:
        if not 0.0 < self.low_high < self.mid_high < 1.0:
            raise ValueError("tier boundaries must satisfy 0 < low_high < mid_high < 1")


DEFAULT_PARTITION = TierPartition()


def tier_assign(value: float, partition: TierPartition = DEFAULT_PARTITION) -> Tier:
    """Bucket an accuracy value; boundaries are left-closed, HIGH includes 1."""
    if not 0.0 <= value <= 1.0:
        raise ValueError("value must lie in [0, 1]")
    if value < partition.low_high:
        return Tier.LOW
    if value < partition.mid_high:
        return Tier.MID
    return Tier.HIGH


class StdMode(str, Enum):
    POPULATION = "POPULATION"
    SAMPLE = "SAMPLE"


@dataclass(frozen=True)
class RobustnessStat:
    mean: float
    std: float
    n_variants: int

    def __post_init__(self) -> None:
        if self.n_variants < 1:
            raise ValueError("n_variants must be >= 1")
        if self.std < 0:
            raise ValueError("std must be nonnegative")


def robustness(per_variant_scores: Sequence[float], mode: StdMode = StdMode.POPULATION) -> RobustnessStat:
    """Mean and spread of a score across prompt variants."""
    scores = np.asarray(list(per_variant_scores), dtype=float)
    if scores.size == 0:
        raise ValueError("need at least one variant score")
    if mode is StdMode.SAMPLE and scores.size == 1:
        raise ValueError("sample std is undefined for a single variant")
    ddof = 0 if mode is StdMode.POPULATION else 1
    return RobustnessStat(
        mean=float(scores.mean()),
        std=float(scores.std(ddof=ddof)),
        n_variants=int(scores.size),
    )


@dataclass(frozen=True)
class CotDelta:
    """Per-item score change between a conditioned context and the zero-shot one."""

    mean_delta: float
    per_item: dict[str, float]
    n_common: int


def cot_delta(zero_shot: Mapping[str, float], conditioned: Mapping[str, float]) -> CotDelta:
    """Difference conditioned - zero_shot over the item-id intersection."""
    common = sorted(set(zero_shot) & set(conditioned))
    if not common:
        raise ValueError("no common items between the two score maps")
    per_item = {item: conditioned[item] - zero_shot[item] for item in common}
    return CotDelta(
        mean_delta=math.fsum(per_item.values()) / len(common),
        per_item=per_item,
        n_common=len(common),
    )
