"""Diagnostics and confidence calibration for numeric physical-reasoning tasks.

Submodules: `ingest` (record schemas and JSONL parsing), `seqprob`
(sequence log-likelihood math), `metrics` (relative accuracy, macro-F1, KL,
tiers), `nice` (neighborhood confidence metrics and calibration), `fact`
(probe catalogs and scoring), `oracle` (synthetic scorers), `report`
(deterministic report emission), `cli` (the `factnice` command).
"""

__version__ = "0.1.0"

from . import fact, ingest, metrics, nice, oracle, report, seqprob  # noqa: F401
