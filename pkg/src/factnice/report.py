"""Report assembly: joins metric outputs into one document plus plot-ready series.

Emission is deterministic byte-for-byte: fixed key order, fixed CSV headers,
and every number rounded to 6 fraction digits. Missing sections are emitted
as explicit nulls so downstream diffing stays stable. Nothing is recomputed
here; every number comes from exactly one upstream operation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .metrics import DEFAULT_PARTITION, Tier, TierPartition, tier_assign

if TYPE_CHECKING:  # only for annotations; fact imports this module at runtime
    from .fact import ProbeScorecard, TgGnaScore

TIER_ORDER = (Tier.LOW, Tier.MID, Tier.HIGH)

CSV_HEADERS = {
    "mra_by_context.csv": ["context", "mean_mra"],
    "probe_f1.csv": ["probe_kind", "option_id", "f1", "n_items"],
    "tiers.csv": ["tier", "n", "mean_top1_confidence"],
    "nice.csv": ["metric", "raw", "calibrated"],
    "robustness.csv": ["context", "mean", "std", "n_variants"],
    "cot_deltas.csv": ["context", "mean_delta", "n_common"],
}


class ReportFormat(str, Enum):
    JSON = "JSON"
    CSV_BUNDLE = "CSV_BUNDLE"


@dataclass(frozen=True)
class TierRow:
    tier: Tier
    n: int
    mean_top1_confidence: float | None


@dataclass(frozen=True)
class NiceTable:
    nci_raw: float | None
    nci_calibrated: float | None
    nce_raw: float | None
    nce_calibrated: float | None


@dataclass(frozen=True)
class RobustnessRow:
    context: str
    mean: float
    std: float
    n_variants: int


@dataclass(frozen=True)
class CotDeltaRow:
    context: str
    mean_delta: float
    n_common: int | None


@dataclass
class DiagnosticReport:
    """Per-model aggregation of every diagnostic axis."""

    model_tag: str
    vf: "ProbeScorecard | None" = None
    plc: "ProbeScorecard | None" = None
    tg_mcq: "ProbeScorecard | None" = None
    tg_gna: "TgGnaScore | None" = None
    mra_by_context: Mapping[str, float] = field(default_factory=dict)
    cot_deltas: tuple[CotDeltaRow, ...] = ()
    tier_table: tuple[TierRow, ...] | None = None
    nice_table: NiceTable | None = None
    robustness_rows: tuple[RobustnessRow, ...] = ()
    template_version: str = "1"


def tier_confidence_table(
    items: Iterable[tuple[float, float]],
    partition: TierPartition = DEFAULT_PARTITION,
) -> tuple[TierRow, ...]:
    """Bucket (accuracy, top-1 confidence) pairs into tiers; mean confidence per tier.

    Top-1 confidence is the item's maximum candidate probability. Empty tiers
    get an explicit null mean.
    """
    buckets: dict[Tier, list[float]] = {tier: [] for tier in TIER_ORDER}
    for accuracy, confidence in items:
        if not 0.0 <= confidence <= 1.0:
            raise ValueError("top-1 confidence must lie in [0, 1]")
        buckets[tier_assign(accuracy, partition)].append(confidence)
    rows = []
    for tier in TIER_ORDER:
        values = buckets[tier]
        mean = math.fsum(values) / len(values) if values else None
        rows.append(TierRow(tier=tier, n=len(values), mean_top1_confidence=mean))
    return tuple(rows)


def _round6(value: float | None) -> float | None:
    return None if value is None else round(float(value), 6)


def _fmt6(value: float | None) -> str:
    return "" if value is None else f"{float(value):.6f}"


def _scorecard_dict(card: "ProbeScorecard | None") -> dict | None:
    if card is None:
        return None
    return {
        "macro_f1": _round6(card.macro_f1),
        "per_option_f1": {k: _round6(v) for k, v in sorted(card.per_option_f1.items())},
        "n_items": card.n_items,
    }


def report_to_dict(report: DiagnosticReport) -> dict:
    """Fixed-order plain-dict form of a report, numbers rounded to 6 digits."""
    tg_gna = None
    if report.tg_gna is not None:
        tg_gna = {"mean_mra": _round6(report.tg_gna.mean_mra), "n_items": report.tg_gna.n_items}
    tier_table = None
    if report.tier_table is not None:
        tier_table = [
            {"tier": row.tier.value, "n": row.n, "mean_top1_confidence": _round6(row.mean_top1_confidence)}
            for row in report.tier_table
        ]
    nice_table = None
    if report.nice_table is not None:
        nice_table = {
            "nci_raw": _round6(report.nice_table.nci_raw),
            "nci_calibrated": _round6(report.nice_table.nci_calibrated),
            "nce_raw": _round6(report.nice_table.nce_raw),
            "nce_calibrated": _round6(report.nice_table.nce_calibrated),
        }
    return {
        "model_tag": report.model_tag,
        "template_version": report.template_version,
        "probe_f1": {
            "VF": _scorecard_dict(report.vf),
            "PLC": _scorecard_dict(report.plc),
            "TG_EVENT": _scorecard_dict(report.tg_mcq),
        },
        "tg_gna": tg_gna,
        "mra_by_context": {k: _round6(v) for k, v in sorted(report.mra_by_context.items())},
        "cot_deltas": [
            {"context": row.context, "mean_delta": _round6(row.mean_delta), "n_common": row.n_common}
            for row in report.cot_deltas
        ],
        "tier_table": tier_table,
        "nice_table": nice_table,
        "robustness": [
            {
                "context": row.context,
                "mean": _round6(row.mean),
                "std": _round6(row.std),
                "n_variants": row.n_variants,
            }
            for row in report.robustness_rows
        ],
    }


def render_json(report: DiagnosticReport) -> str:
    return json.dumps(report_to_dict(report), ensure_ascii=False, indent=2) + "\n"


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def render_csv_bundle(report: DiagnosticReport) -> dict[str, str]:
    """One CSV document per table, keyed by file name."""
    mra_rows = [[ctx, _fmt6(mean)] for ctx, mean in sorted(report.mra_by_context.items())]

    probe_rows: list[list] = []
    for kind, card in (("VF", report.vf), ("PLC", report.plc), ("TG_EVENT", report.tg_mcq)):
        if card is None:
            continue
        probe_rows.append([kind, "MACRO", _fmt6(card.macro_f1), card.n_items])
        for option_id, f1 in sorted(card.per_option_f1.items()):
            probe_rows.append([kind, option_id, _fmt6(f1), card.n_items])

    tier_rows = []
    if report.tier_table is not None:
        tier_rows = [
            [row.tier.value, row.n, _fmt6(row.mean_top1_confidence)] for row in report.tier_table
        ]

    nice_rows = []
    if report.nice_table is not None:
        nice_rows = [
            ["nci", _fmt6(report.nice_table.nci_raw), _fmt6(report.nice_table.nci_calibrated)],
            ["nce", _fmt6(report.nice_table.nce_raw), _fmt6(report.nice_table.nce_calibrated)],
        ]

    robustness_rows = [
        [row.context, _fmt6(row.mean), _fmt6(row.std), row.n_variants]
        for row in report.robustness_rows
    ]
    delta_rows = [
        [row.context, _fmt6(row.mean_delta), "" if row.n_common is None else row.n_common]
        for row in report.cot_deltas
    ]

    tables = {
        "mra_by_context.csv": mra_rows,
        "probe_f1.csv": probe_rows,
        "tiers.csv": tier_rows,
        "nice.csv": nice_rows,
        "robustness.csv": robustness_rows,
        "cot_deltas.csv": delta_rows,
    }
    return {name: _csv_text(CSV_HEADERS[name], rows) for name, rows in tables.items()}


def emit(report: DiagnosticReport, fmt: ReportFormat, destination) -> list[Path]:
    """Write a report as one JSON file or a directory of CSV tables."""
    destination = Path(destination)
    if fmt is ReportFormat.JSON:
        destination.parent.mkdir(parents=True, exist_ok=True)
        destination.write_text(render_json(report), encoding="utf-8", newline="\n")
        return [destination]
    destination.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in render_csv_bundle(report).items():
        path = destination / name
        path.write_text(text, encoding="utf-8", newline="\n")
        written.append(path)
    return written


def plot_series(report: DiagnosticReport) -> dict[str, list[dict]]:
    """Numeric series ready for plotting; rendering itself is out of scope.

    ``f1_vs_mra`` pairs each probe axis's macro-F1 with the matching
    chain-of-thought context mean (zero-shot as fallback), ``tier_confidence``
    mirrors the tier table, and ``nice_raw_vs_calibrated`` the metric table.
    """
    series: dict[str, list[dict]] = {}

    f1_points = []
    context_for = {"VF": "COT_VF", "PLC": "COT_PLC"}
    for kind, card in (("VF", report.vf), ("PLC", report.plc)):
        if card is None:
            continue
        mra = report.mra_by_context.get(context_for[kind])
        if mra is None:
            mra = report.mra_by_context.get("ZERO_SHOT")
        if mra is None:
            continue
        f1_points.append({"label": kind, "f1": card.macro_f1, "mra": mra})
    if f1_points:
        series["f1_vs_mra"] = f1_points

    if report.tier_table:
        series["tier_confidence"] = [
            {"tier": row.tier.value, "n": row.n, "mean_top1_confidence": row.mean_top1_confidence}
            for row in report.tier_table
        ]

    if report.nice_table is not None:
        series["nice_raw_vs_calibrated"] = [
            {"metric": "nci", "raw": report.nice_table.nci_raw, "calibrated": report.nice_table.nci_calibrated},
            {"metric": "nce", "raw": report.nice_table.nce_raw, "calibrated": report.nice_table.nce_calibrated},
        ]

    return series
