"""Probe catalogs and scoring for the three reasoning-fidelity axes.

VF probes ask which visual preconditions a question needs, PLC probes which
kinematic formulas apply, and TG probes ground events in time (a timestamp
regression plus a 4-way event MCQ).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

from . import metrics
from .ingest import GnaContext, ProbeKind, ProbeResponse, TgTimestampPrediction
from .metrics import DEFAULT_LADDER, MraLadder
from .report import CotDeltaRow, DiagnosticReport

TEMPLATE_VERSION = "1"


@dataclass(frozen=True)
class ProbeOption:
    option_id: str
    name: str
    detail: str


@dataclass(frozen=True)
class ProbeCatalog:
    """Closed option universes for every probe kind."""

    vf_options: tuple[ProbeOption, ...]
    plc_options: tuple[ProbeOption, ...]
    tg_options: tuple[ProbeOption, ...]

    def __post_init__(self) -> None:
        if len(self.vf_options) != 4:
            raise ValueError("VF must declare exactly 4 options")
        if len(self.plc_options) != 5:
            raise ValueError("PLC must declare exactly 5 options")
        if len(self.tg_options) != 4:
            raise ValueError("TG MCQ must declare exactly 4 options")
        for group in (self.vf_options, self.plc_options, self.tg_options):
            ids = [opt.option_id for opt in group]
            if len(set(ids)) != len(ids):
                raise ValueError("option ids must be unique within a probe kind")

    def options(self, kind: ProbeKind) -> tuple[ProbeOption, ...]:
        if kind is ProbeKind.VF:
            return self.vf_options
        if kind is ProbeKind.PLC:
            return self.plc_options
        return self.tg_options

    def universe(self, kind: ProbeKind) -> frozenset[str]:
        return frozenset(opt.option_id for opt in self.options(kind))

    def to_json(self) -> str:
        """Machine-readable catalog document with ids, names, and details."""
        payload = {
            kind.value: [
                {"option_id": opt.option_id, "name": opt.name, "detail": opt.detail}
                for opt in self.options(kind)
            ]
            for kind in (ProbeKind.VF, ProbeKind.PLC, ProbeKind.TG_EVENT)
        }
        return json.dumps(payload, ensure_ascii=False, indent=2)


DEFAULT_CATALOG = ProbeCatalog(
    vf_options=(
        ProbeOption(
            "D1",
            "In-depth information",
            "Must preconditions linked to depth of field, such as camera distance, be specified?",
        ),
        ProbeOption(
            "D2",
            "Multi-frame reasoning",
            "Is multi-frame tracking needed for tracking object motion?",
        ),
        ProbeOption(
            "D3",
            "Event spotting",
            "Does the task require pinpointing the exact occurrence of a physical event?",
        ),
        ProbeOption(
            "D4",
            "Scale reference",
            "Must a reference object or coordinate scale be identified first?",
        ),
    ),
    plc_options=(
        ProbeOption("C", "Average velocity", "v = Δx/Δt"),
        ProbeOption("D", "Uniformly accelerated displacement", "x = v₀t + ½at²"),
        ProbeOption("E", "Average acceleration", "a = Δv/Δt"),
        ProbeOption("F", "Displacement via average velocity", "s = ½(v₀ + v)t"),
        ProbeOption("G", "Pixel-to-physical scaling", "s = pixel_ratio × reference_size"),
    ),
    tg_options=(
        ProbeOption("E1", "Event option 1", "First candidate event description"),
        ProbeOption("E2", "Event option 2", "Second candidate event description"),
        ProbeOption("E3", "Event option 3", "Third candidate event description"),
        ProbeOption("E4", "Event option 4", "Fourth candidate event description"),
    ),
)


@dataclass(frozen=True)
class TgAnnotation:
    """An event with its annotated start time and the 4-way MCQ built from it."""

    item_id: str
    event_text: str
    gold_ts: float
    mcq_options: tuple[str, ...]
    gold_option: str

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gold_ts) and self.gold_ts > 0):
            raise ValueError("gold_ts must be finite and > 0")
        if len(self.mcq_options) != 4 or len(set(self.mcq_options)) != 4:
            raise ValueError("TG MCQ must carry exactly 4 distinct options")
        if self.gold_option not in self.mcq_options:
            raise ValueError("gold_option must be one of the MCQ options")


@dataclass(frozen=True)
class ProbeScorecard:
    probe_kind: ProbeKind
    macro_f1: float
    per_option_f1: dict[str, float]
    n_items: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.macro_f1 <= 1.0:
            raise ValueError("macro_f1 must lie in [0, 1]")


def _score_mcq(
    responses: Sequence[ProbeResponse],
    kind: ProbeKind,
    catalog: ProbeCatalog,
) -> ProbeScorecard:
    responses = list(responses)
    if any(r.probe_kind is not kind for r in responses):
        raise ValueError(f"expected only {kind.value} responses")
    # Probe scorecards average over options that appear in the corpus; catalog
    # options never selected and never gold are skipped rather than counted
    # as vacuously perfect.
    macro, per_option = metrics.macro_f1(responses, catalog.universe(kind), skip_vacuous=True)
    return ProbeScorecard(
        probe_kind=kind, macro_f1=macro, per_option_f1=per_option, n_items=len(responses)
    )


def score_vf(responses: Sequence[ProbeResponse], catalog: ProbeCatalog = DEFAULT_CATALOG) -> ProbeScorecard:
    """Macro-F1 over the four visual-precondition options."""
    return _score_mcq(responses, ProbeKind.VF, catalog)


def score_plc(responses: Sequence[ProbeResponse], catalog: ProbeCatalog = DEFAULT_CATALOG) -> ProbeScorecard:
    """Macro-F1 over the five formula options."""
    return _score_mcq(responses, ProbeKind.PLC, catalog)


def score_tg_mcq(responses: Sequence[ProbeResponse], catalog: ProbeCatalog = DEFAULT_CATALOG) -> ProbeScorecard:
    """Macro-F1 of the single-answer event MCQ, averaged over appearing options."""
    for r in responses:
        if r.probe_kind is not ProbeKind.TG_EVENT:
            raise ValueError("expected only TG_EVENT responses")
        if len(r.selected) != 1:
            raise ValueError("TG_EVENT responses must select exactly one option")
    return _score_mcq(responses, ProbeKind.TG_EVENT, catalog)


@dataclass(frozen=True)
class TgGnaScore:
    mean_mra: float
    per_item: dict[str, float]

    @property
    def n_items(self) -> int:
        return len(self.per_item)


def score_tg_gna(
    preds: Sequence[TgTimestampPrediction], ladder: MraLadder = DEFAULT_LADDER
) -> TgGnaScore:
    """Relative accuracy of predicted event timestamps."""
    preds = list(preds)
    if not preds:
        raise ValueError("prediction list must be non-empty")
    per_item = {p.item_id: metrics.mra(p.predicted_ts, p.gold_ts, ladder) for p in preds}
    return TgGnaScore(mean_mra=math.fsum(per_item.values()) / len(per_item), per_item=per_item)


class CotMode(str, Enum):
    MODEL_ANSWER = "MODEL_ANSWER"
    GROUND_TRUTH = "GROUND_TRUTH"


_COT_HEADERS = {
    ProbeKind.VF: "Visual preconditions for this question:",
    ProbeKind.PLC: "Physical laws to apply for this question:",
}


def build_cot_context(
    mcq_answer: ProbeResponse,
    mode: CotMode,
    catalog: ProbeCatalog = DEFAULT_CATALOG,
) -> str:
    """Deterministic text block naming the chosen (or gold) probe options.

    Suitable for prepending to a numeric-answer prompt; identical inputs
    produce identical bytes for a given TEMPLATE_VERSION.
    """
    if mcq_answer.probe_kind not in _COT_HEADERS:
        raise ValueError("chain-of-thought contexts exist only for VF and PLC probes")
    chosen = mcq_answer.gold if mode is CotMode.GROUND_TRUTH else mcq_answer.selected
    lines = [_COT_HEADERS[mcq_answer.probe_kind]]
    if not chosen:
        lines.append("- none: no preconditions identified")
    else:
        by_id = {opt.option_id: opt for opt in catalog.options(mcq_answer.probe_kind)}
        for option_id in sorted(chosen):
            opt = by_id[option_id]
            lines.append(f"- {opt.option_id} ({opt.name}): {opt.detail}")
    return "\n".join(lines) + "\n"


def diagnostic_summary(
    vf: ProbeScorecard | None,
    plc: ProbeScorecard | None,
    tg_gna: TgGnaScore | None,
    tg_mcq: ProbeScorecard | None,
    gna_by_context: Mapping[GnaContext, float],
    model_tag: str = "model",
) -> DiagnosticReport:
    """Join all probe axes and context means into one report object.

    ``gna_by_context`` maps contexts to mean accuracy; every context other
    than ``ZERO_SHOT`` yields one delta row against the zero-shot mean.
    """
    if GnaContext.ZERO_SHOT not in gna_by_context:
        raise ValueError("gna_by_context must cover at least ZERO_SHOT")
    zero = gna_by_context[GnaContext.ZERO_SHOT]
    deltas = tuple(
        CotDeltaRow(context=ctx.value, mean_delta=gna_by_context[ctx] - zero, n_common=None)
        for ctx in GnaContext
        if ctx is not GnaContext.ZERO_SHOT and ctx in gna_by_context
    )
    return DiagnosticReport(
        model_tag=model_tag,
        vf=vf,
        plc=plc,
        tg_mcq=tg_mcq,
        tg_gna=tg_gna,
        mra_by_context={ctx.value: gna_by_context[ctx] for ctx in GnaContext if ctx in gna_by_context},
        cot_deltas=deltas,
        template_version=TEMPLATE_VERSION,
    )
