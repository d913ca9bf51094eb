"""Record schemas and line-delimited JSON parsing for the toolkit's log files.

Every log is UTF-8 with one JSON object per line; unknown keys are ignored.
Serializers emit a fixed key order with compact separators so that
``serialize(parse(line))`` reproduces accepted lines byte-for-byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import Any, Iterable, Iterator

from .seqprob import StepLogits

_SEPARATORS = (",", ":")


class RecordError(ValueError):
    """A log line that failed schema or invariant validation."""

    def __init__(self, line_no: int, message: str) -> None:
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class CandidateSource(str, Enum):
    BEAM = "BEAM"
    GRID_QUERY = "GRID_QUERY"


class GnaContext(str, Enum):
    ZERO_SHOT = "ZERO_SHOT"
    COT_VF = "COT_VF"
    COT_PLC = "COT_PLC"
    COT_VF_PLC = "COT_VF_PLC"
    COT_GT = "COT_GT"


class ProbeKind(str, Enum):
    VF = "VF"
    PLC = "PLC"
    TG_EVENT = "TG_EVENT"


def fraction_digits(step: float) -> int:
    """Fraction digits needed to render values living on a ``step`` lattice."""
    exponent = Decimal(repr(float(step))).normalize().as_tuple().exponent
    return max(0, -int(exponent))


def format_value(value: float, step: float = 0.5) -> str:
    """Canonical answer text: exactly the fraction digits the grid step requires."""
    quantum = Decimal(1).scaleb(-fraction_digits(step))
    quantized = Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP)
    if quantized == 0:
        quantized = abs(quantized)  # never emit "-0.0"
    return format(quantized, "f")


def _is_number(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _finite(x: Any) -> bool:
    return _is_number(x) and math.isfinite(x)


@dataclass(frozen=True)
class DatasetItem:
    """One task item: a question about a video with a numeric ground truth."""

    item_id: str
    question: str
    ground_truth: float
    unit: str
    video_ref: str

    def __post_init__(self) -> None:
        if not self.item_id:
            raise ValueError("item_id must be non-empty")
        if not _finite(self.ground_truth):
            raise ValueError("ground_truth must be a finite number")
        if self.ground_truth == 0:
            raise ValueError("ground_truth must be nonzero (it is a relative-error denominator)")


@dataclass(frozen=True)
class CandidateScore:
    """One candidate answer value with its raw sequence log-probability."""

    value: float
    text: str
    logprob: float
    source: CandidateSource

    def __post_init__(self) -> None:
        if not _finite(self.logprob):
            raise ValueError("logprob must be finite")
        if self.logprob > 0:
            raise ValueError(f"positive logprob {self.logprob!r}")
        try:
            parsed = float(self.text)
        except (TypeError, ValueError):
            raise ValueError(f"candidate text {self.text!r} is not numeric") from None
        if parsed != self.value:
            raise ValueError(f"candidate text {self.text!r} does not parse to value {self.value!r}")

    @property
    def probability(self) -> float:
        return math.exp(self.logprob)


@dataclass(frozen=True)
class ScoredDistribution:
    """One item's candidate answers, each carrying confidence mass."""

    item_id: str
    candidates: tuple[CandidateScore, ...]

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError("candidate list must be non-empty")
        values = [c.value for c in self.candidates]
        if len(set(values)) != len(values):
            raise ValueError("candidate values must be pairwise distinct")


@dataclass(frozen=True)
class GnaPrediction:
    """A free-form numeric answer, tagged with its prompting context."""

    item_id: str
    predicted: float
    context: GnaContext
    variant_id: str = ""

    def __post_init__(self) -> None:
        if not _finite(self.predicted):
            raise ValueError("predicted must be a finite number")


@dataclass(frozen=True)
class ProbeResponse:
    """A multiple-choice probe answer: selected option ids against gold ids."""

    item_id: str
    probe_kind: ProbeKind
    selected: frozenset[str]
    gold: frozenset[str]

    def __post_init__(self) -> None:
        if not self.gold:
            raise ValueError("gold option set must be non-empty")
        if self.probe_kind is ProbeKind.TG_EVENT and len(self.gold) != 1:
            raise ValueError("TG_EVENT probes must have exactly one gold option")


@dataclass(frozen=True)
class TgTimestampPrediction:
    """A predicted event timestamp against the annotated one, in seconds."""

    item_id: str
    predicted_ts: float
    gold_ts: float

    def __post_init__(self) -> None:
        if not _finite(self.predicted_ts) or self.predicted_ts < 0:
            raise ValueError("predicted_ts must be finite and >= 0")
        if not _finite(self.gold_ts) or self.gold_ts <= 0:
            raise ValueError("gold_ts must be finite and > 0")


@dataclass(frozen=True)
class TokenRecord:
    """Per-step raw scores for one candidate answer string."""

    item_id: str
    candidate_text: str
    steps: tuple[StepLogits, ...]

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("steps must be non-empty")


def _object_lines(stream: Iterable[str]) -> Iterator[tuple[int, dict[str, Any]]]:
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordError(line_no, f"malformed JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise RecordError(line_no, "expected a JSON object")
        yield line_no, obj


def _get(obj: dict[str, Any], key: str, line_no: int) -> Any:
    if key not in obj:
        raise RecordError(line_no, f"missing key {key!r}")
    return obj[key]


def _get_str(obj: dict[str, Any], key: str, line_no: int) -> str:
    value = _get(obj, key, line_no)
    if not isinstance(value, str):
        raise RecordError(line_no, f"key {key!r} must be a string")
    return value


def _get_number(obj: dict[str, Any], key: str, line_no: int) -> float:
    value = _get(obj, key, line_no)
    if not _is_number(value):
        raise RecordError(line_no, f"key {key!r} must be a number")
    return float(value)


def _get_list(obj: dict[str, Any], key: str, line_no: int) -> list[Any]:
    value = _get(obj, key, line_no)
    if not isinstance(value, list):
        raise RecordError(line_no, f"key {key!r} must be an array")
    return value


def _get_enum(obj: dict[str, Any], key: str, enum_cls: type, line_no: int) -> Any:
    raw = _get_str(obj, key, line_no)
    try:
        return enum_cls(raw)
    except ValueError:
        raise RecordError(line_no, f"unknown {key} {raw!r}") from None


def parse_items(stream: Iterable[str]) -> list[DatasetItem]:
    """Parse ``items.jsonl``; rejects duplicate ids and zero ground truths."""
    items: list[DatasetItem] = []
    seen: set[str] = set()
    for line_no, obj in _object_lines(stream):
        try:
            item = DatasetItem(
                item_id=_get_str(obj, "item_id", line_no),
                question=_get_str(obj, "question", line_no),
                ground_truth=_get_number(obj, "ground_truth", line_no),
                unit=_get_str(obj, "unit", line_no),
                video_ref=_get_str(obj, "video_ref", line_no),
            )
        except RecordError:
            raise
        except ValueError as exc:
            raise RecordError(line_no, str(exc)) from exc
        if item.item_id in seen:
            raise RecordError(line_no, f"duplicate item_id {item.item_id!r}")
        seen.add(item.item_id)
        items.append(item)
    return items


def parse_scores(stream: Iterable[str]) -> list[ScoredDistribution]:
    """Parse ``scores.jsonl``; one distribution per line, values distinct within a line."""
    out: list[ScoredDistribution] = []
    for line_no, obj in _object_lines(stream):
        item_id = _get_str(obj, "item_id", line_no)
        raw_candidates = _get_list(obj, "candidates", line_no)
        candidates: list[CandidateScore] = []
        for raw in raw_candidates:
            if not isinstance(raw, dict):
                raise RecordError(line_no, "candidates must be objects")
            try:
                candidates.append(
                    CandidateScore(
                        value=_get_number(raw, "value", line_no),
                        text=_get_str(raw, "text", line_no),
                        logprob=_get_number(raw, "logprob", line_no),
                        source=_get_enum(raw, "source", CandidateSource, line_no),
                    )
                )
            except RecordError:
                raise
            except ValueError as exc:
                raise RecordError(line_no, str(exc)) from exc
        try:
            out.append(ScoredDistribution(item_id=item_id, candidates=tuple(candidates)))
        except ValueError as exc:
            raise RecordError(line_no, str(exc)) from exc
    return out


def parse_gna(stream: Iterable[str]) -> list[GnaPrediction]:
    """Parse ``gna.jsonl`` prediction rows."""
    out: list[GnaPrediction] = []
    for line_no, obj in _object_lines(stream):
        variant = obj.get("variant_id", "")
        if not isinstance(variant, str):
            raise RecordError(line_no, "key 'variant_id' must be a string")
        try:
            out.append(
                GnaPrediction(
                    item_id=_get_str(obj, "item_id", line_no),
                    predicted=_get_number(obj, "predicted", line_no),
                    context=_get_enum(obj, "context", GnaContext, line_no),
                    variant_id=variant,
                )
            )
        except RecordError:
            raise
        except ValueError as exc:
            raise RecordError(line_no, str(exc)) from exc
    return out


def parse_probe_responses(stream: Iterable[str], catalog=None) -> list[ProbeResponse]:
    """Parse ``probes.jsonl``, validating option ids against the probe catalog."""
    if catalog is None:
        from .fact import DEFAULT_CATALOG

        catalog = DEFAULT_CATALOG
    out: list[ProbeResponse] = []
    for line_no, obj in _object_lines(stream):
        kind = _get_enum(obj, "probe_kind", ProbeKind, line_no)
        universe = catalog.universe(kind)

        def read_ids(key: str) -> frozenset[str]:
            ids = _get_list(obj, key, line_no)
            for option_id in ids:
                if not isinstance(option_id, str):
                    raise RecordError(line_no, f"key {key!r} must contain option id strings")
                if option_id not in universe:
                    raise RecordError(
                        line_no, f"unknown option {option_id!r} for {kind.value}"
                    )
            return frozenset(ids)

        try:
            out.append(
                ProbeResponse(
                    item_id=_get_str(obj, "item_id", line_no),
                    probe_kind=kind,
                    selected=read_ids("selected"),
                    gold=read_ids("gold"),
                )
            )
        except RecordError:
            raise
        except ValueError as exc:
            raise RecordError(line_no, str(exc)) from exc
    return out


def parse_tg(stream: Iterable[str]) -> list[TgTimestampPrediction]:
    """Parse ``tg.jsonl`` timestamp prediction rows."""
    out: list[TgTimestampPrediction] = []
    for line_no, obj in _object_lines(stream):
        try:
            out.append(
                TgTimestampPrediction(
                    item_id=_get_str(obj, "item_id", line_no),
                    predicted_ts=_get_number(obj, "predicted_ts", line_no),
                    gold_ts=_get_number(obj, "gold_ts", line_no),
                )
            )
        except RecordError:
            raise
        except ValueError as exc:
            raise RecordError(line_no, str(exc)) from exc
    return out


def parse_tokens(stream: Iterable[str]) -> list[TokenRecord]:
    """Parse ``tokens.jsonl``: per-step raw scores for candidate strings."""
    out: list[TokenRecord] = []
    for line_no, obj in _object_lines(stream):
        raw_steps = _get_list(obj, "steps", line_no)
        steps: list[StepLogits] = []
        for raw in raw_steps:
            if not isinstance(raw, dict):
                raise RecordError(line_no, "steps must be objects")
            scores = _get_list(raw, "scores", line_no)
            if not all(_is_number(s) for s in scores):
                raise RecordError(line_no, "step scores must be numbers")
            chosen = _get(raw, "chosen_index", line_no)
            if not isinstance(chosen, int) or isinstance(chosen, bool):
                raise RecordError(line_no, "chosen_index must be an integer")
            try:
                steps.append(StepLogits(scores=tuple(float(s) for s in scores), chosen_index=chosen))
            except ValueError as exc:
                raise RecordError(line_no, str(exc)) from exc
        try:
            out.append(
                TokenRecord(
                    item_id=_get_str(obj, "item_id", line_no),
                    candidate_text=_get_str(obj, "candidate_text", line_no),
                    steps=tuple(steps),
                )
            )
        except ValueError as exc:
            raise RecordError(line_no, str(exc)) from exc
    return out


def item_to_json(item: DatasetItem) -> str:
    return json.dumps(
        {
            "item_id": item.item_id,
            "question": item.question,
            "ground_truth": item.ground_truth,
            "unit": item.unit,
            "video_ref": item.video_ref,
        },
        ensure_ascii=False,
        separators=_SEPARATORS,
    )


def scores_to_json(dist: ScoredDistribution) -> str:
    return json.dumps(
        {
            "item_id": dist.item_id,
            "candidates": [
                {"value": c.value, "text": c.text, "logprob": c.logprob, "source": c.source.value}
                for c in dist.candidates
            ],
        },
        ensure_ascii=False,
        separators=_SEPARATORS,
    )


def gna_to_json(pred: GnaPrediction) -> str:
    return json.dumps(
        {
            "item_id": pred.item_id,
            "predicted": pred.predicted,
            "context": pred.context.value,
            "variant_id": pred.variant_id,
        },
        ensure_ascii=False,
        separators=_SEPARATORS,
    )


def probe_to_json(response: ProbeResponse) -> str:
    # Option ids are serialized sorted: the canonical form of a set-valued field.
    return json.dumps(
        {
            "item_id": response.item_id,
            "probe_kind": response.probe_kind.value,
            "selected": sorted(response.selected),
            "gold": sorted(response.gold),
        },
        ensure_ascii=False,
        separators=_SEPARATORS,
    )


def tg_to_json(pred: TgTimestampPrediction) -> str:
    return json.dumps(
        {
            "item_id": pred.item_id,
            "predicted_ts": pred.predicted_ts,
            "gold_ts": pred.gold_ts,
        },
        ensure_ascii=False,
        separators=_SEPARATORS,
    )


def write_jsonl(path, lines: Iterable[str]) -> None:
    """Write lines to ``path`` with trailing newlines, UTF-8."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for line in lines:
            handle.write(line)
            handle.write("\n")
