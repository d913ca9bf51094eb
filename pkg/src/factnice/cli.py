"""Command-line entry point: ingest -> metrics / neighborhood analysis -> report.

Exit codes: 0 success, 1 validation error (message names file and line),
2 usage error. Every subcommand is deterministic given identical inputs and
flags; per-item work may run on a worker pool, but output assembly is ordered
by item_id so parallelism never changes bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from decimal import Decimal
from pathlib import Path
from typing import Callable, Iterable

from . import fact, metrics, nice, oracle
from . import report as report_mod
from .ingest import (
    CandidateSource,
    DatasetItem,
    GnaContext,
    ProbeKind,
    RecordError,
    ScoredDistribution,
    format_value,
    parse_gna,
    parse_items,
    parse_probe_responses,
    parse_scores,
    parse_tg,
    parse_tokens,
    scores_to_json,
    write_jsonl,
)
from .seqprob import Temperature, sequence_logprob_scaled

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2

ADAPTER_URL_ENV = "FACTNICE_ADAPTER_URL"

_CONTEXT_ORDER = tuple(ctx.value for ctx in GnaContext)


class CliError(Exception):
    """Validation failure surfaced to the user with exit code 1."""


def _round6(value):
    return None if value is None else round(float(value), 6)


def _load(path: str, parser_fn: Callable) -> list:
    file_path = Path(path)
    if not file_path.exists():
        raise CliError(f"{file_path}: file not found")
    with open(file_path, encoding="utf-8") as handle:
        try:
            return parser_fn(handle)
        except RecordError as exc:
            raise CliError(f"{file_path}: {exc}") from exc


def _load_json(path: str) -> dict:
    file_path = Path(path)
    if not file_path.exists():
        raise CliError(f"{file_path}: file not found")
    try:
        return json.loads(file_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CliError(f"{file_path}: malformed JSON: {exc}") from exc


def _write_json(path: str, payload: dict) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8", newline="\n")


def _items_by_id(path: str) -> dict[str, DatasetItem]:
    return {item.item_id: item for item in _load(path, parse_items)}


def _nice_config(args: argparse.Namespace) -> nice.NiceConfig:
    try:
        return nice.NiceConfig(
            delta=args.delta,
            step=args.step,
            half_count=args.half,
            zeta=args.zeta,
            epsilon=args.eps,
            alpha=args.alpha,
            k_beams=args.k,
        )
    except ValueError as exc:
        raise CliError(f"invalid neighborhood configuration: {exc}") from exc


def _config_dict(cfg: nice.NiceConfig) -> dict:
    return {
        "delta": cfg.delta,
        "step": cfg.step,
        "half_count": cfg.half_count,
        "t_points": cfg.t_points,
        "zeta": cfg.zeta,
        "epsilon": cfg.epsilon,
        "alpha": cfg.alpha,
        "k_beams": cfg.k_beams,
    }


def _add_nice_flags(sub: argparse.ArgumentParser, with_alpha: bool = True) -> None:
    defaults = nice.DEFAULT_CONFIG
    sub.add_argument("--delta", type=float, default=defaults.delta, help="neighborhood radius")
    sub.add_argument("--step", type=float, default=defaults.step, help="grid interval")
    sub.add_argument("--half", type=int, default=defaults.half_count, help="grid points per side")
    sub.add_argument("--zeta", type=float, default=defaults.zeta, help="alignment-weight floor")
    sub.add_argument("--eps", type=float, default=defaults.epsilon, help="alignment-weight smoothing term")
    sub.add_argument("--k", type=int, default=defaults.k_beams, help="beam candidate count")
    if with_alpha:
        sub.add_argument("--alpha", type=float, default=defaults.alpha, help="trust weight for raw probabilities")
    else:
        sub.set_defaults(alpha=defaults.alpha)


def _group_scores(
    rows: Iterable[ScoredDistribution], items: dict[str, DatasetItem], source_path: str
) -> dict[str, list[ScoredDistribution]]:
    grouped: dict[str, list[ScoredDistribution]] = {}
    for row in rows:
        if row.item_id not in items:
            raise CliError(f"{source_path}: unknown item_id {row.item_id!r}")
        grouped.setdefault(row.item_id, []).append(row)
    return grouped


def _merge_probabilities(rows: list[ScoredDistribution]) -> tuple[dict[float, float], bool]:
    """Value -> probability map; grid-query scores win over beam duplicates."""
    merged: dict[float, float] = {}
    has_grid = False
    for row in rows:
        for cand in row.candidates:
            if cand.source is CandidateSource.GRID_QUERY:
                has_grid = True
                merged[cand.value] = cand.probability
    for row in rows:
        for cand in row.candidates:
            if cand.source is CandidateSource.BEAM:
                merged.setdefault(cand.value, cand.probability)
    return merged, has_grid


def _beam_distribution(rows: list[ScoredDistribution], item_id: str) -> ScoredDistribution | None:
    beams = [c for row in rows for c in row.candidates if c.source is CandidateSource.BEAM]
    if not beams:
        return None
    values = [c.value for c in beams]
    if len(set(values)) != len(values):
        raise CliError(f"item {item_id!r}: duplicate beam values across score rows")
    return ScoredDistribution(item_id=item_id, candidates=tuple(beams))


def _remote_grid_scores(url: str, item: DatasetItem, cfg: nice.NiceConfig) -> dict[float, float]:
    grid = nice.build_grid(item.ground_truth, cfg)
    texts = [format_value(v, cfg.step) for v in grid.points + (item.ground_truth,)]
    payload = json.dumps(
        {"prompt": item.question, "media_refs": [item.video_ref], "candidates": texts}
    ).encode("utf-8")
    request = urllib.request.Request(
        url.rstrip("/") + "/score", data=payload, headers={"Content-Type": "application/json"}
    )
    try:
        with urllib.request.urlopen(request, timeout=60) as response:
            body = json.load(response)
    except (urllib.error.URLError, json.JSONDecodeError) as exc:
        raise CliError(f"adapter scoring failed for item {item.item_id!r}: {exc}") from exc
    try:
        return {float(c["text"]): math.exp(float(c["logprob"])) for c in body["candidates"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"adapter returned a malformed response for item {item.item_id!r}") from exc


def _item_probabilities(
    item: DatasetItem,
    rows: list[ScoredDistribution],
    cfg: nice.NiceConfig,
    adapter_url: str | None,
    renormalize: bool,
) -> nice.ScoreFn:
    merged, has_grid = _merge_probabilities(rows)
    if not has_grid and adapter_url:
        remote = _remote_grid_scores(adapter_url, item, cfg)
        for value, p in remote.items():
            merged.setdefault(value, p)
    if not merged:
        raise CliError(f"item {item.item_id!r}: no candidate scores available")
    if renormalize:
        total = math.fsum(merged.values())
        if total <= 0:
            raise CliError(f"item {item.item_id!r}: zero total probability mass")
        merged = {v: p / total for v, p in merged.items()}
    return lambda value: merged.get(float(value), 0.0)


def _top1_confidence(rows: list[ScoredDistribution]) -> float:
    beams = [c.probability for row in rows for c in row.candidates if c.source is CandidateSource.BEAM]
    pool = beams or [c.probability for row in rows for c in row.candidates]
    return max(pool)


def _mean(values: list[float]) -> float | None:
    return math.fsum(values) / len(values) if values else None


def _run_pool(worker: Callable, tasks: list, workers: int) -> list:
    if workers <= 1:
        return [worker(task) for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks))


# ---------------------------------------------------------------- subcommands


def _cmd_mra(args: argparse.Namespace) -> int:
    items = _items_by_id(args.items)
    ladder = metrics.DEFAULT_LADDER
    predictions = _load(args.gna, parse_gna)

    per_item: dict[str, dict[str, float]] = {}
    variant_scores: dict[str, dict[str, list[float]]] = {}
    for pred in predictions:
        item = items.get(pred.item_id)
        if item is None:
            raise CliError(f"{args.gna}: unknown item_id {pred.item_id!r}")
        value = metrics.mra(pred.predicted, item.ground_truth, ladder)
        if pred.variant_id == "":
            context_map = per_item.setdefault(pred.context.value, {})
            if pred.item_id in context_map:
                raise CliError(
                    f"{args.gna}: duplicate canonical prediction for item {pred.item_id!r} "
                    f"in context {pred.context.value}"
                )
            context_map[pred.item_id] = value
        else:
            variant_scores.setdefault(pred.context.value, {}).setdefault(pred.variant_id, []).append(value)

    mra_by_context = {}
    per_item_out = {}
    for context in _CONTEXT_ORDER:
        if context not in per_item:
            continue
        scores = per_item[context]
        mra_by_context[context] = _round6(_mean(list(scores.values())))
        per_item_out[context] = {k: scores[k] for k in sorted(scores)}

    robustness_rows = []
    for context in _CONTEXT_ORDER:
        if context not in variant_scores:
            continue
        variant_means = [
            _mean(v) for _, v in sorted(variant_scores[context].items())
        ]
        stat = metrics.robustness(variant_means, metrics.StdMode.POPULATION)
        robustness_rows.append(
            {
                "context": context,
                "mean": _round6(stat.mean),
                "std": _round6(stat.std),
                "n_variants": stat.n_variants,
            }
        )

    _write_json(
        args.out,
        {
            "mra_by_context": mra_by_context,
            "per_item_mra": per_item_out,
            "robustness": robustness_rows,
        },
    )
    return EXIT_OK


def _cmd_probes(args: argparse.Namespace) -> int:
    responses = _load(args.probes, parse_probe_responses)
    by_kind: dict[ProbeKind, list] = {}
    for response in responses:
        by_kind.setdefault(response.probe_kind, []).append(response)

    def card_dict(card: fact.ProbeScorecard) -> dict:
        return {
            "macro_f1": _round6(card.macro_f1),
            "per_option_f1": {k: _round6(v) for k, v in sorted(card.per_option_f1.items())},
            "per_sample_f1_mean": None,
            "n_items": card.n_items,
        }

    try:
        payload: dict = {"probe_f1": {}}
        for kind, scorer in (
            (ProbeKind.VF, fact.score_vf),
            (ProbeKind.PLC, fact.score_plc),
            (ProbeKind.TG_EVENT, fact.score_tg_mcq),
        ):
            if kind in by_kind:
                card = card_dict(scorer(by_kind[kind]))
                card["per_sample_f1_mean"] = _round6(
                    _mean([metrics.sample_f1(r) for r in by_kind[kind]])
                )
                payload["probe_f1"][kind.value] = card
            else:
                payload["probe_f1"][kind.value] = None
    except ValueError as exc:
        raise CliError(f"{args.probes}: {exc}") from exc

    if args.tg:
        tg_preds = _load(args.tg, parse_tg)
        tg_score = fact.score_tg_gna(tg_preds)
        payload["tg_gna"] = {
            "mean_mra": _round6(tg_score.mean_mra),
            "per_item": {k: tg_score.per_item[k] for k in sorted(tg_score.per_item)},
            "n_items": tg_score.n_items,
        }
    else:
        payload["tg_gna"] = None

    _write_json(args.out, payload)
    return EXIT_OK


def _cmd_nice(args: argparse.Namespace) -> int:
    cfg = _nice_config(args)
    items = _items_by_id(args.items)
    grouped = _group_scores(_load(args.scores, parse_scores), items, args.scores)
    adapter_url = os.environ.get(ADAPTER_URL_ENV)

    def evaluate(item_id: str) -> dict:
        item = items[item_id]
        rows = grouped.get(item_id)
        if rows is None:
            raise CliError(f"{args.scores}: no score rows for item {item_id!r}")
        p_of = _item_probabilities(item, rows, cfg, adapter_url, args.renormalize)
        try:
            nci_raw = nice.nci(p_of, item.ground_truth, cfg)
            nce_raw = nice.nce(p_of, item.ground_truth, cfg)
        except ValueError as exc:
            raise CliError(f"item {item_id!r}: {exc}") from exc
        return {
            "item_id": item_id,
            "nci_raw": _round6(nci_raw),
            "nce_raw": _round6(nce_raw),
            "top1_confidence": _round6(_top1_confidence(rows)),
        }

    ordered = sorted(grouped)
    per_item = _run_pool(evaluate, ordered, args.workers)
    _write_json(
        args.out,
        {
            "config": _config_dict(cfg),
            "renormalized": bool(args.renormalize),
            "per_item": per_item,
            "summary": {
                "n_items": len(per_item),
                "nci_raw_mean": _round6(_mean([r["nci_raw"] for r in per_item])),
                "nce_raw_mean": _round6(_mean([r["nce_raw"] for r in per_item])),
            },
        },
    )
    return EXIT_OK


def _cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = _nice_config(args)
    items = _items_by_id(args.items)
    grouped = _group_scores(_load(args.scores, parse_scores), items, args.scores)
    adapter_url = os.environ.get(ADAPTER_URL_ENV)

    def evaluate(item_id: str) -> dict:
        item = items[item_id]
        rows = grouped[item_id]
        beams = _beam_distribution(rows, item_id)
        if beams is None:
            raise CliError(f"item {item_id!r}: no beam candidates to calibrate")
        p_of = _item_probabilities(item, rows, cfg, adapter_url, args.renormalize)
        try:
            nci_raw = nice.nci(p_of, item.ground_truth, cfg)
            nce_raw = nice.nce(p_of, item.ground_truth, cfg)
        except ValueError as exc:
            raise CliError(f"item {item_id!r}: {exc}") from exc
        row = {
            "item_id": item_id,
            "collapsed": False,
            "nci_raw": _round6(nci_raw),
            "nce_raw": _round6(nce_raw),
            "nci_calibrated": None,
            "nce_calibrated": None,
            "top1_confidence_raw": _round6(_top1_confidence(rows)),
            "top1_confidence_calibrated": None,
            "entries": None,
        }
        try:
            calibrated = nice.nicon(beams, p_of, cfg)
        except nice.CalibrationCollapseError:
            row["collapsed"] = True
            return row
        p_cal = nice.calibrated_score_fn(calibrated, p_of)
        try:
            row["nci_calibrated"] = _round6(nice.nci(p_cal, item.ground_truth, cfg))
        except ValueError:
            row["nci_calibrated"] = None
        row["nce_calibrated"] = _round6(nice.nce(p_cal, item.ground_truth, cfg))
        row["top1_confidence_calibrated"] = _round6(max(e.calibrated_p for e in calibrated.entries))
        row["entries"] = [
            {
                "value": entry.value,
                "raw_p": _round6(entry.raw_p),
                "rho": _round6(entry.rho),
                "calibrated_p": _round6(entry.calibrated_p),
            }
            for entry in calibrated.entries
        ]
        return row

    ordered = sorted(grouped)
    per_item = _run_pool(evaluate, ordered, args.workers)
    calibrated_rows = [r for r in per_item if not r["collapsed"]]
    _write_json(
        args.out,
        {
            "config": _config_dict(cfg),
            "renormalized": bool(args.renormalize),
            "post_nicon_scoring": nice.POST_CALIBRATION_SCORING,
            "per_item": per_item,
            "summary": {
                "n_items": len(per_item),
                "n_collapsed": len(per_item) - len(calibrated_rows),
                "nci_raw_mean": _round6(_mean([r["nci_raw"] for r in per_item])),
                "nce_raw_mean": _round6(_mean([r["nce_raw"] for r in per_item])),
                "nci_calibrated_mean": _round6(
                    _mean([r["nci_calibrated"] for r in calibrated_rows if r["nci_calibrated"] is not None])
                ),
                "nce_calibrated_mean": _round6(
                    _mean([r["nce_calibrated"] for r in calibrated_rows])
                ),
            },
        },
    )
    return EXIT_OK


def _cmd_temp_scale(args: argparse.Namespace) -> int:
    if args.t <= 0:
        raise CliError("temperature must be positive")
    records = _load(args.tokens, parse_tokens)
    temp = Temperature(args.t)
    by_item: dict[str, list] = {}
    for record in records:
        by_item.setdefault(record.item_id, []).append(record)
    lines = []
    for item_id, group in by_item.items():
        candidates = []
        seen_values: set[float] = set()
        for record in group:
            try:
                value = float(record.candidate_text)
            except ValueError:
                raise CliError(
                    f"{args.tokens}: candidate text {record.candidate_text!r} is not numeric"
                ) from None
            if value in seen_values:
                raise CliError(f"{args.tokens}: duplicate candidate value for item {item_id!r}")
            seen_values.add(value)
            candidates.append(
                {
                    "value": value,
                    "text": record.candidate_text,
                    "logprob": sequence_logprob_scaled(record.steps, temp),
                    "source": CandidateSource.GRID_QUERY.value,
                }
            )
        lines.append(json.dumps({"item_id": item_id, "candidates": candidates}, ensure_ascii=False, separators=(",", ":")))
    write_jsonl(args.out, lines)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _nice_config(args)
    items = _load(args.items, parse_items)

    def offset(anchor: float, shift: float) -> float:
        return float(Decimal(repr(float(anchor))) + Decimal(repr(float(shift))))

    lines: list[str] = []
    for item in items:
        truth = item.ground_truth
        if args.model == "spike":
            scorer = oracle.spike(offset(truth, args.mu), args.base)
        elif args.model == "gaussian":
            scorer = oracle.gaussian(offset(truth, args.mu), args.sigma, args.base)
        else:
            scorer = oracle.uniform(offset(truth, args.lo), offset(truth, args.hi), args.base)
        grid = nice.build_grid(truth, cfg)
        candidates = sorted(grid.points + (truth,))
        scored = [(v, oracle.score(scorer, v)) for v in candidates]
        grid_candidates = [
            {
                "value": v,
                "text": format_value(v, cfg.step),
                "logprob": math.log(p),
                "source": CandidateSource.GRID_QUERY.value,
            }
            for v, p in scored
            if p > 0.0
        ]
        if grid_candidates:
            lines.append(
                json.dumps(
                    {"item_id": item.item_id, "candidates": grid_candidates},
                    ensure_ascii=False,
                    separators=(",", ":"),
                )
            )
        else:
            print(f"warning: item {item.item_id!r}: scorer assigns zero mass everywhere", file=sys.stderr)
        try:
            beams = oracle.beam_sample(scorer, args.k, candidates, item_id=item.item_id, step=cfg.step)
        except ValueError as exc:
            print(f"warning: item {item.item_id!r}: no beam row ({exc})", file=sys.stderr)
        else:
            lines.append(scores_to_json(beams))
    write_jsonl(args.out, lines)
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    mra_doc = _load_json(args.mra) if args.mra else None
    probes_doc = _load_json(args.probes) if args.probes else None
    nice_doc = _load_json(args.nice) if args.nice else None
    calibrate_doc = _load_json(args.calibrate) if args.calibrate else None
    cot_doc = _load_json(args.cot) if args.cot else None

    def scorecard(kind: ProbeKind, doc: dict | None) -> fact.ProbeScorecard | None:
        if doc is None:
            return None
        raw = doc.get("probe_f1", {}).get(kind.value)
        if raw is None:
            return None
        return fact.ProbeScorecard(
            probe_kind=kind,
            macro_f1=raw["macro_f1"],
            per_option_f1=dict(raw["per_option_f1"]),
            n_items=raw["n_items"],
        )

    tg_gna = None
    if probes_doc and probes_doc.get("tg_gna"):
        raw = probes_doc["tg_gna"]
        tg_gna = fact.TgGnaScore(mean_mra=raw["mean_mra"], per_item=dict(raw.get("per_item", {})))

    mra_by_context = dict(mra_doc["mra_by_context"]) if mra_doc else {}
    robustness_rows = tuple(
        report_mod.RobustnessRow(
            context=row["context"], mean=row["mean"], std=row["std"], n_variants=row["n_variants"]
        )
        for row in (mra_doc.get("robustness", []) if mra_doc else [])
    )
    cot_rows = tuple(
        report_mod.CotDeltaRow(
            context=row["context"], mean_delta=row["mean_delta"], n_common=row.get("n_common")
        )
        for row in (cot_doc.get("deltas", []) if cot_doc else [])
    )

    tier_table = None
    confidence_doc = nice_doc or calibrate_doc
    if mra_doc and confidence_doc and "ZERO_SHOT" in mra_doc.get("per_item_mra", {}):
        zero_shot = mra_doc["per_item_mra"]["ZERO_SHOT"]
        confidence_key = "top1_confidence" if nice_doc else "top1_confidence_raw"
        confidences = {
            row["item_id"]: row[confidence_key] for row in confidence_doc.get("per_item", [])
        }
        pairs = [
            (zero_shot[item_id], confidences[item_id])
            for item_id in sorted(set(zero_shot) & set(confidences))
        ]
        if pairs:
            tier_table = report_mod.tier_confidence_table(pairs)

    nice_table = None
    raw_summary = (nice_doc or calibrate_doc or {}).get("summary")
    cal_summary = (calibrate_doc or {}).get("summary")
    if raw_summary or cal_summary:
        nice_table = report_mod.NiceTable(
            nci_raw=(raw_summary or {}).get("nci_raw_mean"),
            nce_raw=(raw_summary or {}).get("nce_raw_mean"),
            nci_calibrated=(cal_summary or {}).get("nci_calibrated_mean"),
            nce_calibrated=(cal_summary or {}).get("nce_calibrated_mean"),
        )

    diagnostic = report_mod.DiagnosticReport(
        model_tag=args.model_tag,
        vf=scorecard(ProbeKind.VF, probes_doc),
        plc=scorecard(ProbeKind.PLC, probes_doc),
        tg_mcq=scorecard(ProbeKind.TG_EVENT, probes_doc),
        tg_gna=tg_gna,
        mra_by_context=mra_by_context,
        cot_deltas=cot_rows,
        tier_table=tier_table,
        nice_table=nice_table,
        robustness_rows=robustness_rows,
        template_version=fact.TEMPLATE_VERSION,
    )
    report_mod.emit(diagnostic, report_mod.ReportFormat.JSON, args.out)
    if args.csv_dir:
        report_mod.emit(diagnostic, report_mod.ReportFormat.CSV_BUNDLE, args.csv_dir)
    return EXIT_OK


def _cmd_cot_delta(args: argparse.Namespace) -> int:
    items = _items_by_id(args.items)
    predictions = _load(args.gna, parse_gna)
    per_context: dict[str, dict[str, float]] = {}
    for pred in predictions:
        if pred.variant_id != "":
            continue
        item = items.get(pred.item_id)
        if item is None:
            raise CliError(f"{args.gna}: unknown item_id {pred.item_id!r}")
        per_context.setdefault(pred.context.value, {})[pred.item_id] = metrics.mra(
            pred.predicted, item.ground_truth
        )
    zero = per_context.get(GnaContext.ZERO_SHOT.value)
    if not zero:
        raise CliError(f"{args.gna}: no ZERO_SHOT predictions to compare against")
    deltas = []
    for context in _CONTEXT_ORDER:
        if context == GnaContext.ZERO_SHOT.value or context not in per_context:
            continue
        try:
            delta = metrics.cot_delta(zero, per_context[context])
        except ValueError as exc:
            raise CliError(f"context {context}: {exc}") from exc
        deltas.append(
            {
                "context": context,
                "mean_delta": _round6(delta.mean_delta),
                "n_common": delta.n_common,
                "per_item": {k: _round6(v) for k, v in sorted(delta.per_item.items())},
            }
        )
    _write_json(args.out, {"deltas": deltas})
    return EXIT_OK


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factnice",
        description="Score numeric-answer accuracy, probe fidelity, and neighborhood-informed confidence.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def sub(name: str, help_text: str) -> argparse.ArgumentParser:
        return subparsers.add_parser(
            name, help=help_text, formatter_class=argparse.ArgumentDefaultsHelpFormatter
        )

    p = sub("mra", "mean relative accuracy per prompting context")
    p.add_argument("--items", required=True, help="items.jsonl")
    p.add_argument("--gna", required=True, help="gna.jsonl numeric predictions")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=_cmd_mra)

    p = sub("probes", "macro-F1 scorecards for VF / PLC / TG probes")
    p.add_argument("--probes", required=True, help="probes.jsonl")
    p.add_argument("--tg", default=None, help="tg.jsonl timestamp predictions")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=_cmd_probes)

    p = sub("nice", "raw neighborhood confidence metrics per item")
    p.add_argument("--items", required=True, help="items.jsonl")
    p.add_argument("--scores", required=True, help="scores.jsonl")
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--workers", type=int, default=1, help="worker pool size")
    p.add_argument("--renormalize", action="store_true", help="renormalize item probabilities before scoring")
    _add_nice_flags(p, with_alpha=False)
    p.set_defaults(func=_cmd_nice)

    p = sub("calibrate", "neighborhood-consistency calibration of beam distributions")
    p.add_argument("--items", required=True, help="items.jsonl")
    p.add_argument("--scores", required=True, help="scores.jsonl")
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--workers", type=int, default=1, help="worker pool size")
    p.add_argument("--renormalize", action="store_true", help="renormalize item probabilities before scoring")
    _add_nice_flags(p, with_alpha=True)
    p.set_defaults(func=_cmd_calibrate)

    p = sub("temp-scale", "rescore token logs at a different temperature")
    p.add_argument("--tokens", required=True, help="tokens.jsonl per-step scores")
    p.add_argument("--t", type=float, default=1.0, help="temperature")
    p.add_argument("--out", required=True, help="output scores.jsonl path")
    p.set_defaults(func=_cmd_temp_scale)

    p = sub("simulate", "emit synthetic scores.jsonl from a pseudo-model")
    p.add_argument("--items", required=True, help="items.jsonl")
    p.add_argument("--model", required=True, choices=["spike", "gaussian", "uniform"])
    p.add_argument("--out", required=True, help="output scores.jsonl path")
    p.add_argument("--base", type=float, default=0.4, help="probability at the scorer's mode")
    p.add_argument("--mu", type=float, default=0.0, help="scorer center offset from each item's ground truth")
    p.add_argument("--sigma", type=float, default=1.0, help="gaussian width")
    p.add_argument("--lo", type=float, default=-2.5, help="uniform lower offset from ground truth")
    p.add_argument("--hi", type=float, default=2.5, help="uniform upper offset from ground truth")
    _add_nice_flags(p, with_alpha=False)
    p.set_defaults(func=_cmd_simulate)

    p = sub("report", "join partial outputs into report.json and CSV tables")
    p.add_argument("--out", required=True, help="output report.json path")
    p.add_argument("--mra", default=None, help="output of the mra subcommand")
    p.add_argument("--probes", default=None, help="output of the probes subcommand")
    p.add_argument("--nice", default=None, help="output of the nice subcommand")
    p.add_argument("--calibrate", default=None, help="output of the calibrate subcommand")
    p.add_argument("--cot", default=None, help="output of the cot-delta subcommand")
    p.add_argument("--model-tag", default="model", help="label stamped into the report")
    p.add_argument("--csv-dir", default=None, help="directory for the CSV bundle")
    p.set_defaults(func=_cmd_report)

    p = sub("cot-delta", "per-item accuracy change of conditioned contexts vs zero-shot")
    p.add_argument("--items", required=True, help="items.jsonl")
    p.add_argument("--gna", required=True, help="gna.jsonl numeric predictions")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=_cmd_cot_delta)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
