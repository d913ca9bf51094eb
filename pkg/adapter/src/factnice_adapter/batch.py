"""Batch mode: read items.jsonl, score grids and beams, write scores.jsonl.

Candidate texts come from the toolkit's canonical number formatting so that
scored strings always parse back to their values.
"""

from __future__ import annotations

import sys

from factnice.ingest import (
    CandidateScore,
    CandidateSource,
    ScoredDistribution,
    format_value,
    parse_items,
    scores_to_json,
    write_jsonl,
)
from factnice.nice import NiceConfig, build_grid

from .service import _sequence_logprob
from .stub import ModelBackend


def emit_scores(
    backend: ModelBackend,
    items_path: str,
    out_path: str,
    k: int = 10,
    cfg: NiceConfig | None = None,
) -> int:
    """Write one GRID_QUERY row and one BEAM row per item; returns row count."""
    cfg = cfg or NiceConfig()
    with open(items_path, encoding="utf-8") as handle:
        items = parse_items(handle)
    lines: list[str] = []
    for item in items:
        grid = build_grid(item.ground_truth, cfg)
        grid_values = sorted(grid.points + (item.ground_truth,))
        grid_candidates = []
        for value in grid_values:
            text = format_value(value, cfg.step)
            steps = backend.score_steps(item.question, [item.video_ref], text)
            grid_candidates.append(
                CandidateScore(
                    value=float(text),
                    text=text,
                    logprob=_sequence_logprob(steps, 1.0),
                    source=CandidateSource.GRID_QUERY,
                )
            )
        lines.append(scores_to_json(ScoredDistribution(item.item_id, tuple(grid_candidates))))

        decoded = backend.generate_beams(item.question, [item.video_ref], k)
        beam_candidates = []
        seen: set[float] = set()
        dropped = 0
        for text in decoded:
            try:
                value = float(text)
            except ValueError:
                dropped += 1
                continue
            if value in seen:
                dropped += 1
                continue
            seen.add(value)
            steps = backend.score_steps(item.question, [item.video_ref], text)
            beam_candidates.append(
                CandidateScore(
                    value=value,
                    text=text,
                    logprob=_sequence_logprob(steps, 1.0),
                    source=CandidateSource.BEAM,
                )
            )
        if dropped:
            print(
                f"warning: item {item.item_id!r}: dropped {dropped} non-numeric or duplicate beams",
                file=sys.stderr,
            )
        if len(beam_candidates) >= 2:
            lines.append(scores_to_json(ScoredDistribution(item.item_id, tuple(beam_candidates))))
        else:
            print(f"warning: item {item.item_id!r}: no beam row emitted", file=sys.stderr)
    write_jsonl(out_path, lines)
    return len(lines)
