"""Deterministic mock model backend.

Per-step logits are derived from a hash of (prompt, media, position, prefix),
so repeated identical requests score identically and shared prefixes share
steps, exactly like teacher-forced decoding of a real model. No randomness
survives between calls.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

VOCAB: tuple[str, ...] = tuple("0123456789.-+eE ")


class UnsupportedCandidateError(ValueError):
    """Candidate text contains tokens outside the backend's vocabulary."""


@dataclass(frozen=True)
class StepScores:
    scores: tuple[float, ...]
    chosen_index: int


class ModelBackend(Protocol):
    def score_steps(self, prompt: str, media_refs: Sequence[str], candidate: str) -> list[StepScores]:
        ...

    def generate_beams(self, prompt: str, media_refs: Sequence[str], k: int) -> list[str]:
        ...


def _context_seed(prompt: str, media_refs: Sequence[str], position: int, prefix: str) -> int:
    payload = "\x1f".join([prompt, "\x1e".join(media_refs), str(position), prefix])
    digest = hashlib.sha256(payload.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class StubModel:
    """Character-level pseudo-model over a 16-token numeric vocabulary.

    ``answers``, when given, are returned verbatim by beam generation
    (truncated to k); otherwise beams are derived deterministically from the
    prompt hash. ``non_numeric_decoys`` prepends that many non-numeric beams
    to exercise the filtering path.
    """

    answers: tuple[str, ...] = ()
    non_numeric_decoys: int = 0
    logit_scale: float = 2.0

    def score_steps(self, prompt: str, media_refs: Sequence[str], candidate: str) -> list[StepScores]:
        if not candidate:
            raise UnsupportedCandidateError("empty candidate text")
        steps: list[StepScores] = []
        for position, char in enumerate(candidate):
            if char not in VOCAB:
                raise UnsupportedCandidateError(
                    f"character {char!r} is outside the stub vocabulary"
                )
            rng = np.random.default_rng(_context_seed(prompt, media_refs, position, candidate[:position]))
            scores = rng.normal(0.0, self.logit_scale, size=len(VOCAB))
            steps.append(StepScores(scores=tuple(float(s) for s in scores), chosen_index=VOCAB.index(char)))
        return steps

    def generate_beams(self, prompt: str, media_refs: Sequence[str], k: int) -> list[str]:
        beams = [f"decoy text {i}" for i in range(min(self.non_numeric_decoys, k))]
        remaining = k - len(beams)
        if self.answers:
            beams.extend(self.answers[:remaining])
            return beams
        seed = _context_seed(prompt, media_refs, -1, "beams")
        base = (seed % 200) / 10.0 + 1.0
        beams.extend(f"{base + 0.5 * j:.1f}" for j in range(remaining))
        return beams
