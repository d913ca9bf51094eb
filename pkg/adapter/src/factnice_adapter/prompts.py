"""Timestamp-injected prompt rendering.

Two plain-text layouts are supported: frame-interleaved tags emitted before
each frame slot, and a prefix block of per-frame timestamp sentences. Both
are deterministic; the rendered fragments are stable byte-for-byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

IMAGE_SLOT = "<image>"


class PromptLayout(str, Enum):
    INTERLEAVED_TEXT = "INTERLEAVED_TEXT"
    PREFIX_BLOCK = "PREFIX_BLOCK"


@dataclass(frozen=True)
class TimestampedPrompt:
    """Frame indices with strictly increasing timestamps plus a layout choice."""

    frames: tuple[tuple[int, float], ...]
    layout: PromptLayout

    def __post_init__(self) -> None:
        timestamps = [ts for _, ts in self.frames]
        if any(b <= a for a, b in zip(timestamps, timestamps[1:])):
            raise ValueError("timestamps must be strictly increasing")
        if any(ts < 0 for ts in timestamps):
            raise ValueError("timestamps must be nonnegative")

    def render(self) -> str:
        if self.layout is PromptLayout.INTERLEAVED_TEXT:
            return "".join(
                f"Frame{index} [t={float(ts)!r}s]:{IMAGE_SLOT}" for index, ts in self.frames
            )
        return "".join(f"timestamp: {ts:.2f} seconds; " for _, ts in self.frames)


def build_timestamped_prompt(frames: Sequence[tuple[int, float]], layout: PromptLayout) -> str:
    """Render frame timestamps as plain text for the chosen layout."""
    return TimestampedPrompt(frames=tuple((int(i), float(t)) for i, t in frames), layout=layout).render()
