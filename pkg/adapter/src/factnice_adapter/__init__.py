"""Live model-scoring service for the factnice toolkit.

Computes sequence log-probabilities of candidate answer strings by forced
decoding, serves beam candidates, renders timestamp-injected prompts, and
emits ``scores.jsonl`` in batch mode. Ships a deterministic mock model so the
whole wire protocol runs without any real model.
"""

__version__ = "0.1.0"

from .prompts import PromptLayout, TimestampedPrompt, build_timestamped_prompt  # noqa: F401
from .service import create_app  # noqa: F401
from .stub import StubModel  # noqa: F401
