"""Adapter entry point: serve the HTTP API or emit scores.jsonl in batch mode."""

from __future__ import annotations

import argparse
import sys

from factnice.nice import NiceConfig

from .batch import emit_scores
from .service import create_app
from .stub import StubModel


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="factnice-adapter",
        description="Candidate-answer scoring service speaking the factnice wire protocol.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--model", default="stub", choices=["stub"], help="backend selected at startup")
    parser.add_argument("--host", default="127.0.0.1", help="bind address for serve mode")
    parser.add_argument("--port", type=int, default=8008, help="port for serve mode")
    parser.add_argument("--emit", default=None, metavar="SCORES_JSONL", help="batch mode: output path")
    parser.add_argument("--items", default=None, metavar="ITEMS_JSONL", help="batch mode: input items")
    parser.add_argument("--k", type=int, default=10, help="beam count in batch mode")
    parser.add_argument("--step", type=float, default=0.5, help="grid interval in batch mode")
    parser.add_argument("--half", type=int, default=5, help="grid points per side in batch mode")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    backend = StubModel()
    if args.emit:
        if not args.items:
            print("error: --emit requires --items", file=sys.stderr)
            return 2
        cfg = NiceConfig(delta=args.half * args.step, step=args.step, half_count=args.half)
        rows = emit_scores(backend, args.items, args.emit, k=args.k, cfg=cfg)
        print(f"wrote {rows} rows to {args.emit}")
        return 0
    import uvicorn

    uvicorn.run(create_app(backend), host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
