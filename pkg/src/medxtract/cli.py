"""Command line entry point.

Exit codes: 0 success, 1 partial failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import sys

from .config import load_config
from .errors import ConfigError, PipelineError
from .runner import cmd_extract, cmd_score, cmd_semantic, cmd_validate


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medxtract",
        description="Schema-constrained LLM extraction pipeline with ROUGE and "
        "embedding-based evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("extract", "run the extraction stage and write per-strategy artifacts"),
        ("score", "score extraction artifacts against gold annotations"),
        ("semantic", "cosine similarity + t-SNE analysis of extraction artifacts"),
        ("validate", "check the run configuration without side effects"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="run configuration (TOML or JSON)")
        cmd.add_argument("--strategy", default=None, help="restrict to one strategy")
        cmd.add_argument("--out", default=None, help="override the output directory")
        cmd.add_argument(
            "--mock", action="store_true", help="force mock providers (no network)"
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.out:
            cfg.output_dir = args.out
        if args.command == "extract":
            return cmd_extract(cfg, strategy_filter=args.strategy, force_mock=args.mock)
        if args.command == "score":
            return cmd_score(cfg, strategy_filter=args.strategy)
        if args.command == "semantic":
            return cmd_semantic(cfg, strategy_filter=args.strategy, force_mock=args.mock)
        return cmd_validate(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
