"""Command line: export distributions from a model, or verify an existing file."""

from __future__ import annotations

import argparse
import logging
import sys

from .export import ExportConfig, export, read_nodes, write_records
from .verify import verify_roundtrip


def cmd_run(args: argparse.Namespace) -> int:
    from .adapters import HFAdapter

    config = ExportConfig(
        model_id=args.model,
        top_n=args.top_n,
        device=args.device,
        batch_size=args.batch_size,
    )
    nodes = read_nodes(args.nodes)
    adapter = HFAdapter(config.model_id, device=config.device)
    from .export import detect_convention, build_record, render_prefix

    convention = detect_convention(adapter.vocab_tokens)
    records = []
    for start in range(0, len(nodes), config.batch_size):
        chunk = nodes[start : start + config.batch_size]
        texts = [render_prefix(n["prefix_words"]) for n in chunk]
        probs = adapter.next_token_probs_batch(texts)
        for node, row in zip(chunk, probs):
            records.append(
                build_record(
                    node["prefix_id"], row, adapter.vocab_tokens, convention, config.top_n
                )
            )
    write_records(records, args.out)
    diagnostics = verify_roundtrip(args.out)
    if diagnostics:
        for d in diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return 1
    print(f"exported {len(records)} records -> {args.out}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    diagnostics = verify_roundtrip(args.dists)
    if diagnostics:
        for d in diagnostics:
            print(d, file=sys.stderr)
        return 1
    print("ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hf-export",
        description="Dump next-token distributions for evaluation prefixes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="query a model and write distributions JSONL")
    p.add_argument("--model", required=True, help="HF model id or local path")
    p.add_argument("--nodes", required=True, help="evaluation nodes JSONL")
    p.add_argument("--top-n", type=int, default=4096)
    p.add_argument("--out", required=True)
    p.add_argument("--device", default="cpu")
    p.add_argument("--batch-size", type=int, default=8)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="re-validate an exported file")
    p.add_argument("--dists", required=True)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
