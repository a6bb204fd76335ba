"""Command-line entry point: build, select, export, evaluate, calibrate, report.

Every command writes byte-stable outputs (rerunning on identical inputs
reproduces identical bytes) and drops a ``<out>.manifest.json`` sidecar
carrying the command, input paths, a config hash, tool version, wall-clock
duration, and warnings. Exit codes: 0 success, 2 usage, 3 data validation,
4 protocol failure (uncovered support / rank overflow).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from . import dist_io, ingest, metrics, trie
from .calibrate import CalibrationSpec, calibrate, default_range
from .errors import DataValidationError, EmptyCorpusError, ProtocolError
from .samplers import METHODS, SamplerConfig

logger = logging.getLogger(__name__)

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_PROTOCOL = 4


def _write_manifest(
    out_path: str | Path,
    command: str,
    inputs: dict,
    config: dict,
    warnings: list[str],
    started: float,
) -> None:
    manifest = {
        "command": command,
        "inputs": {k: str(v) for k, v in inputs.items()},
        "config": config,
        "config_hash": hashlib.sha256(
            json.dumps(config, sort_keys=True).encode()
        ).hexdigest(),
        "tool_version": __version__,
        "started_utc": datetime.now(timezone.utc).isoformat(),
        "duration_s": round(time.perf_counter() - started, 6),
        "warnings": warnings,
    }
    Path(f"{out_path}.manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )


def cmd_build_trie(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    config = (
        ingest.IngestConfig.from_file(args.config) if args.config else ingest.IngestConfig()
    )
    word_list = ingest.load_word_list(args.wordlist)
    root = trie.TrieNode()
    counters = ingest.IngestCounters()
    articles = 0
    for source_id, text in ingest.iter_documents(args.input, args.docs_per_line):
        articles += 1
        sentences, doc_counters = ingest.ingest_document(
            text, word_list, config, source_id
        )
        counters.add(doc_counters)
        for sentence in sentences:
            trie.insert_sentence(root, sentence)
    if counters.accepted == 0:
        raise EmptyCorpusError(
            f"no accepted sentences in {args.input} "
            f"(rejected: {counters.unknown_word} unknown-word, "
            f"{counters.digit} digit, {counters.heading} heading)"
        )
    Path(args.out).write_text(trie.serialize(root, pretty=args.pretty), encoding="utf-8")
    stats = trie.compute_stats(root, articles)
    stats_json = json.dumps(stats.as_dict(), indent=2)
    print(stats_json)
    if args.stats_out:
        Path(args.stats_out).write_text(stats_json + "\n", encoding="utf-8")
    warnings = []
    rejected = counters.total - counters.accepted
    if rejected:
        warnings.append(
            f"rejected {rejected}/{counters.total} sentences "
            f"(unknown_word={counters.unknown_word}, digit={counters.digit}, "
            f"heading={counters.heading})"
        )
    _write_manifest(
        args.out,
        "build-trie",
        {"input": args.input, "wordlist": args.wordlist},
        {
            "docs_per_line": args.docs_per_line,
            "heading_max_units": config.heading_max_units,
            "wordlist_size": word_list.size,
        },
        warnings,
        started,
    )
    return 0


def cmd_select_nodes(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    root = trie.deserialize(Path(args.trie).read_text(encoding="utf-8"))
    nodes = trie.select_evaluation_nodes(
        root, roots_m=args.roots, children_c=args.children, max_depth=args.max_depth
    )
    trie.write_nodes_jsonl(nodes, args.out)
    warnings = []
    if len(root.children) < args.roots:
        warnings.append(
            f"only {len(root.children)} starting tokens for --roots {args.roots}"
        )
    _write_manifest(
        args.out,
        "select-nodes",
        {"trie": args.trie},
        {"roots": args.roots, "children": args.children, "max_depth": args.max_depth},
        warnings,
        started,
    )
    print(f"selected {len(nodes)} evaluation nodes -> {args.out}")
    return 0


def cmd_export_toylm(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    root = trie.deserialize(Path(args.trie).read_text(encoding="utf-8"))
    nodes = trie.read_nodes_jsonl(args.nodes)
    records = dist_io.toy_lm_export(root, nodes)
    dist_io.write_records(records, args.out)
    _write_manifest(
        args.out,
        "export-toylm",
        {"trie": args.trie, "nodes": args.nodes},
        {},
        [],
        started,
    )
    print(f"exported {len(records)} toy-LM records -> {args.out}")
    return 0


def _verify_supports(root: trie.TrieNode, nodes: list[trie.EvaluationNode]) -> None:
    """Cross-check each node's stored support against the trie it claims to come from."""
    for node in nodes:
        tn = trie.node_at(root, node.prefix_words)
        if tn is None:
            raise DataValidationError(
                f"node {node.prefix_id}: prefix {' '.join(node.prefix_words)!r} "
                "does not resolve in the trie"
            )
        if tuple(sorted(tn.children)) != node.support:
            raise DataValidationError(
                f"node {node.prefix_id}: stored support does not match the trie "
                "(stale nodes file?)"
            )


def cmd_evaluate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    root = trie.deserialize(Path(args.trie).read_text(encoding="utf-8"))
    nodes = trie.read_nodes_jsonl(args.nodes)
    _verify_supports(root, nodes)
    records = dist_io.read_records(args.dists)
    config = SamplerConfig(args.method, args.param)
    report = metrics.evaluate_nodes(nodes, records, config)
    Path(args.out).write_text(
        json.dumps(report.as_dict(), indent=2) + "\n", encoding="utf-8"
    )
    if args.scatter_csv:
        metrics.entropy_k_star_correlation(
            [n for n in nodes if not any(
                e["prefix_id"] == n.prefix_id for e in report.excluded_nodes
            )],
            records,
            csv_path=args.scatter_csv,
        )
    _write_manifest(
        args.out,
        "evaluate",
        {"trie": args.trie, "nodes": args.nodes, "dists": args.dists},
        {"method": args.method, "param": args.param},
        list(report.warnings)
        + [f"excluded {len(report.excluded_nodes)} node(s)"] * bool(report.excluded_nodes),
        started,
    )
    print(
        f"{report.method} theta={report.theta}: N={report.n_nodes} "
        f"AR={report.average_recall:.6f} avg_risk={report.average_risk:.6f} "
        f"RSE={report.rse:.6f}"
    )
    return 0


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo_s, hi_s = text.split(",")
        return float(lo_s), float(hi_s)
    except ValueError as exc:
        raise ValueError(f"--range expects 'lo,hi', got {text!r}") from exc


def cmd_calibrate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    nodes = trie.read_nodes_jsonl(args.nodes)
    records = dist_io.read_records(args.dists)
    spec = CalibrationSpec(
        method=args.method,
        target_risk=args.target_risk,
        tolerance=args.tolerance,
        grid_points=args.grid,
        max_refinements=args.max_refinements,
        parameter_range=_parse_range(args.range) if args.range else None,
    )
    result = calibrate(spec, nodes, records)
    Path(args.out).write_text(
        json.dumps(result.as_dict(), indent=2) + "\n", encoding="utf-8"
    )
    _write_manifest(
        args.out,
        "calibrate",
        {"nodes": args.nodes, "dists": args.dists},
        {
            "method": args.method,
            "target_risk": args.target_risk,
            "tolerance": args.tolerance,
            "grid": args.grid,
            "max_refinements": args.max_refinements,
            "range": list(spec.resolved_range()),
        },
        list(result.warnings),
        started,
    )
    status = "feasible" if result.feasible else "INFEASIBLE"
    print(
        f"{result.method} -> theta={result.theta} ({status}): "
        f"achieved_risk={result.achieved_risk:.6f} AR={result.achieved_recall:.6f} "
        f"RSE={result.achieved_rse:.6f} depth={result.refinement_depth}"
    )
    return 0


_REPORT_COLUMNS = ("method", "param", "avg_risk", "rse", "ar")


def _report_row(obj: dict, path: str) -> dict:
    if "average_risk" in obj:
        return {
            "method": obj["method"],
            "param": obj["theta"],
            "avg_risk": obj["average_risk"],
            "rse": obj["rse"],
            "ar": obj["average_recall"],
        }
    if "achieved_risk" in obj:
        return {
            "method": obj["method"],
            "param": obj["theta"],
            "avg_risk": obj["achieved_risk"],
            "rse": obj["achieved_rse"],
            "ar": obj["achieved_recall"],
        }
    raise DataValidationError(f"{path}: not an evaluation or calibration report")


def render_rows_markdown(rows: list[dict]) -> str:
    """Markdown table; with >= 2 rows the best/worst RSE (lower better) and
    AR (higher better) are bolded/underlined."""
    mark = len(rows) >= 2
    best_rse = min(r["rse"] for r in rows) if mark else None
    worst_rse = max(r["rse"] for r in rows) if mark else None
    best_ar = max(r["ar"] for r in rows) if mark else None
    worst_ar = min(r["ar"] for r in rows) if mark else None

    def fmt(value: float, best: float | None, worst: float | None) -> str:
        text = f"{value:.6g}"
        if best is not None and value == best:
            return f"**{text}**"
        if worst is not None and value == worst and best != worst:
            return f"<u>{text}</u>"
        return text

    lines = [
        "| method | param | avg_risk | RSE | AR |",
        "| --- | --- | --- | --- | --- |",
    ]
    for r in rows:
        lines.append(
            f"| {r['method']} | {r['param']:.6g} | {r['avg_risk']:.6g} "
            f"| {fmt(r['rse'], best_rse, worst_rse)} "
            f"| {fmt(r['ar'], best_ar, worst_ar)} |"
        )
    return "\n".join(lines) + "\n"


def render_rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(_REPORT_COLUMNS)
    for r in rows:
        writer.writerow([r[c] for c in _REPORT_COLUMNS])
    return buf.getvalue()


def cmd_report(args: argparse.Namespace) -> int:
    rows = []
    for path in args.inputs:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        rows.append(_report_row(obj, path))
    rows.sort(key=lambda r: (r["method"], r["param"]))
    rendered = (
        render_rows_markdown(rows) if args.format == "markdown" else render_rows_csv(rows)
    )
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cptrie",
        description=(
            "Build context-preserving tries from text and evaluate truncation "
            "sampling methods against their empirical support"
        ),
    )
    parser.add_argument("--version", action="version", version=f"cptrie {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-trie", help="ingest a corpus into a trie JSON file")
    p.add_argument("--input", required=True, help="corpus file or directory")
    p.add_argument("--wordlist", required=True, help="one word per line, UTF-8")
    p.add_argument("--out", required=True, help="trie JSON output path")
    p.add_argument("--config", help="plain-text key = value ingest config")
    p.add_argument(
        "--docs-per-line",
        action="store_true",
        help="treat each line of --input as one document",
    )
    p.add_argument("--stats-out", help="also write the stats JSON here")
    p.add_argument("--pretty", action="store_true", help="indented trie JSON")
    p.set_defaults(func=cmd_build_trie)

    p = sub.add_parser("select-nodes", help="pick the evaluation prefix set")
    p.add_argument("--trie", required=True)
    p.add_argument("--roots", type=int, default=10)
    p.add_argument("--children", type=int, default=2)
    p.add_argument("--max-depth", type=int, default=6)
    p.add_argument("--out", required=True, help="nodes JSONL output path")
    p.set_defaults(func=cmd_select_nodes)

    p = sub.add_parser(
        "export-toylm",
        help="emit trie count ratios as distribution records (closed-loop testing)",
    )
    p.add_argument("--trie", required=True)
    p.add_argument("--nodes", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_toylm)

    p = sub.add_parser("evaluate", help="score one method at one parameter")
    p.add_argument("--trie", required=True)
    p.add_argument("--nodes", required=True)
    p.add_argument("--dists", required=True)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--param", required=True, type=float)
    p.add_argument("--out", required=True, help="report JSON output path")
    p.add_argument("--scatter-csv", help="also write entropy-vs-k* scatter data")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("calibrate", help="find theta hitting a target average risk")
    p.add_argument("--nodes", required=True)
    p.add_argument("--dists", required=True)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--target-risk", required=True, type=float)
    p.add_argument("--tolerance", type=float, default=0.1)
    p.add_argument("--grid", type=int, default=2000)
    p.add_argument("--max-refinements", type=int, default=4)
    p.add_argument("--range", help="parameter range as 'lo,hi'")
    p.add_argument("--out", required=True, help="calibration JSON output path")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("report", help="render report JSON files as a table")
    p.add_argument(
        "--in", dest="inputs", required=True, nargs="+", help="report JSON file(s)"
    )
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--out", help="write here instead of stdout")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProtocolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except DataValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
