"""Optimal-cut computation, per-node recall/risk, and aggregate statistics.

The optimal cut k* is the smallest rank prefix of a record that covers
every support word. A support word is covered by a word-initial token whose
surface is a non-empty prefix of it (exact match for punctuation); subword
continuations never cover anything, implementing the hidden-child-node skip
rule. Recall and risk then compare an allowed-set size against k*:

    recall = min(size / k*, 1)        risk = max(size / k* - 1, 0)

so exactly one of recall < 1 / risk > 0 holds away from the optimum.
Neither depends on probability values, only on rankings and surfaces.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .dist_io import DistributionRecord
from .errors import (
    DataValidationError,
    DegenerateZipfError,
    RankOverflowError,
    UncoveredSupportError,
    ZeroVarianceError,
)
from .samplers import SamplerConfig, allowed_set_size
from .trie import EvaluationNode


def _covers(surface: str, word: str) -> bool:
    if word.isalpha():
        return bool(surface) and word.startswith(surface)
    return surface == word


def k_star(record: DistributionRecord, support: Iterable[str]) -> int:
    """Smallest rank k such that every support word is covered by some
    word-initial token at rank <= k (one pass, maintaining the uncovered set).

    Raises UncoveredSupportError when the exported top-N cannot cover the
    support; that is a protocol failure, not noise.
    """
    uncovered = set(support)
    if not uncovered:
        raise ValueError("support must be non-empty")
    for entry in record.tokens:
        if not entry.word_initial:
            continue
        hit = [w for w in uncovered if _covers(entry.surface, w)]
        if hit:
            uncovered.difference_update(hit)
            if not uncovered:
                return entry.rank
    raise UncoveredSupportError(uncovered, prefix_id=record.prefix_id)


def recall_risk(allowed_size: int, k: int) -> tuple[float, float]:
    ratio = allowed_size / k
    return min(ratio, 1.0), max(ratio - 1.0, 0.0)


@dataclass(frozen=True)
class NodeMetrics:
    prefix_id: str
    k_star: int
    allowed_size: int
    recall: float
    risk: float

    def as_dict(self) -> dict:
        return {
            "prefix_id": self.prefix_id,
            "k_star": self.k_star,
            "allowed_size": self.allowed_size,
            "recall": self.recall,
            "risk": self.risk,
        }


def node_metrics(
    record: DistributionRecord,
    support: Iterable[str],
    config: SamplerConfig,
) -> NodeMetrics:
    """Score one node under one sampler configuration.

    Protocol errors propagate with the prefix carried on the exception.
    """
    ks = k_star(record, support)
    try:
        size = allowed_set_size(record, config)
    except RankOverflowError as exc:
        raise RankOverflowError(f"{record.prefix_id}: {exc}") from exc
    recall, risk = recall_risk(size, ks)
    return NodeMetrics(record.prefix_id, ks, size, recall, risk)


@dataclass
class AggregateReport:
    method: str
    theta: float
    n_nodes: int
    average_recall: float
    average_risk: float
    rse: float
    per_node: tuple[NodeMetrics, ...]
    excluded_nodes: tuple[dict, ...] = ()
    warnings: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "theta": self.theta,
            "n_nodes": self.n_nodes,
            "average_recall": self.average_recall,
            "average_risk": self.average_risk,
            "rse": self.rse,
            "excluded_nodes": list(self.excluded_nodes),
            "warnings": list(self.warnings),
            "per_node": [m.as_dict() for m in self.per_node],
        }


def aggregate(
    per_node: Sequence[NodeMetrics], method: str, theta: float
) -> AggregateReport:
    """Average recall, average risk, and the risk standard error
    RSE = (1/N) * sqrt(sum((risk_i - mean)^2)) over N nodes.

    The 1/N sits outside the square root deliberately; this is the
    protocol's stability statistic, not a sample standard deviation.
    """
    n = len(per_node)
    if n == 0:
        raise DataValidationError("cannot aggregate an empty node list")
    ar = sum(m.recall for m in per_node) / n
    mean_risk = sum(m.risk for m in per_node) / n
    rse = math.sqrt(sum((m.risk - mean_risk) ** 2 for m in per_node)) / n
    return AggregateReport(
        method=method,
        theta=theta,
        n_nodes=n,
        average_recall=ar,
        average_risk=mean_risk,
        rse=rse,
        per_node=tuple(per_node),
    )


def evaluate_nodes(
    nodes: Sequence[EvaluationNode],
    records: dict[str, DistributionRecord],
    config: SamplerConfig,
) -> AggregateReport:
    """Score a node set end to end.

    Nodes whose support cannot be covered are excluded and listed in the
    report, never silently dropped. A degenerate Zipf estimate (mirostat
    only) scores the node at the full export size, with a warning counter.
    RankOverflow aborts the whole evaluation: the export must be redone
    deeper.
    """
    missing = [n.prefix_id for n in nodes if n.prefix_id not in records]
    if missing:
        raise DataValidationError(
            f"no distribution record for prefix ids: {', '.join(missing)}"
        )
    per_node: list[NodeMetrics] = []
    excluded: list[dict] = []
    zipf_fallbacks = 0
    for node in nodes:
        record = records[node.prefix_id]
        try:
            ks = k_star(record, node.support)
        except UncoveredSupportError as exc:
            excluded.append({"prefix_id": node.prefix_id, "uncovered": list(exc.words)})
            continue
        try:
            size = allowed_set_size(record, config)
        except DegenerateZipfError:
            size = record.n
            zipf_fallbacks += 1
        except RankOverflowError as exc:
            raise RankOverflowError(f"{node.prefix_id}: {exc}") from exc
        recall, risk = recall_risk(size, ks)
        per_node.append(NodeMetrics(node.prefix_id, ks, size, recall, risk))
    if not per_node:
        raise DataValidationError("every node was excluded (uncovered support)")
    warnings = []
    if zipf_fallbacks:
        warnings.append(
            f"degenerate Zipf estimate on {zipf_fallbacks} node(s); "
            "scored at the full export size"
        )
    report = aggregate(per_node, config.method, config.theta)
    report.excluded_nodes = tuple(excluded)
    report.warnings = tuple(warnings)
    return report


def entropy_k_star_correlation(
    nodes: Sequence[EvaluationNode],
    records: dict[str, DistributionRecord],
    csv_path: str | Path | None = None,
) -> float:
    """Pearson correlation between full-distribution entropy and k* across nodes.

    Optionally writes the scatter data as CSV with header
    ``prefix_id,entropy_nats,k_star``. Requires >= 3 nodes and nonzero
    variance on both axes.
    """
    points: list[tuple[str, float, int]] = []
    for node in nodes:
        record = records[node.prefix_id]
        points.append((node.prefix_id, record.entropy_nats, k_star(record, node.support)))
    if len(points) < 3:
        raise DataValidationError(
            f"need at least 3 nodes for a correlation, got {len(points)}"
        )
    if csv_path is not None:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["prefix_id", "entropy_nats", "k_star"])
            writer.writerows(points)
    xs = [p[1] for p in points]
    ys = [float(p[2]) for p in points]
    n = len(points)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVarianceError(
            "entropy or k* is constant across nodes; correlation undefined"
        )
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / math.sqrt(sxx * syy)
