"""Coarse-to-fine grid search tying a truncation parameter to a target average risk.

The initial grid spans the method's parameter range with ``grid_points``
values (integer grid for top_k, log-spaced where the useful range covers
decades, linear otherwise). A grid point whose average risk lands within
``tolerance`` of the target is feasible and the closest one wins (ties go
to the smaller parameter). Otherwise the adjacent pair of points whose
risks straddle the target bounds a fresh, finer grid, up to
``max_refinements`` rounds. No straddling pair means the target is outside
the achievable range and the nearest point is reported as infeasible.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dist_io import DistributionRecord
from .errors import (
    DataValidationError,
    DegenerateZipfError,
    RankOverflowError,
    UncoveredSupportError,
)
from .metrics import k_star, recall_risk
from .samplers import METHODS, SamplerConfig, allowed_set_size
from .trie import EvaluationNode

logger = logging.getLogger(__name__)

# Ranges hold every calibrated value observed in practice with an order of
# magnitude to spare where the scale permits.
_DEFAULT_RANGES: dict[str, tuple[float, float]] = {
    "top_k": (1.0, 2000.0),
    "top_p": (0.01, 1.0),
    "eta": (1e-6, 1.0),
    "adaptive": (1e-7, 1e-2),
    "mirostat": (0.5, 10.0),
}

_GRID_SCALES: dict[str, str] = {
    "top_k": "integer",
    "top_p": "linear",
    "eta": "log",
    "adaptive": "log",
    "mirostat": "linear",
}


def default_range(method: str) -> tuple[float, float]:
    if method not in _DEFAULT_RANGES:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return _DEFAULT_RANGES[method]


@dataclass(frozen=True)
class CalibrationSpec:
    method: str
    target_risk: float
    tolerance: float = 0.1
    grid_points: int = 2000
    max_refinements: int = 4
    parameter_range: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.target_risk <= 0:
            raise ValueError(f"target_risk must be > 0, got {self.target_risk}")
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")
        if self.parameter_range is not None:
            lo, hi = self.parameter_range
            if not lo < hi:
                raise ValueError(f"parameter range must satisfy lo < hi, got {lo}, {hi}")

    def resolved_range(self) -> tuple[float, float]:
        return self.parameter_range or default_range(self.method)


@dataclass
class CalibrationResult:
    method: str
    target_risk: float
    tolerance: float
    theta: float
    achieved_risk: float
    achieved_recall: float
    achieved_rse: float
    refinement_depth: int
    feasible: bool
    n_nodes: int
    neighbors: tuple[dict, dict] | None = None
    warnings: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        out = {
            "method": self.method,
            "target_risk": self.target_risk,
            "tolerance": self.tolerance,
            "theta": self.theta,
            "achieved_risk": self.achieved_risk,
            "achieved_recall": self.achieved_recall,
            "achieved_rse": self.achieved_rse,
            "refinement_depth": self.refinement_depth,
            "feasible": self.feasible,
            "n_nodes": self.n_nodes,
            "warnings": list(self.warnings),
        }
        if self.neighbors is not None:
            out["neighbors"] = list(self.neighbors)
        return out


def _make_grid(method: str, lo: float, hi: float, points: int) -> list[float]:
    scale = _GRID_SCALES[method]
    if scale == "integer":
        lo_i = math.ceil(lo)
        hi_i = math.floor(hi)
        if hi_i < lo_i:
            raise ValueError(f"no integers in range [{lo}, {hi}]")
        if hi_i - lo_i + 1 <= points:
            return [float(k) for k in range(lo_i, hi_i + 1)]
        ks = sorted({int(round(x)) for x in np.linspace(lo_i, hi_i, points)})
        return [float(k) for k in ks]
    if scale == "log":
        return [float(x) for x in np.geomspace(lo, hi, points)]
    return [float(x) for x in np.linspace(lo, hi, points)]


@dataclass
class _Probe:
    theta: float
    risk: float
    recall: float
    rse: float


class _Evaluator:
    """Per-theta average risk over a fixed node set, with k* computed once."""

    def __init__(
        self,
        method: str,
        nodes: Sequence[EvaluationNode],
        records: dict[str, DistributionRecord],
    ):
        missing = [n.prefix_id for n in nodes if n.prefix_id not in records]
        if missing:
            raise DataValidationError(
                f"no distribution record for prefix ids: {', '.join(missing)}"
            )
        self.method = method
        self.pairs: list[tuple[DistributionRecord, int]] = []
        self.excluded: list[dict] = []
        self.zipf_fallbacks = 0
        self.overflow_thetas: list[float] = []
        self._cache: dict[float, _Probe | None] = {}
        for node in nodes:
            record = records[node.prefix_id]
            try:
                ks = k_star(record, node.support)
            except UncoveredSupportError as exc:
                self.excluded.append(
                    {"prefix_id": node.prefix_id, "uncovered": list(exc.words)}
                )
                continue
            self.pairs.append((record, ks))
        if not self.pairs:
            raise DataValidationError(
                "every node was excluded (uncovered support); nothing to calibrate"
            )

    def probe(self, theta: float) -> _Probe | None:
        """Average risk/recall/RSE at theta; None when the cut overflows the export."""
        if theta in self._cache:
            return self._cache[theta]
        config = SamplerConfig(self.method, theta)
        recalls: list[float] = []
        risks: list[float] = []
        try:
            for record, ks in self.pairs:
                try:
                    size = allowed_set_size(record, config)
                except DegenerateZipfError:
                    size = record.n
                    self.zipf_fallbacks += 1
                recall, risk = recall_risk(size, ks)
                recalls.append(recall)
                risks.append(risk)
        except RankOverflowError:
            self.overflow_thetas.append(theta)
            self._cache[theta] = None
            return None
        n = len(risks)
        mean_risk = sum(risks) / n
        rse = math.sqrt(sum((r - mean_risk) ** 2 for r in risks)) / n
        result = _Probe(theta, mean_risk, sum(recalls) / n, rse)
        self._cache[theta] = result
        return result


def calibrate(
    spec: CalibrationSpec,
    nodes: Sequence[EvaluationNode],
    records: dict[str, DistributionRecord],
) -> CalibrationResult:
    """Run the coarse-to-fine search; deterministic for fixed inputs."""
    evaluator = _Evaluator(spec.method, nodes, records)
    lo, hi = spec.resolved_range()
    integer = _GRID_SCALES[spec.method] == "integer"

    best: _Probe | None = None  # closest to target across every round
    neighbors: tuple[dict, dict] | None = None
    depth = 0
    while True:
        grid = _make_grid(spec.method, lo, hi, spec.grid_points)
        probes = [p for p in (evaluator.probe(t) for t in grid) if p is not None]
        if not probes:
            raise RankOverflowError(
                "every probed parameter overflowed the exported top-N; "
                "re-export with a larger --top-n"
            )
        closest = min(probes, key=lambda p: (abs(p.risk - spec.target_risk), p.theta))
        if best is None or (abs(closest.risk - spec.target_risk), closest.theta) < (
            abs(best.risk - spec.target_risk),
            best.theta,
        ):
            best = closest
        if abs(closest.risk - spec.target_risk) <= spec.tolerance:
            return _result(spec, evaluator, closest, depth, feasible=True)

        bracket = None
        for left, right in zip(probes, probes[1:]):
            if (left.risk - spec.target_risk) * (right.risk - spec.target_risk) < 0:
                bracket = (left, right)
                break
        if bracket is None:
            return _result(spec, evaluator, best, depth, feasible=False)
        neighbors = (
            {"theta": bracket[0].theta, "achieved_risk": bracket[0].risk},
            {"theta": bracket[1].theta, "achieved_risk": bracket[1].risk},
        )
        if integer:
            # Adjacent integer probes cannot be refined further.
            interior = range(int(bracket[0].theta) + 1, int(bracket[1].theta))
            if not interior:
                return _result(
                    spec, evaluator, best, depth, feasible=False, neighbors=neighbors
                )
        if depth >= spec.max_refinements:
            return _result(
                spec, evaluator, best, depth, feasible=False, neighbors=neighbors
            )
        lo, hi = bracket[0].theta, bracket[1].theta
        depth += 1


def _result(
    spec: CalibrationSpec,
    evaluator: _Evaluator,
    probe: _Probe,
    depth: int,
    feasible: bool,
    neighbors: tuple[dict, dict] | None = None,
) -> CalibrationResult:
    warnings = []
    if evaluator.excluded:
        ids = ", ".join(e["prefix_id"] for e in evaluator.excluded)
        warnings.append(f"excluded nodes with uncovered support: {ids}")
    if evaluator.zipf_fallbacks:
        warnings.append(
            f"degenerate Zipf estimate handled on {evaluator.zipf_fallbacks} "
            "node evaluation(s); scored at the full export size"
        )
    if evaluator.overflow_thetas:
        lo = min(evaluator.overflow_thetas)
        warnings.append(
            f"{len(evaluator.overflow_thetas)} probe point(s) overflowed the "
            f"exported top-N (first at theta={lo!r}) and were skipped"
        )
    if not feasible:
        logger.warning(
            "target risk %s not reachable within +/-%s; nearest %s at theta=%s",
            spec.target_risk,
            spec.tolerance,
            probe.risk,
            probe.theta,
        )
    theta = probe.theta
    if spec.method == "top_k":
        theta = float(int(theta))
    return CalibrationResult(
        method=spec.method,
        target_risk=spec.target_risk,
        tolerance=spec.tolerance,
        theta=theta,
        achieved_risk=probe.risk,
        achieved_recall=probe.recall,
        achieved_rse=probe.rse,
        refinement_depth=depth,
        feasible=feasible,
        n_nodes=len(evaluator.pairs),
        neighbors=neighbors,
        warnings=tuple(warnings),
    )
