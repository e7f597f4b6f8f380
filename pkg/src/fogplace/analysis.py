"""Post-run analytics: best-solution selection, Pareto filtering, solution
spread volume and the cross-algorithm comparison report."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass

import numpy as np

from .algorithms import dominance_matrix
from .objectives import ObjectiveVector, WeightConfig, weighted_sum

REPORT_COLUMNS = ("algorithm", "seed", "best_ws", "free_res", "spread", "latency_ms",
                  "volume", "total_ms", "mean_gen_ms", "instance", "n_services")


def select_best(solutions, weights: WeightConfig):
    """``(placement, objectives)`` pair with the smallest weighted sum; the
    first one wins ties."""
    solutions = list(solutions)
    if not solutions:
        raise ValueError("cannot select from an empty solution set")
    ws = weighted_sum(np.array([obj for _, obj in solutions], dtype=float), weights)
    return solutions[int(np.argmin(ws))]


def pareto_filter(objs) -> list[int]:
    """Indices of the non-dominated members (minimisation)."""
    objs = np.asarray(objs, dtype=float)
    if len(objs) == 0:
        return []
    return [int(i) for i in np.flatnonzero(~dominance_matrix(objs).any(axis=0))]


def solution_spread_volume(objs, include_free_resources: bool = False) -> float:
    """Product of the extents of the set along the latency and spread axes
    (and free resources, when requested)."""
    objs = np.asarray(objs, dtype=float).reshape(-1, 3)
    if len(objs) == 0:
        raise ValueError("empty solution set")
    axes = [0, 1, 2] if include_free_resources else [1, 2]
    extent = objs[:, axes].max(axis=0) - objs[:, axes].min(axis=0)
    return float(np.prod(np.abs(extent)))


@dataclass
class ReportRow:
    algorithm: str
    seed: int
    best_ws: float
    free_res: float
    spread: float
    latency_ms: float
    volume: float
    total_ms: float
    mean_gen_ms: float
    instance: str = ""
    n_services: int = 0


@dataclass
class ComparisonReport:
    rows: list[ReportRow]

    def by_algorithm(self) -> dict[str, dict]:
        out = {}
        for algo in sorted({r.algorithm for r in self.rows}):
            rows = [r for r in self.rows if r.algorithm == algo]
            out[algo] = {
                "runs": len(rows),
                "best_ws": min(r.best_ws for r in rows),
                "mean_best_ws": float(np.mean([r.best_ws for r in rows])),
                "mean_volume": float(np.mean([r.volume for r in rows])),
                "mean_total_ms": float(np.mean([r.total_ms for r in rows])),
                "mean_gen_ms": float(np.mean([r.mean_gen_ms for r in rows])),
            }
        return out

    def runtime_ratios(self) -> list[dict]:
        """Mean per-generation time of the largest instance over the smallest,
        per algorithm, when runs on several instance sizes are present."""
        out = []
        for algo in sorted({r.algorithm for r in self.rows}):
            sizes: dict[int, list[float]] = {}
            for r in self.rows:
                if r.algorithm == algo:
                    sizes.setdefault(r.n_services, []).append(r.mean_gen_ms)
            if len(sizes) < 2:
                continue
            small, large = min(sizes), max(sizes)
            ratio = np.mean(sizes[large]) / np.mean(sizes[small])
            out.append({"algorithm": algo, "small_services": small,
                        "large_services": large, "runtime_ratio": float(ratio)})
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for r in self.rows:
            writer.writerow([getattr(r, c) for c in REPORT_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"rows": [asdict(r) for r in self.rows],
                           "summary": self.by_algorithm(),
                           "runtime_ratios": self.runtime_ratios()}, indent=1)


def build_report(results, weights: WeightConfig | None = None) -> ComparisonReport:
    """One row per run. ``results`` holds :class:`RunResult` objects or the
    equivalent dicts loaded from disk (see :mod:`fogplace.results`).

    The best solution is re-selected from each final set with ``weights``
    when given, otherwise the run's own weighted-sum best is used.
    """
    results = list(results)
    if not results:
        raise ValueError("no runs to report")
    rows = []
    for res in results:
        rec = res if isinstance(res, dict) else _as_record(res)
        objs = np.asarray(rec["objectives"], dtype=float).reshape(-1, 3)
        w = weights or WeightConfig(latency_max=rec["latency_max"],
                                    theta=tuple(rec.get("theta", (1 / 3, 1 / 3, 1 / 3))))
        ws = weighted_sum(objs, w)
        best = ObjectiveVector(*objs[int(np.argmin(ws))])
        rows.append(ReportRow(rec["algorithm"], int(rec["seed"]), float(np.min(ws)),
                              best.free_resources, best.service_spread, best.network_latency,
                              solution_spread_volume(objs), float(rec["total_ms"]),
                              float(rec["mean_gen_ms"]), rec.get("instance", ""),
                              int(rec.get("n_services", 0))))
    return ComparisonReport(rows)


def _as_record(res) -> dict:
    return {"algorithm": res.algorithm, "seed": res.seed, "objectives": res.objectives,
            "total_ms": res.total_ms, "mean_gen_ms": res.mean_generation_ms,
            "latency_max": res.weights.latency_max, "theta": res.weights.theta,
            "instance": res.instance,
            "n_services": res.n_services}
