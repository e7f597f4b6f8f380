"""Run artefacts on disk: ``trace.csv``, ``front.csv`` and ``result.json``.

Wall-clock values only appear in the ``wall_ms`` column and the ``timing``
block of ``result.json`` so reruns can be compared byte for byte elsewhere.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .algorithms import RunResult
from .operators import RNG_ALGORITHM

TRACE_COLUMNS = ("generation", "best_weighted_sum", "free_resources", "service_spread",
                 "network_latency_ms", "wall_ms")
FRONT_COLUMNS = ("free_resources", "service_spread", "network_latency_ms", "placement_digest")


def placement_digest(alloc: np.ndarray) -> str:
    packed = np.packbits(np.asarray(alloc, dtype=bool), axis=None).tobytes()
    shape = "x".join(map(str, alloc.shape)).encode()
    return hashlib.sha256(shape + b":" + packed).hexdigest()[:16]


def _num(v: float) -> str:
    return repr(float(v))


def write_run(result: RunResult, directory: str | Path, extra: dict | None = None) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "trace.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for t in result.traces:
            w.writerow([t.generation, _num(t.best_weighted_sum),
                        *map(_num, t.best_objectives), f"{t.wall_ms:.3f}"])
    with open(out / "front.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FRONT_COLUMNS)
        for alloc, obj in result.final_set:
            w.writerow([*map(_num, obj), placement_digest(alloc)])
    config = asdict(result.config)
    doc = {
        "algorithm": result.algorithm,
        "seed": result.seed,
        "rng": RNG_ALGORITHM,
        "instance": result.instance,
        "n_services": result.n_services,
        "config": config,
        "weights": asdict(result.weights) if result.weights else None,
        "final_set_size": len(result.final_set),
        "generations_run": len(result.traces),
        "best": {"objectives": list(map(float, result.best[1])),
                 "placement_digest": placement_digest(result.best[0])} if result.best else None,
        "timing": {"total_ms": result.total_ms,
                   "mean_gen_ms": result.mean_generation_ms},
    }
    if extra:
        doc.update(extra)
    (out / "result.json").write_text(json.dumps(doc, indent=1, sort_keys=True))
    return out


def read_run(directory: str | Path) -> dict:
    """Flat record accepted by :func:`fogplace.analysis.build_report`."""
    d = Path(directory)
    doc = json.loads((d / "result.json").read_text())
    with open(d / "front.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    objs = [[float(r[c]) for c in FRONT_COLUMNS[:3]] for r in rows]
    weights = doc.get("weights") or {}
    return {
        "algorithm": doc["algorithm"],
        "seed": doc["seed"],
        "instance": doc.get("instance", ""),
        "n_services": doc.get("n_services", 0),
        "objectives": objs,
        "total_ms": doc["timing"]["total_ms"],
        "mean_gen_ms": doc["timing"]["mean_gen_ms"],
        "latency_max": weights.get("latency_max"),
        "theta": tuple(weights.get("theta", (1 / 3, 1 / 3, 1 / 3))),
    }


def find_runs(root: str | Path) -> list[Path]:
    """All run directories (those holding a ``result.json``) below ``root``."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"no such result directory: {root}")
    return sorted(p.parent for p in root.rglob("result.json"))
