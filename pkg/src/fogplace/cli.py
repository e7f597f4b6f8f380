"""Command-line pipeline: ``generate``, ``run``, ``analyze`` and ``replicate``.

Runs land in ``<out>/<instance>/<algo>/<seed>/`` as ``trace.csv``,
``front.csv`` and ``result.json``; ``analyze`` writes ``report.csv`` and
``report.json`` next to them.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace
from pathlib import Path

from .algorithms import ALGORITHMS, AlgorithmConfig, run
from .analysis import build_report
from .experiment import PRESETS, ExperimentConfig, generate_instance
from .model import Instance
from .operators import OperatorConfig
from .results import find_runs, read_run, write_run

log = logging.getLogger("fogplace")


class CliError(Exception):
    pass


def parse_seeds(text: str) -> list[int]:
    """``"3"``, ``"0,4,7"`` or an inclusive range ``"0..9"``."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise argparse.ArgumentTypeError(f"empty seed range {part!r}")
            seeds.extend(range(lo_i, hi_i + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise argparse.ArgumentTypeError("no seeds given")
    return seeds


def _algorithms(name: str) -> list[str]:
    if name == "all":
        return list(ALGORITHMS)
    if name not in ALGORITHMS:
        raise CliError(f"unknown algorithm {name!r}; choose from "
                       f"{{{', '.join(ALGORITHMS)}}} or all")
    return [name]


def _workers() -> int:
    raw = os.environ.get("FOGPLACE_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise CliError(f"FOGPLACE_WORKERS must be an integer, got {raw!r}") from None


# -- generate -----------------------------------------------------------------

def experiment_config(args) -> ExperimentConfig:
    base = PRESETS[args.size]
    if getattr(args, "config", None):
        doc = json.loads(Path(args.config).read_text())
        base = ExperimentConfig.from_dict({**base.to_dict(), **doc})
    changes = {}
    if args.devices is not None:
        changes["device_count"] = args.devices
    if args.apps is not None:
        changes["app_count"] = args.apps
        changes["service_total"] = None
    if args.seed is not None:
        changes["master_seed"] = args.seed
    return replace(base, **changes) if changes else base


def instance_name(cfg: ExperimentConfig, size: str) -> str:
    n_services = sum(cfg.templates[a % len(cfg.templates)].service_count
                     for a in range(cfg.app_count))
    return f"{size}_d{cfg.device_count}_s{n_services}_seed{cfg.master_seed}"


def cmd_generate(args) -> int:
    cfg = experiment_config(args)
    inst = generate_instance(cfg, name=args.name or instance_name(cfg, args.size))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    inst.save(out)
    n_dev, n_srv = len(inst.infrastructure.devices), inst.apps.n_services
    print(f"{out}: {n_dev} devices, {len(inst.gateways)} gateways, {n_srv} services, "
          f"{cfg.app_count} applications")
    return 0


# -- run ----------------------------------------------------------------------

def algorithm_config(args) -> AlgorithmConfig:
    cfg = AlgorithmConfig()
    doc = json.loads(Path(args.config).read_text()) if getattr(args, "config", None) else {}
    op_keys = {f.name for f in fields(OperatorConfig)}
    ops = {k: doc.pop(k) for k in list(doc) if k in op_keys}
    known = {f.name for f in fields(AlgorithmConfig)} - {"weights", "operators"}
    unknown = set(doc) - known
    if unknown:
        raise CliError(f"unknown config keys: {', '.join(sorted(unknown))}")
    cfg = replace(cfg, operators=OperatorConfig(**ops), **doc)
    flags = {"population_size": args.pop, "generations": args.gens,
             "mutation_prob": args.mutation_prob, "neighborhood_size": args.neighborhood}
    return replace(cfg, **{k: v for k, v in flags.items() if v is not None})


def _one_run(job):
    instance_path, algo, seed, cfg, out_dir = job
    inst = Instance.load(instance_path)
    result = run(algo, inst, cfg, seed)
    write_run(result, out_dir, {"instance_file": str(instance_path)})
    return algo, seed, result.total_ms, result.mean_generation_ms


def run_jobs(instance_path: Path, algos, seeds, cfg: AlgorithmConfig, out: Path) -> list[Path]:
    inst = Instance.load(instance_path)
    name = inst.meta.get("name") or instance_path.stem
    jobs = [(instance_path, a, s, cfg, out / name / a / str(s)) for a in algos for s in seeds]
    workers = min(_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            done = list(pool.map(_one_run, jobs))
    else:
        done = [_one_run(j) for j in jobs]
    for algo, seed, total, per_gen in done:
        log.info("%s seed %d: %.0f ms total, %.2f ms/generation", algo, seed, total, per_gen)
    return [j[-1] for j in jobs]


def cmd_run(args) -> int:
    path = Path(args.instance)
    if not path.is_file():
        raise CliError(f"instance file not found: {path}")
    dirs = run_jobs(path, _algorithms(args.algo), args.seeds, algorithm_config(args),
                    Path(args.out))
    print(f"{len(dirs)} runs written under {args.out}")
    return 0


# -- analyze ------------------------------------------------------------------

def analyze(root: Path, out: Path | None = None):
    dirs = find_runs(root)
    if not dirs:
        raise CliError(f"no runs found under {root}")
    report = build_report([read_run(d) for d in dirs])
    out = out or root
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(report.to_csv())
    (out / "report.json").write_text(report.to_json())
    return report


def cmd_analyze(args) -> int:
    report = analyze(Path(args.runs), Path(args.out) if args.out else None)
    for algo, s in report.by_algorithm().items():
        print(f"{algo:6s} runs={s['runs']:3d} best_ws={s['best_ws']:.4f} "
              f"volume={s['mean_volume']:.4f} ms/gen={s['mean_gen_ms']:.2f}")
    for r in report.runtime_ratios():
        print(f"{r['algorithm']:6s} runtime ratio {r['large_services']}/{r['small_services']} "
              f"services = {r['runtime_ratio']:.2f}")
    return 0


# -- replicate ----------------------------------------------------------------

def cmd_replicate(args) -> int:
    out = Path(args.out)
    cfg = experiment_config(args)
    name = instance_name(cfg, args.size)
    inst_path = out / f"{name}.json"
    inst_path.parent.mkdir(parents=True, exist_ok=True)
    generate_instance(cfg, name=name).save(inst_path)
    log.info("instance %s written", inst_path)
    run_jobs(inst_path, _algorithms(args.algo), args.seeds, algorithm_config(args), out)
    report = analyze(out / name)
    print(report.to_csv(), end="")
    return 0


# -- argument parsing ---------------------------------------------------------

def _instance_flags(p):
    p.add_argument("--size", choices=sorted(PRESETS), default="100",
                   help="experiment preset (default 100 services)")
    p.add_argument("--devices", type=int, help="override the device count")
    p.add_argument("--apps", type=int, help="override the application count")
    p.add_argument("--seed", type=int, help="master seed of the instance generator")


def _algo_flags(p):
    p.add_argument("--algo", default="all", help="wsga, nsga2, moead or all")
    p.add_argument("--seeds", type=parse_seeds, default=[0],
                   help="optimiser seeds: 3, 0,4,7 or 0..9")
    p.add_argument("--pop", type=int, help="population size (N for MOEA/D)")
    p.add_argument("--gens", type=int, help="number of generations")
    p.add_argument("--mutation-prob", type=float)
    p.add_argument("--neighborhood", type=int, help="MOEA/D neighbourhood size T")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fogplace", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance as JSON")
    _instance_flags(g)
    g.add_argument("--config", help="JSON experiment configuration overriding the preset")
    g.add_argument("--name", help="instance name stored in the file")
    g.add_argument("--out", default="instance.json")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="optimise an instance file")
    r.add_argument("instance")
    _algo_flags(r)
    r.add_argument("--seed", type=int, help="single optimiser seed (same as --seeds N)")
    r.add_argument("--config", help="JSON with algorithm and operator settings")
    r.add_argument("--out", default="out")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="aggregate run directories into a report")
    a.add_argument("runs", help="directory searched recursively for result.json")
    a.add_argument("--out", help="where to write report.csv/json (default: runs dir)")
    a.set_defaults(func=cmd_analyze)

    p = sub.add_parser("replicate", help="generate, run every algorithm, analyze")
    _instance_flags(p)
    _algo_flags(p)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_replicate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    if args.command == "run" and args.seed is not None:
        args.seeds = [args.seed]
    if args.command == "replicate":
        args.config = None
    try:
        return args.func(args)
    except (CliError, ValueError, FileNotFoundError, TypeError) as exc:
        print(f"fogplace {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
