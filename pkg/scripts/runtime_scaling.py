"""Per-generation wall time of each optimiser on the 100- and 200-service
instances (100 devices), with the 200/100 ratio and the speed ordering."""
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from _settings import parse_settings
from fogplace.algorithms import ALGORITHMS, AlgorithmConfig, run
from fogplace.experiment import PRESETS, generate_instance


@dataclass(frozen=True)
class Settings:
    seeds: tuple = (0,)
    generations: int = 400
    population: int = 100
    out: str = "out/runtime_scaling"


def main(s: Settings) -> None:
    cfg = AlgorithmConfig(population_size=s.population, generations=s.generations)
    per_gen: dict[tuple[str, str], list[float]] = {}
    for size in ("100", "200"):
        inst = generate_instance(PRESETS[size], name=f"s{size}")
        for algo in ALGORITHMS:
            for seed in s.seeds:
                res = run(algo, inst, cfg, seed)
                per_gen.setdefault((size, algo), []).append(res.mean_generation_ms)
                print(f"{size} services {algo:6s} seed {seed}: "
                      f"{res.mean_generation_ms:.1f} ms/gen", flush=True)
    out = Path(s.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "runtime_scaling.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "ms_per_gen_100", "ms_per_gen_200", "ratio"])
        for algo in ALGORITHMS:
            a, b = np.mean(per_gen["100", algo]), np.mean(per_gen["200", algo])
            w.writerow([algo, f"{a:.3f}", f"{b:.3f}", f"{b / a:.3f}"])
            print(f"{algo:6s} {a:8.1f} -> {b:8.1f} ms/gen  ratio {b / a:.2f}")
    order = sorted(ALGORITHMS, key=lambda al: np.mean(per_gen["100", al]))
    print("fastest to slowest at 100 services:", " < ".join(order))


if __name__ == "__main__":
    main(parse_settings(Settings, __doc__.splitlines()[0]))
