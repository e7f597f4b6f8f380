"""Full-scale replication: 100 devices, 100 and 200 services, population
100, 400 generations, all three optimisers. Artefacts go to
``<out>/<instance>/<algo>/<seed>/`` with a report per instance."""
from dataclasses import dataclass

from _settings import parse_settings
from fogplace.cli import main as cli


@dataclass(frozen=True)
class Settings:
    seeds: str = "0"
    generations: int = 400
    population: int = 100
    out: str = "out/full"


def main(s: Settings) -> None:
    for size in ("100", "200"):
        code = cli(["-v", "replicate", "--size", size, "--seeds", s.seeds,
                    "--gens", str(s.generations), "--pop", str(s.population), "--out", s.out])
        if code:
            raise SystemExit(code)


if __name__ == "__main__":
    main(parse_settings(Settings, __doc__.splitlines()[0]))
