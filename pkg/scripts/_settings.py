"""Turn a settings dataclass into command-line flags (``--field value``)."""
import argparse
from dataclasses import fields


def parse_settings(cls, description: str):
    parser = argparse.ArgumentParser(description=description)
    for f in fields(cls):
        kind = type(f.default)
        if kind is tuple:
            parser.add_argument(f"--{f.name.replace('_', '-')}", type=int, nargs="+",
                                default=list(f.default))
        else:
            parser.add_argument(f"--{f.name.replace('_', '-')}", type=kind, default=f.default)
    ns = parser.parse_args()
    return cls(**{f.name: (tuple(v) if isinstance(v, list) else v)
                  for f, v in zip(fields(cls), (getattr(ns, f.name) for f in fields(cls)))})
