"""Variation operators on allocation matrices.

All randomness comes from an explicit ``numpy.random.Generator``; use
:func:`make_rng` so runs are reproducible from a single integer seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import Instance

RNG_ALGORITHM = "numpy.random.PCG64"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def substreams(seed: int, n: int) -> list[np.random.Generator]:
    """Independent generators derived deterministically from ``seed``."""
    return [np.random.Generator(np.random.PCG64(s))
            for s in np.random.SeedSequence(seed).spawn(n)]


@dataclass(frozen=True)
class OperatorConfig:
    p_init: float = 0.3
    p_grow: float = 0.5
    p_spread: float = 0.25

    def __post_init__(self):
        for name in ("p_init", "p_grow", "p_spread"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be a probability")


def mend(alloc: np.ndarray, instance: Instance, rng: np.random.Generator) -> np.ndarray:
    """Repair capacity violations in place and return ``alloc``.

    On every overloaded fog device, hosted instances are removed in uniformly
    random order until the load fits. Afterwards any service left with no
    instance at all is put on the cloud.
    """
    consumption = instance.consumption
    excess = consumption @ alloc - instance.capacities
    over = np.flatnonzero(excess > 0)
    if len(over):
        hosted = alloc[:, over]
        # a uniformly random removal order per device: sort random keys,
        # non-hosted cells pushed to the end
        keys = np.where(hosted, rng.random(hosted.shape), 2.0)
        order = np.argsort(keys, axis=0)
        cols = np.arange(len(over))
        units = np.where(hosted[order, cols], consumption[order], 0.0)
        freed_before = np.cumsum(units, axis=0) - units
        drop = (freed_before < excess[over]) & hosted[order, cols]
        rows, which = np.nonzero(drop)
        alloc[order[rows, which], over[which]] = False
    empty = ~alloc.any(axis=1)
    if empty.any():
        alloc[empty, instance.cloud] = True
    return alloc


def random_placement(instance: Instance, rng: np.random.Generator,
                     p_init: float = OperatorConfig.p_init) -> np.ndarray:
    """Cloud hosts every service; each fog cell is set with ``p_init``."""
    alloc = rng.random(instance.shape) < p_init
    alloc[:, instance.cloud] = True
    return mend(alloc, instance, rng)


def splice_rows(father1: np.ndarray, father2: np.ndarray,
                cuts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Single-point crossover per row; ``cuts[x]`` in ``[1, n_devices]`` is
    the number of leading genes copied from the same-side parent."""
    head = np.arange(father1.shape[1])[None, :] < np.asarray(cuts)[:, None]
    return np.where(head, father1, father2), np.where(head, father2, father1)


def crossover(father1: np.ndarray, father2: np.ndarray, instance: Instance,
              rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    if father1.shape != father2.shape:
        raise ValueError("parents have different shapes")
    n_services, n_devices = father1.shape
    cuts = rng.integers(1, n_devices, size=n_services, endpoint=True)
    child1, child2 = splice_rows(father1, father2, cuts)
    return mend(child1, instance, rng), mend(child2, instance, rng)


def replica_growth(alloc: np.ndarray, rng: np.random.Generator, p_grow: float) -> np.ndarray:
    """Each service, with probability ``p_grow``, gains one replica on a
    random device that does not host it yet."""
    out = alloc.copy()
    for x in np.flatnonzero(rng.random(len(alloc)) < p_grow):
        free = np.flatnonzero(~out[x])
        if len(free):
            out[x, free[rng.integers(len(free))]] = True
    return out


def service_shuffle(alloc: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Hand every service the allocation row of another (row permutation)."""
    return alloc[rng.permutation(len(alloc))]


def spread_to_fog(alloc: np.ndarray, rng: np.random.Generator, p_spread: float) -> np.ndarray:
    out = alloc.copy()
    out[rng.random(len(alloc)) < p_spread] = True
    return out


MUTATIONS = ("replica_growth", "service_shuffle", "spread_to_fog")


def mutate(alloc: np.ndarray, instance: Instance, rng: np.random.Generator,
           config: OperatorConfig = OperatorConfig()) -> np.ndarray:
    """Apply one of the three mutations, picked uniformly, then mend."""
    kind = MUTATIONS[rng.integers(len(MUTATIONS))]
    if kind == "replica_growth":
        out = replica_growth(alloc, rng, config.p_grow)
    elif kind == "service_shuffle":
        out = service_shuffle(alloc, rng)
    else:
        out = spread_to_fog(alloc, rng, config.p_spread)
    return mend(out, instance, rng)


def binary_tournament(population: Sequence, better_than: Callable[[int, int], bool],
                      rng: np.random.Generator) -> int:
    """Index of the winner of a two-way tournament (sampled with replacement).

    ``better_than(i, j)`` must be a strict comparison; ties keep the first
    sampled index.
    """
    n = len(population)
    if n == 0:
        raise ValueError("cannot select from an empty population")
    i, j = rng.integers(n, size=2)
    return int(j) if better_than(int(j), int(i)) else int(i)
