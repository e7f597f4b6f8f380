"""WSGA, NSGA-II and MOEA/D for fog service placement.

The three optimisers share the operators in :mod:`fogplace.operators` and
report per-generation traces with the weighted-sum best solution.
"""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from math import comb
from typing import Callable

import numpy as np

from .model import Instance
from .objectives import ObjectiveVector, WeightConfig, evaluate, weighted_sum
from .operators import (OperatorConfig, binary_tournament, crossover, make_rng,
                        mutate, random_placement)

ALGORITHMS = ("wsga", "nsga2", "moead")


@dataclass(frozen=True)
class AlgorithmConfig:
    population_size: int = 100
    generations: int = 400
    mutation_prob: float = 0.25
    neighborhood_size: int = 20
    weights: WeightConfig | None = None      # defaults to the instance scale
    operators: OperatorConfig = field(default_factory=OperatorConfig)
    moead_replacement: str = "dominance"     # or "weighted_sum"
    gateway_self_host_zero: bool = False

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ValueError("mutation_prob must be a probability")
        if self.neighborhood_size < 1:
            raise ValueError("neighborhood_size must be >= 1")
        if self.moead_replacement not in ("dominance", "weighted_sum"):
            raise ValueError(f"unknown moead_replacement {self.moead_replacement!r}")

    def resolved_weights(self, instance: Instance) -> WeightConfig:
        return self.weights or WeightConfig.for_instance(instance)


@dataclass
class GenerationTrace:
    generation: int
    best_weighted_sum: float
    best_objectives: ObjectiveVector
    wall_ms: float


@dataclass
class RunResult:
    algorithm: str
    seed: int
    final_set: list[tuple[np.ndarray, ObjectiveVector]]
    traces: list[GenerationTrace]
    total_ms: float
    config: AlgorithmConfig
    best: tuple[np.ndarray, ObjectiveVector] | None = None
    weights: WeightConfig | None = None
    instance: str = ""
    n_services: int = 0

    @property
    def objectives(self) -> np.ndarray:
        return np.array([obj for _, obj in self.final_set], dtype=float).reshape(-1, 3)

    @property
    def mean_generation_ms(self) -> float:
        return float(np.mean([t.wall_ms for t in self.traces])) if self.traces else 0.0


# -- dominance utilities ----------------------------------------------------

def dominates(a, b) -> bool:
    a, b = np.asarray(a), np.asarray(b)
    return bool(np.all(a <= b) and np.any(a < b))


def dominance_matrix(objs: np.ndarray) -> np.ndarray:
    """``dom[i, j]`` is true when solution ``i`` dominates solution ``j``."""
    objs = np.asarray(objs, dtype=float)
    le = np.all(objs[:, None, :] <= objs[None, :, :], axis=-1)
    lt = np.any(objs[:, None, :] < objs[None, :, :], axis=-1)
    return le & lt


def fast_nondominated_sort(objs) -> list[list[int]]:
    """Fronts of indices, best first (minimisation)."""
    objs = np.asarray(objs, dtype=float)
    n = len(objs)
    if n == 0:
        return []
    dom = dominance_matrix(objs)
    dominated_by = [np.flatnonzero(row) for row in dom]
    count = dom.sum(axis=0)
    fronts = [list(np.flatnonzero(count == 0))]
    while True:
        nxt = []
        for p in fronts[-1]:
            for q in dominated_by[p]:
                count[q] -= 1
                if count[q] == 0:
                    nxt.append(int(q))
        if not nxt:
            break
        fronts.append(sorted(nxt))
    return [[int(i) for i in f] for f in fronts]


def crowding_distance(objs) -> np.ndarray:
    """Crowding distance of each member of one front; boundaries get +inf."""
    objs = np.asarray(objs, dtype=float)
    n, m = objs.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(m):
        order = np.argsort(objs[:, k], kind="stable")
        col = objs[order, k]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = col[-1] - col[0]
        if span > 0:
            dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def rank_and_crowding(objs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rank = np.empty(len(objs), dtype=int)
    crowd = np.empty(len(objs))
    for r, front in enumerate(fast_nondominated_sort(objs)):
        rank[front] = r
        crowd[front] = crowding_distance(objs[front])
    return rank, crowd


# -- shared machinery --------------------------------------------------------

class _Problem:
    """Evaluation and variation bound to one instance/config/rng."""

    def __init__(self, instance: Instance, config: AlgorithmConfig, rng: np.random.Generator):
        self.instance = instance
        self.config = config
        self.rng = rng
        self.weights = config.resolved_weights(instance)
        self._cache: dict[bytes, ObjectiveVector] = {}

    CACHE_LIMIT = 200_000

    def evaluate(self, alloc: np.ndarray) -> ObjectiveVector:
        # objectives depend only on the bits, and GA populations revisit
        # placements constantly
        key = hashlib.blake2b(np.packbits(alloc).tobytes(), digest_size=16).digest()
        hit = self._cache.get(key)
        if hit is None:
            if len(self._cache) >= self.CACHE_LIMIT:
                self._cache.clear()
            hit = self._cache[key] = evaluate(alloc, self.instance,
                                              self.config.gateway_self_host_zero)
        return hit

    def evaluate_all(self, allocs) -> np.ndarray:
        return np.array([self.evaluate(a) for a in allocs], dtype=float).reshape(-1, 3)

    def random_population(self, n: int) -> list[np.ndarray]:
        return [random_placement(self.instance, self.rng, self.config.operators.p_init)
                for _ in range(n)]

    def offspring(self, father1: np.ndarray, father2: np.ndarray):
        child1, child2 = crossover(father1, father2, self.instance, self.rng)
        if self.rng.random() < self.config.mutation_prob:
            child1 = mutate(child1, self.instance, self.rng, self.config.operators)
            child2 = mutate(child2, self.instance, self.rng, self.config.operators)
        return child1, child2

    def breed(self, population, better_than: Callable[[int, int], bool]) -> list[np.ndarray]:
        """``population_size`` children from ``population_size / 2`` crossovers."""
        n = self.config.population_size
        children = []
        while len(children) < n:
            f1 = binary_tournament(population, better_than, self.rng)
            f2 = binary_tournament(population, better_than, self.rng)
            children.extend(self.offspring(population[f1], population[f2]))
        return children[:n]

    def trace(self, generation: int, objs: np.ndarray, started: float) -> GenerationTrace:
        ws = weighted_sum(objs, self.weights)
        best = int(np.argmin(ws))
        return GenerationTrace(generation, float(ws[best]), ObjectiveVector(*objs[best]),
                               (time.perf_counter() - started) * 1e3)

    def best_of(self, allocs, objs) -> tuple[np.ndarray, ObjectiveVector]:
        best = int(np.argmin(weighted_sum(objs, self.weights)))
        return allocs[best], ObjectiveVector(*objs[best])


    def result(self, algorithm, seed, allocs, objs, traces, t0) -> RunResult:
        final = [(a, ObjectiveVector(*o)) for a, o in zip(allocs, objs)]
        return RunResult(algorithm, seed, final, traces, (time.perf_counter() - t0) * 1e3,
                         self.config, self.best_of(allocs, objs), self.weights,
                         self.instance.meta.get("name", ""), self.instance.apps.n_services)


# -- WSGA ---------------------------------------------------------------------

def run_wsga(instance: Instance, config: AlgorithmConfig = AlgorithmConfig(),
             rng: np.random.Generator | int = 0, *, seed: int | None = None,
             initial: list[np.ndarray] | None = None) -> RunResult:
    """Weighted-sum genetic algorithm with (mu + lambda) truncation."""
    seed, rng = _seeded(rng, seed)
    t0 = time.perf_counter()
    prob = _Problem(instance, config, rng)
    pop = [a.copy() for a in initial] if initial else prob.random_population(config.population_size)
    objs = prob.evaluate_all(pop)
    fitness = weighted_sum(objs, prob.weights)
    traces = []
    for gen in range(config.generations):
        started = time.perf_counter()
        children = prob.breed(pop, lambda i, j: fitness[i] < fitness[j])
        child_objs = prob.evaluate_all(children)
        union = children + pop
        union_objs = np.vstack([child_objs, objs])
        union_fit = np.concatenate([weighted_sum(child_objs, prob.weights), fitness])
        keep = np.argsort(union_fit, kind="stable")[:config.population_size]
        pop = [union[k] for k in keep]
        objs, fitness = union_objs[keep], union_fit[keep]
        traces.append(prob.trace(gen, objs, started))
    return prob.result("wsga", seed, pop, objs, traces, t0)


# -- NSGA-II ------------------------------------------------------------------

def run_nsga2(instance: Instance, config: AlgorithmConfig = AlgorithmConfig(),
              rng: np.random.Generator | int = 0, *, seed: int | None = None) -> RunResult:
    seed, rng = _seeded(rng, seed)
    t0 = time.perf_counter()
    prob = _Problem(instance, config, rng)
    pop = prob.random_population(config.population_size)
    objs = prob.evaluate_all(pop)
    rank, crowd = rank_and_crowding(objs)
    traces = []

    for gen in range(config.generations):
        started = time.perf_counter()

        def better(i, j, rank=rank, crowd=crowd):
            return rank[i] < rank[j] or (rank[i] == rank[j] and crowd[i] > crowd[j])

        children = prob.breed(pop, better)
        union = children + pop
        union_objs = np.vstack([prob.evaluate_all(children), objs])
        u_rank, u_crowd = rank_and_crowding(union_objs)
        keep = np.lexsort((-u_crowd, u_rank))[:config.population_size]
        pop = [union[k] for k in keep]
        objs, rank, crowd = union_objs[keep], u_rank[keep], u_crowd[keep]
        first = rank == rank.min()
        traces.append(prob.trace(gen, objs[first], started))

    front = fast_nondominated_sort(objs)[0]
    final = [pop[k] for k in front]
    return prob.result("nsga2", seed, final, objs[front], traces, t0)


# -- MOEA/D -------------------------------------------------------------------

def lattice_size(h: int) -> int:
    return comb(h + 2, 2)


def generate_weight_vectors(n_requested: int) -> np.ndarray:
    """Simplex-lattice weights for three objectives.

    Uses the smallest ``H`` with ``C(H + 2, 2) >= n_requested``; the returned
    array has ``C(H + 2, 2)`` rows, which may exceed the request.
    """
    if n_requested < 3:
        raise ValueError("need at least 3 weight vectors")
    h = 1
    while lattice_size(h) < n_requested:
        h += 1
    vecs = [(i / h, j / h, (h - i - j) / h)
            for i in range(h, -1, -1) for j in range(h - i, -1, -1)]
    return np.array(vecs)


def neighborhoods(weights: np.ndarray, t: int) -> np.ndarray:
    """Indices of the ``t`` closest weight vectors (self first)."""
    if not 1 <= t <= len(weights):
        raise ValueError(f"neighborhood size must be in [1, {len(weights)}]")
    d = np.linalg.norm(weights[:, None, :] - weights[None, :, :], axis=-1)
    return np.argsort(d, axis=1, kind="stable")[:, :t]


def update_archive(archive_objs: np.ndarray, new_objs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Non-dominated merge of a mutually non-dominated archive with new
    points. Returns boolean keep-masks ``(archive_keep, new_keep)``.

    Exact objective duplicates of an existing member are not admitted.
    """
    n_a = len(archive_objs)
    allv = np.vstack([archive_objs, new_objs]) if n_a else np.asarray(new_objs, dtype=float)
    dom = np.zeros((len(allv), len(allv)), dtype=bool)
    # archive members never dominate each other
    dom[:, n_a:] = dominance_matrix_between(allv, allv[n_a:])
    dom[n_a:, :n_a] = dominance_matrix_between(allv[n_a:], allv[:n_a])
    keep = ~dom.any(axis=0)
    # drop exact duplicates, keeping the earliest copy
    _, first = np.unique(allv, axis=0, return_index=True)
    unique = np.zeros(len(allv), dtype=bool)
    unique[first] = True
    keep &= unique
    return keep[:n_a], keep[n_a:]


def dominance_matrix_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``out[i, j]``: ``a[i]`` dominates ``b[j]``."""
    le = np.all(a[:, None, :] <= b[None, :, :], axis=-1)
    lt = np.any(a[:, None, :] < b[None, :, :], axis=-1)
    return le & lt


def run_moead(instance: Instance, config: AlgorithmConfig = AlgorithmConfig(),
              rng: np.random.Generator | int = 0, *, seed: int | None = None) -> RunResult:
    """MOEA/D with dominance-based neighbour replacement and an unbounded
    external population (EP) of non-dominated offspring."""
    seed, rng = _seeded(rng, seed)
    t0 = time.perf_counter()
    prob = _Problem(instance, config, rng)
    lam = generate_weight_vectors(config.population_size)
    n = len(lam)
    t = min(config.neighborhood_size, n)
    pop = prob.random_population(n)
    objs = prob.evaluate_all(pop)
    hood = neighborhoods(lam, t)
    scaled = prob.weights.omega

    def improved(child_obj, nb) -> np.ndarray:
        """Mask over neighbour indices ``nb`` whose solution the child beats."""
        cur = objs[nb]
        if config.moead_replacement == "dominance":
            return np.all(child_obj <= cur, axis=1) & np.any(child_obj < cur, axis=1)
        w = lam[nb] * scaled
        return (w @ child_obj) < np.einsum("ij,ij->i", w, cur)

    ep: list[np.ndarray] = []
    ep_objs = np.empty((0, 3))
    traces = []
    for gen in range(config.generations):
        started = time.perf_counter()
        children, child_objs = [], []
        for j in range(n):
            f1 = pop[hood[j][rng.integers(t)]]
            f2 = pop[hood[j][rng.integers(t)]]
            c1, c2 = prob.offspring(f1, f2)
            o1, o2 = np.array(prob.evaluate(c1)), np.array(prob.evaluate(c2))
            child, obj = (c2, o2) if dominates(o2, o1) else (c1, o1)
            beaten = hood[j][improved(obj, hood[j])]
            for k in beaten:
                pop[k] = child
            objs[beaten] = obj
            children.append(child)
            child_objs.append(obj)
        child_objs = np.array(child_objs)
        keep_ep, keep_new = update_archive(ep_objs, child_objs)
        ep = [a for a, k in zip(ep, keep_ep) if k] + [c for c, k in zip(children, keep_new) if k]
        ep_objs = np.vstack([ep_objs[keep_ep], child_objs[keep_new]])
        traces.append(prob.trace(gen, ep_objs, started))

    if not ep:
        # no generations: fall back to the non-dominated initial solutions
        front = fast_nondominated_sort(objs)[0]
        ep, ep_objs = [pop[k] for k in front], objs[front]
    return prob.result("moead", seed, ep, ep_objs, traces, t0)


RUNNERS = {"wsga": run_wsga, "nsga2": run_nsga2, "moead": run_moead}


def run(algorithm: str, instance: Instance, config: AlgorithmConfig, seed: int) -> RunResult:
    try:
        runner = RUNNERS[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from "
                         f"{{{', '.join(ALGORITHMS)}}}") from None
    return runner(instance, config, make_rng(seed), seed=seed)


def _seeded(rng, seed):
    if isinstance(rng, (int, np.integer)):
        return int(rng), make_rng(int(rng))
    return (seed if seed is not None else -1), rng
