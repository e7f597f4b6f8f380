"""Random experiment instances: Barabasi-Albert topology, centrality-based
roles, template-built applications and clustered IoT requests."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .model import (CLOUD, GATEWAY, ORDINARY, UNBOUNDED, ApplicationModel, Device,
                    Infrastructure, Instance, Link, Service, betweenness_centrality,
                    compute_distances)
from .operators import make_rng


@dataclass(frozen=True)
class AppTemplate:
    name: str
    service_count: int
    edges: tuple[tuple[int, int], ...]   # (consumer, consumed)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        for a, b in self.edges:
            if not (0 <= a < self.service_count and 0 <= b < self.service_count) or a == b:
                raise ValueError(f"{self.name}: bad edge {(a, b)}")
        if _has_cycle(self.service_count, self.edges):
            raise ValueError(f"{self.name}: consumption edges must form a DAG")
        if not self.entry_services:
            raise ValueError(f"{self.name}: no entry service")

    @property
    def entry_services(self) -> tuple[int, ...]:
        consumed = {b for _, b in self.edges}
        return tuple(s for s in range(self.service_count) if s not in consumed)

    def digest(self) -> str:
        blob = json.dumps([self.name, self.service_count, self.edges]).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _has_cycle(n, edges) -> bool:
    indeg = [0] * n
    out = [[] for _ in range(n)]
    for a, b in edges:
        out[a].append(b)
        indeg[b] += 1
    ready = [v for v in range(n) if indeg[v] == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for w in out[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    return seen != n


EEG_GAME = AppTemplate("eeg_game", 5, ((0, 1), (1, 2), (2, 3), (1, 4)))
SURVEILLANCE = AppTemplate("surveillance", 6, ((0, 1), (1, 2), (2, 5), (0, 3), (3, 4), (4, 5)))
ECOMMERCE = AppTemplate("ecommerce", 9, ((0, 1), (0, 2), (0, 3), (0, 4),
                                         (1, 5), (2, 6), (3, 7), (4, 8)))
DEFAULT_TEMPLATES = (EEG_GAME, SURVEILLANCE, ECOMMERCE)
# Five-slot cycle giving 30 services with five apps.
DESK_TEMPLATES = (EEG_GAME, SURVEILLANCE, ECOMMERCE, EEG_GAME, EEG_GAME)


@dataclass(frozen=True)
class ExperimentConfig:
    device_count: int = 100
    ba_attachment: int = 2
    gateway_fraction: float = 0.20
    users_per_gateway: int = 8
    app_count: int = 15
    capacity_range: tuple[int, int] = (4, 10)
    consumption_range: tuple[int, int] = (1, 4)
    latency_range: tuple[float, float] = (75.0, 125.0)
    cloud_link_latency: float = 100.0
    templates: tuple[AppTemplate, ...] = DEFAULT_TEMPLATES
    service_total: int | None = None
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "templates", tuple(
            t if isinstance(t, AppTemplate) else AppTemplate(**t) for t in self.templates))
        if not self.device_count > self.ba_attachment >= 1:
            raise ValueError("need device_count > ba_attachment >= 1")
        if self.n_gateways < 1 or self.n_gateways >= self.device_count:
            raise ValueError("gateway_fraction gives no usable gateway count")
        for name in ("capacity_range", "consumption_range", "latency_range"):
            lo, hi = getattr(self, name)
            if lo > hi or lo <= 0:
                raise ValueError(f"{name} must be a non-empty positive range")
        if self.consumption_range[1] > self.capacity_range[1]:
            raise ValueError("largest service would not fit on the largest device")
        if not self.templates or self.app_count < 1:
            raise ValueError("need at least one template and one application")

    @property
    def n_gateways(self) -> int:
        return math.ceil(self.gateway_fraction * self.device_count)

    @property
    def total_users(self) -> int:
        return self.users_per_gateway * self.n_gateways

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["templates"] = [asdict(t) for t in self.templates]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        doc = dict(doc)
        for key in ("capacity_range", "consumption_range", "latency_range"):
            if key in doc:
                doc[key] = tuple(doc[key])
        if "templates" in doc:
            doc["templates"] = tuple(AppTemplate(**t) if isinstance(t, dict) else t
                                     for t in doc["templates"])
        return cls(**doc)


PRESETS = {
    "100": ExperimentConfig(app_count=15, service_total=100),
    "200": ExperimentConfig(app_count=30, service_total=200),
    "desk": ExperimentConfig(device_count=25, app_count=5, users_per_gateway=4,
                             templates=DESK_TEMPLATES, service_total=30),
}


def barabasi_albert_edges(n: int, m: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Preferential attachment starting from a star on ``m + 1`` nodes; every
    new node links to ``m`` distinct existing nodes chosen proportionally to
    degree."""
    edges = [(0, v) for v in range(1, m + 1)]
    repeated = [u for e in edges for u in e]
    for new in range(m + 1, n):
        targets: list[int] = []
        while len(targets) < m:
            pick = repeated[rng.integers(len(repeated))]
            if pick not in targets:
                targets.append(pick)
        for t in targets:
            edges.append((t, new))
            repeated += [t, new]
    return edges


def generate_topology(config: ExperimentConfig, rng: np.random.Generator) -> Infrastructure:
    n = config.device_count
    pairs = barabasi_albert_edges(n, config.ba_attachment, rng)
    lo, hi = config.latency_range
    latency = rng.uniform(lo, hi, size=len(pairs))
    plain = [Link(a, b, float(l)) for (a, b), l in zip(pairs, latency)]
    centrality = betweenness_centrality(plain, n)
    cloud = int(np.argmax(centrality))
    links = [Link(l.a, l.b, config.cloud_link_latency) if cloud in (l.a, l.b) else l
             for l in plain]
    others = [i for i in np.argsort(centrality, kind="stable") if i != cloud]
    gateways = set(int(i) for i in others[:config.n_gateways])
    clo, chi = config.capacity_range
    caps = rng.integers(clo, chi, size=n, endpoint=True)
    devices = []
    for i in range(n):
        if i == cloud:
            devices.append(Device(i, UNBOUNDED, CLOUD))
        else:
            devices.append(Device(i, int(caps[i]), GATEWAY if i in gateways else ORDINARY))
    return Infrastructure(devices, links, compute_distances(links, n))


def generate_applications(config: ExperimentConfig, rng: np.random.Generator,
                          n_gateways: int) -> tuple[ApplicationModel, list[tuple[int, ...]]]:
    """Services and consumption matrix; the request matrix is left empty.

    Returns the model plus, per application, its entry service ids.
    """
    templates = [config.templates[a % len(config.templates)] for a in range(config.app_count)]
    total = sum(t.service_count for t in templates)
    if config.service_total is not None and total != config.service_total:
        raise ValueError(f"{config.app_count} apps over the templates give {total} "
                         f"services, expected {config.service_total}")
    lo, hi = config.consumption_range
    consumption = rng.integers(lo, hi, size=total, endpoint=True)
    cm = np.zeros((total, total), dtype=bool)
    services, entries = [], []
    offset = 0
    for app, tpl in enumerate(templates):
        for s in range(tpl.service_count):
            services.append(Service(offset + s, int(consumption[offset + s]), app))
        for a, b in tpl.edges:
            cm[offset + a, offset + b] = True
        entries.append(tuple(offset + s for s in tpl.entry_services))
        offset += tpl.service_count
    rm = np.zeros((n_gateways, total), dtype=bool)
    return ApplicationModel(services, cm, rm), entries


def users_per_app(total_users: int, app_count: int) -> list[int]:
    base, extra = divmod(total_users, app_count)
    return [base + (1 if a < extra else 0) for a in range(app_count)]


def place_requests(config: ExperimentConfig, infra: Infrastructure,
                   entries: list[tuple[int, ...]], n_services: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Each application is requested from a random seed gateway and the
    gateways closest to it, one gateway per user of the application."""
    gws = infra.gateways
    rm = np.zeros((len(gws), n_services), dtype=bool)
    counts = users_per_app(config.total_users, len(entries))
    if max(counts) > len(gws):
        raise ValueError(f"{max(counts)} users per application exceed "
                         f"{len(gws)} gateways")
    for app, entry in enumerate(entries):
        seed_row = int(rng.integers(len(gws)))
        d = infra.distances[gws[seed_row], gws]
        # nearest first, seed itself at distance 0; ties by device id
        order = np.lexsort((gws, d))
        if order[0] != seed_row:
            order = np.r_[seed_row, order[order != seed_row]]
        for row in order[:max(counts[app], 1)]:
            rm[row, list(entry)] = True
    return rm


def generate_instance(config: ExperimentConfig = ExperimentConfig(),
                      name: str | None = None) -> Instance:
    rng = make_rng(config.master_seed)
    infra = generate_topology(config, rng)
    apps, entries = generate_applications(config, rng, len(infra.gateways))
    rm = place_requests(config, infra, entries, apps.n_services, rng)
    apps = ApplicationModel(apps.services, apps.consumption_matrix, rm)
    meta = {
        "name": name or f"d{config.device_count}_s{apps.n_services}_seed{config.master_seed}",
        "seed": config.master_seed,
        "config": config.to_dict(),
        "template_digests": {t.name: t.digest() for t in config.templates},
    }
    instance = Instance(infra, apps, meta)
    apps.check_connected_apps()
    return instance
