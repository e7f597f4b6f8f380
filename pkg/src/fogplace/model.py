"""Fog infrastructure, application workload and placement data types.

An allocation (placement) is a ``numpy`` boolean matrix of shape
``(n_services, n_devices)`` where ``alloc[x, i]`` is true when device ``i``
hosts an instance of service ``x``.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

CLOUD = "cloud"
GATEWAY = "gateway"
ORDINARY = "ordinary"
ROLES = (CLOUD, GATEWAY, ORDINARY)

# Sentinel for the unbounded cloud capacity; never used in capacity sums.
UNBOUNDED = math.inf


class DisconnectedGraphError(ValueError):
    def __init__(self, a: int, b: int):
        super().__init__(f"device {b} is unreachable from device {a}")
        self.pair = (a, b)


@dataclass(frozen=True)
class Device:
    id: int
    capacity: float
    role: str = ORDINARY

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown device role {self.role!r}")
        if self.role != CLOUD and not self.capacity > 0:
            raise ValueError(f"device {self.id} needs a positive capacity")


@dataclass(frozen=True)
class Link:
    a: int
    b: int
    latency_ms: float


def compute_distances(links: Iterable[Link], device_count: int) -> np.ndarray:
    """All-pairs shortest-path latency matrix (sum of link latencies).

    Raises ``DisconnectedGraphError`` naming the first unreachable pair.
    """
    links = list(links)
    if device_count == 1 and not links:
        return np.zeros((1, 1))
    rows, cols, lat = [], [], []
    for link in links:
        if not link.latency_ms > 0:
            raise ValueError(f"link {link.a}-{link.b} has non-positive latency")
        rows += [link.a, link.b]
        cols += [link.b, link.a]
        lat += [link.latency_ms, link.latency_ms]
    graph = csr_matrix((lat, (rows, cols)), shape=(device_count, device_count))
    dist = shortest_path(graph, method="D", directed=False)
    unreachable = np.argwhere(np.isinf(dist))
    if len(unreachable):
        a, b = unreachable[0]
        raise DisconnectedGraphError(int(a), int(b))
    # csgraph keeps parallel edges as the last one written; symmetrise anyway
    return np.minimum(dist, dist.T)


def _adjacency(links: Iterable[Link], device_count: int) -> list[list[int]]:
    adj: list[set[int]] = [set() for _ in range(device_count)]
    for link in links:
        adj[link.a].add(link.b)
        adj[link.b].add(link.a)
    return [sorted(s) for s in adj]


def betweenness_centrality(links: Iterable[Link], device_count: int) -> np.ndarray:
    """Hop-count shortest-path betweenness (Brandes), unnormalised.

    Each unordered pair is counted once, so a star centre with ``k`` leaves
    scores ``k * (k - 1) / 2``.
    """
    adj = _adjacency(links, device_count)
    score = np.zeros(device_count)
    for s in range(device_count):
        order = []
        preds: list[list[int]] = [[] for _ in range(device_count)]
        sigma = np.zeros(device_count)
        sigma[s] = 1.0
        depth = np.full(device_count, -1)
        depth[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w in adj[v]:
                if depth[w] < 0:
                    depth[w] = depth[v] + 1
                    queue.append(w)
                if depth[w] == depth[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        if len(order) != device_count:
            missing = next(i for i in range(device_count) if depth[i] < 0)
            raise DisconnectedGraphError(s, missing)
        delta = np.zeros(device_count)
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                score[w] += delta[w]
    return score / 2.0


@dataclass(frozen=True)
class Infrastructure:
    devices: tuple[Device, ...]
    links: tuple[Link, ...]
    distances: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "devices", tuple(self.devices))
        object.__setattr__(self, "links", tuple(self.links))
        for pos, dev in enumerate(self.devices):
            if dev.id != pos:
                raise ValueError("device ids must be 0..n-1 in order")
        if sum(d.role == CLOUD for d in self.devices) != 1:
            raise ValueError("exactly one device must have the cloud role")
        if self.distances is None:
            dist = compute_distances(self.links, len(self.devices))
            object.__setattr__(self, "distances", dist)
        self.distances.setflags(write=False)

    @property
    def n_devices(self) -> int:
        return len(self.devices)

    @cached_property
    def cloud(self) -> int:
        return next(d.id for d in self.devices if d.role == CLOUD)

    @cached_property
    def gateways(self) -> np.ndarray:
        return np.array([d.id for d in self.devices if d.role == GATEWAY], dtype=int)

    @cached_property
    def capacities(self) -> np.ndarray:
        """Capacity vector with ``inf`` at the cloud position."""
        return np.array([UNBOUNDED if d.role == CLOUD else d.capacity
                         for d in self.devices], dtype=float)

    @cached_property
    def fog_mask(self) -> np.ndarray:
        mask = np.ones(self.n_devices, dtype=bool)
        mask[self.cloud] = False
        return mask

    @cached_property
    def latency_max(self) -> float:
        """Distance between the cloud and its farthest device."""
        return float(self.distances[self.cloud].max())


@dataclass(frozen=True)
class Service:
    id: int
    consumption: float
    app_id: int = 0

    def __post_init__(self):
        if self.consumption < 1:
            raise ValueError(f"service {self.id} consumption must be >= 1")


@dataclass(frozen=True)
class ApplicationModel:
    """Services, consumption matrix ``I`` and gateway request matrix ``R``.

    Rows of ``request_matrix`` follow the order of ``Infrastructure.gateways``.
    """

    services: tuple[Service, ...]
    consumption_matrix: np.ndarray = field(repr=False, compare=False)
    request_matrix: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "services", tuple(self.services))
        n = len(self.services)
        cm = np.asarray(self.consumption_matrix, dtype=bool)
        rm = np.asarray(self.request_matrix, dtype=bool)
        if cm.shape != (n, n):
            raise ValueError(f"consumption matrix must be {n}x{n}, got {cm.shape}")
        if cm.diagonal().any():
            raise ValueError("a service cannot consume itself")
        if rm.ndim != 2 or rm.shape[1] != n:
            raise ValueError(f"request matrix must have {n} columns")
        cm.setflags(write=False)
        rm.setflags(write=False)
        object.__setattr__(self, "consumption_matrix", cm)
        object.__setattr__(self, "request_matrix", rm)

    @property
    def n_services(self) -> int:
        return len(self.services)

    @cached_property
    def consumption(self) -> np.ndarray:
        return np.array([s.consumption for s in self.services], dtype=float)

    @cached_property
    def app_ids(self) -> np.ndarray:
        return np.array([s.app_id for s in self.services], dtype=int)

    def check_connected_apps(self):
        """Raise if some application's service graph is not weakly connected
        or has no requested service."""
        und = self.consumption_matrix | self.consumption_matrix.T
        requested = self.request_matrix.any(axis=0)
        for app in np.unique(self.app_ids):
            members = np.flatnonzero(self.app_ids == app)
            seen = {members[0]}
            stack = [members[0]]
            while stack:
                v = stack.pop()
                for w in np.flatnonzero(und[v]):
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            if seen != set(members):
                raise ValueError(f"application {app} is not connected")
            if not requested[members].any():
                raise ValueError(f"application {app} has no requested service")


@dataclass(frozen=True)
class Instance:
    """A complete placement problem: infrastructure plus workload."""

    infrastructure: Infrastructure
    apps: ApplicationModel
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n_gw = len(self.infrastructure.gateways)
        if self.apps.request_matrix.shape[0] != n_gw:
            raise ValueError(f"request matrix needs one row per gateway ({n_gw})")
        cap = self.infrastructure.capacities[self.infrastructure.fog_mask]
        if len(cap) and self.apps.n_services and self.apps.consumption.max() > cap.max():
            raise ValueError("a service does not fit on any fog device")

    @property
    def shape(self) -> tuple[int, int]:
        return self.apps.n_services, self.infrastructure.n_devices

    # Shortcuts used on hot paths.
    @property
    def distances(self) -> np.ndarray:
        return self.infrastructure.distances

    @property
    def cloud(self) -> int:
        return self.infrastructure.cloud

    @property
    def gateways(self) -> np.ndarray:
        return self.infrastructure.gateways

    @property
    def consumption(self) -> np.ndarray:
        return self.apps.consumption

    @property
    def capacities(self) -> np.ndarray:
        return self.infrastructure.capacities

    @cached_property
    def fog_capacity(self) -> float:
        return float(self.capacities[self.infrastructure.fog_mask].sum())

    # -- serialisation -----------------------------------------------------
    def to_dict(self) -> dict:
        infra, apps = self.infrastructure, self.apps
        gws = infra.gateways
        doc = {
            "devices": [{"id": d.id,
                         "capacity": None if d.role == CLOUD else d.capacity,
                         "role": d.role} for d in infra.devices],
            "links": [{"a": l.a, "b": l.b, "latency_ms": l.latency_ms}
                      for l in infra.links],
            "services": [{"id": s.id, "consumption": s.consumption, "app": s.app_id}
                         for s in apps.services],
            "consumption_edges": [[int(x), int(y)]
                                  for x, y in np.argwhere(apps.consumption_matrix)],
            "requests": [{"gateway": int(gws[g]), "service": int(x)}
                         for g, x in np.argwhere(apps.request_matrix)],
        }
        if self.meta:
            doc["provenance"] = self.meta
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Instance":
        devices = [Device(d["id"], UNBOUNDED if d["capacity"] is None else d["capacity"],
                          d["role"]) for d in doc["devices"]]
        links = [Link(l["a"], l["b"], l["latency_ms"]) for l in doc["links"]]
        infra = Infrastructure(devices, links)
        services = [Service(s["id"], s["consumption"], s.get("app", 0))
                    for s in doc["services"]]
        n = len(services)
        cm = np.zeros((n, n), dtype=bool)
        for x, y in doc.get("consumption_edges", []):
            cm[x, y] = True
        row_of = {int(g): r for r, g in enumerate(infra.gateways)}
        rm = np.zeros((len(row_of), n), dtype=bool)
        for req in doc.get("requests", []):
            if req["gateway"] not in row_of:
                raise ValueError(f"device {req['gateway']} is not a gateway")
            rm[row_of[req["gateway"]], req["service"]] = True
        return cls(infra, ApplicationModel(services, cm, rm), doc.get("provenance", {}))

    def save(self, path: str | Path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path: str | Path) -> "Instance":
        return cls.from_dict(json.loads(Path(path).read_text()))


def check_shape(alloc: np.ndarray, instance: Instance):
    if alloc.shape != instance.shape:
        raise ValueError(f"allocation shape {alloc.shape} does not match "
                         f"(services, devices) = {instance.shape}")


def device_loads(alloc: np.ndarray, consumption: Sequence[float]) -> np.ndarray:
    """Resource units consumed on every device."""
    return np.asarray(consumption, dtype=float) @ alloc


def is_feasible(alloc: np.ndarray, instance: Instance) -> tuple[bool, np.ndarray]:
    """Capacity check on every non-cloud device.

    Returns ``(ok, loads)``; the cloud's capacity is unbounded so its load is
    reported but never violates.
    """
    check_shape(alloc, instance)
    loads = device_loads(alloc, instance.consumption)
    fog = instance.infrastructure.fog_mask
    ok = bool(np.all(loads[fog] <= instance.capacities[fog]))
    return ok, loads
