"""Objective functions for a placement: free resources, service spread and
network latency, plus the weighted-sum scalarisation used by the GA."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import Instance, check_shape

OBJECTIVE_NAMES = ("free_resources", "service_spread", "network_latency_ms")


class ObjectiveVector(NamedTuple):
    free_resources: float
    service_spread: float
    network_latency: float

    def to_csv(self) -> str:
        return ",".join(repr(float(v)) for v in self)


@dataclass(frozen=True)
class WeightConfig:
    """Weights ``theta`` and scale factors for (free, spread, latency).

    The latency objective is scaled by ``1 / latency_max``; the other two are
    already fractions.
    """

    latency_max: float
    theta: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    omega_resources: float = 1.0
    omega_spread: float = 1.0

    def __post_init__(self):
        if not self.latency_max > 0:
            raise ValueError("latency_max must be positive")
        if len(self.theta) != 3 or min(self.theta) < 0:
            raise ValueError("theta needs three non-negative weights")
        if not np.isclose(sum(self.theta), 1.0):
            raise ValueError(f"theta must sum to 1, got {sum(self.theta)}")

    @classmethod
    def for_instance(cls, instance: Instance, **kw) -> "WeightConfig":
        return cls(latency_max=instance.infrastructure.latency_max, **kw)

    @property
    def omega(self) -> np.ndarray:
        return np.array([self.omega_resources, self.omega_spread, 1.0 / self.latency_max])

    @property
    def coefficients(self) -> np.ndarray:
        return self.omega * np.asarray(self.theta)


def free_resources(alloc: np.ndarray, instance: Instance) -> float:
    """1 - (units consumed on fog devices) / (total fog capacity)."""
    total = instance.fog_capacity
    if total <= 0:
        raise ValueError("instance has no fog capacity")
    fog = instance.infrastructure.fog_mask
    used = instance.consumption @ alloc[:, fog].sum(axis=1)
    return 1.0 - float(used) / total


def service_spread(alloc: np.ndarray, distances: np.ndarray) -> float:
    """Mean over services of the coefficient of variation of the pairwise
    distances between that service's replicas.

    Services with fewer than two replicas (no pairs) count as CV 0.
    """
    n_services = alloc.shape[0]
    if n_services == 0:
        return 0.0
    a = alloc.astype(float)
    count = alloc.sum(axis=1)
    pairs = count * (count - 1) / 2.0
    # pair sums over i < j from the symmetric quadratic forms (zero diagonal)
    s1 = ((a @ distances) * a).sum(axis=1) / 2.0
    s2 = ((a @ (distances * distances)) * a).sum(axis=1) / 2.0
    multi = pairs > 0
    mean = np.zeros(n_services)
    mean[multi] = s1[multi] / pairs[multi]
    var = np.zeros(n_services)
    var[multi] = s2[multi] / pairs[multi] - mean[multi] ** 2
    std = np.sqrt(np.maximum(var, 0.0))
    cv = np.divide(std, mean, out=np.zeros(n_services), where=mean > 0)
    return float(cv.sum()) / n_services


def _nearest_host(alloc: np.ndarray, distances: np.ndarray) -> np.ndarray:
    """``out[r, x]``: distance from origin row ``r`` of ``distances`` to the
    closest device hosting service ``x``."""
    if not alloc.any(axis=1).all():
        raise ValueError("every service needs at least one instance")
    xs, cols = np.nonzero(alloc)
    # row-major order, so each service's hosts form one contiguous run
    starts = np.concatenate(([0], np.flatnonzero(xs[1:] != xs[:-1]) + 1))
    return np.minimum.reduceat(distances[:, cols], starts, axis=1)


def network_latency(alloc: np.ndarray, distances: np.ndarray,
                    consumption_matrix: np.ndarray, request_matrix: np.ndarray,
                    gateways: np.ndarray, gateway_self_host_zero: bool = False) -> float:
    """Average of per-service consumer distances and per-gateway request
    distances, divided by ``|S| + |GW|``.

    A service's term averages, over its instances and the services it
    consumes, the distance to the closest instance of the consumed service.
    A gateway's term averages, over the services it requests, the distance to
    the closest host other than the gateway itself (unless
    ``gateway_self_host_zero``). Services consuming nothing and gateways
    requesting nothing contribute 0 but stay in the denominator.
    """
    n_services = alloc.shape[0]
    n_gw = len(gateways)
    if n_services + n_gw == 0:
        return 0.0
    near = _nearest_host(alloc, distances).T          # (S, F)
    ncons = consumption_matrix.sum(axis=1)
    instances = alloc.sum(axis=1)
    cons_total = (alloc * (consumption_matrix.astype(float) @ near)).sum(axis=1)
    has = ncons > 0
    d_cons = np.zeros(n_services)
    d_cons[has] = cons_total[has] / (instances[has] * ncons[has])

    d_req = 0.0
    if n_gw:
        origin = distances[gateways].copy()
        if not gateway_self_host_zero:
            origin[np.arange(n_gw), gateways] = np.inf
        near_gw = _nearest_host(alloc, origin)         # (GW, S)
        nreq = request_matrix.sum(axis=1)
        picked = np.where(request_matrix, near_gw, 0.0)
        if np.isinf(picked).any():
            g = np.argwhere(np.isinf(picked))[0]
            raise ValueError(f"gateway {gateways[g[0]]} is the only host of "
                             f"requested service {g[1]}")
        sums = picked.sum(axis=1)
        d_req = float(np.sum(sums[nreq > 0] / nreq[nreq > 0]))
    return (float(d_cons.sum()) + d_req) / (n_services + n_gw)


def evaluate(alloc: np.ndarray, instance: Instance,
             gateway_self_host_zero: bool = False) -> ObjectiveVector:
    check_shape(alloc, instance)
    apps = instance.apps
    return ObjectiveVector(
        free_resources(alloc, instance),
        service_spread(alloc, instance.distances),
        network_latency(alloc, instance.distances, apps.consumption_matrix,
                        apps.request_matrix, instance.gateways, gateway_self_host_zero),
    )


def weighted_sum(objectives, weights: WeightConfig) -> float | np.ndarray:
    """Scaled, weighted sum of objective vectors (works row-wise on arrays).

    Not clamped: latencies above ``latency_max`` push the value past 1.
    """
    arr = np.asarray(objectives, dtype=float)
    value = arr @ weights.coefficients
    if np.any(arr[..., 2] > weights.latency_max):
        warnings.warn("network latency exceeds latency_max; weighted sum > scale",
                      stacklevel=2)
    return float(value) if np.ndim(value) == 0 else value
