"""Independent reference implementations used only by the tests.

Everything here is written as literally as possible (plain loops, no shared
code with the package) so it can serve as an oracle.
"""
import itertools
import math

import numpy as np


def floyd_warshall(links, n):
    d = [[0.0 if i == j else math.inf for j in range(n)] for i in range(n)]
    for a, b, lat in links:
        d[a][b] = min(d[a][b], lat)
        d[b][a] = min(d[b][a], lat)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][k] + d[k][j] < d[i][j]:
                    d[i][j] = d[i][k] + d[k][j]
    return np.array(d)


def all_simple_paths(adj, s, t):
    stack = [(s, [s])]
    while stack:
        v, path = stack.pop()
        if v == t:
            yield path
            continue
        for w in adj[v]:
            if w not in path:
                stack.append((w, path + [w]))


def brute_force_betweenness(edges, n):
    """Sum over unordered pairs of the fraction of minimum-hop paths through
    each node, by enumerating every simple path."""
    adj = {v: set() for v in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    score = [0.0] * n
    for s, t in itertools.combinations(range(n), 2):
        paths = list(all_simple_paths(adj, s, t))
        best = min(len(p) for p in paths)
        shortest = [p for p in paths if len(p) == best]
        for v in range(n):
            if v in (s, t):
                continue
            score[v] += sum(v in p for p in shortest) / len(shortest)
    return np.array(score)


def literal_objectives(A, caps, cloud, cons, D, I, R, gateways, self_zero=False):
    """Free resources, service spread and network latency evaluated with
    explicit sums and minima, one term at a time."""
    S, F = len(A), len(A[0])
    # free resources over fog devices
    used = sum(A[x][i] * cons[x] for x in range(S) for i in range(F) if i != cloud)
    total = sum(caps[i] for i in range(F) if i != cloud)
    free = 1.0 - used / total

    # service spread
    cvs = 0.0
    for x in range(S):
        num = 0.0
        cnt = 0
        for i in range(F):
            for j in range(i + 1, F):
                if A[x][i] and A[x][j]:
                    num += D[i][j]
                    cnt += 1
        if cnt == 0:
            continue
        mean = num / cnt
        sq = 0.0
        for i in range(F):
            for j in range(i + 1, F):
                if A[x][i] and A[x][j]:
                    sq += (D[i][j] - mean) ** 2
        sigma = math.sqrt(sq / cnt)
        if mean > 0:
            cvs += sigma / mean
    spread = cvs / S

    # network latency
    total_cons = 0.0
    for x in range(S):
        num = 0.0
        den = 0
        for i in range(F):
            for y in range(S):
                if A[x][i] and I[x][y]:
                    num += min(D[i][j] for j in range(F) if A[y][j])
                    den += 1
        if den:
            total_cons += num / den
    total_req = 0.0
    for g, gi in enumerate(gateways):
        num = 0.0
        den = 0
        for x in range(S):
            if R[g][x]:
                hosts = [j for j in range(F) if A[x][j] and (self_zero or j != gi)]
                num += min(D[gi][j] for j in hosts)
                den += 1
        if den:
            total_req += num / den
    latency = (total_cons + total_req) / (S + len(gateways))
    return free, spread, latency


def instance_objectives(A, inst, self_zero=False):
    return literal_objectives(
        A.astype(int).tolist(), list(inst.capacities), inst.cloud, list(inst.consumption),
        inst.distances.tolist(), inst.apps.consumption_matrix.astype(int).tolist(),
        inst.apps.request_matrix.astype(int).tolist(), [int(g) for g in inst.gateways],
        self_zero)


def naive_dominates(a, b):
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def naive_fronts(objs):
    """Repeatedly peel off the non-dominated set."""
    remaining = list(range(len(objs)))
    fronts = []
    while remaining:
        front = [i for i in remaining
                 if not any(naive_dominates(objs[j], objs[i]) for j in remaining)]
        fronts.append(sorted(front))
        remaining = [i for i in remaining if i not in front]
    return fronts


def enumerate_feasible(inst):
    """Every allocation with the cloud hosting all services and any subset of
    fog cells, filtered by the capacity constraint."""
    S, F = inst.shape
    fog = [i for i in range(F) if i != inst.cloud]
    cells = [(x, i) for x in range(S) for i in fog]
    out = []
    for bits in itertools.product((0, 1), repeat=len(cells)):
        A = np.zeros((S, F), dtype=bool)
        A[:, inst.cloud] = True
        for (x, i), b in zip(cells, bits):
            A[x, i] = b
        ok = all(sum(inst.consumption[x] for x in range(S) if A[x, i]) <= inst.capacities[i]
                 for i in fog)
        if ok:
            out.append(A)
    return out


def exact_pareto(inst):
    allocs = enumerate_feasible(inst)
    objs = [instance_objectives(A, inst) for A in allocs]
    front = [i for i in range(len(objs))
             if not any(naive_dominates(objs[j], objs[i]) for j in range(len(objs)))]
    return [allocs[i] for i in front], np.array([objs[i] for i in front])


def hypervolume_3d(points, ref):
    """Exact dominated volume by slicing on coordinate-compressed grid cells."""
    pts = [p for p in points if all(a < r for a, r in zip(p, ref))]
    if not pts:
        return 0.0
    xs = sorted({p[0] for p in pts} | {ref[0]})
    ys = sorted({p[1] for p in pts} | {ref[1]})
    zs = sorted({p[2] for p in pts} | {ref[2]})
    vol = 0.0
    for a in range(len(xs) - 1):
        for b in range(len(ys) - 1):
            for c in range(len(zs) - 1):
                corner = (xs[a], ys[b], zs[c])
                if any(all(p[k] <= corner[k] for k in range(3)) for p in pts):
                    vol += (xs[a + 1] - xs[a]) * (ys[b + 1] - ys[b]) * (zs[c + 1] - zs[c])
    return vol
