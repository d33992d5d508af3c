"""Independent brute-force oracles used to pin expected values.

These deliberately share no code with the package: full boundary-matrix
reduction for persistence, exhaustive matching enumeration for bottleneck,
Floyd-Warshall for shortest paths, triple loops for Gram/Hausdorff.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def naive_rips_pairs(dist: np.ndarray, max_dim: int, max_edge: float):
    """Persistence pairs by reducing the full boundary matrix column by column."""
    d = np.asarray(dist, dtype=float)
    n = d.shape[0]

    simplices = [((i,), 0.0) for i in range(n)]
    for dim in range(1, max_dim + 2):
        for verts in itertools.combinations(range(n), dim + 1):
            f = max(d[u, v] for u, v in itertools.combinations(verts, 2))
            if f <= max_edge:
                simplices.append((verts, f))
    simplices.sort(key=lambda s: (s[1], len(s[0]), s[0]))
    index = {verts: i for i, (verts, _) in enumerate(simplices)}

    columns = []
    for verts, _ in simplices:
        if len(verts) == 1:
            columns.append(set())
        else:
            columns.append({index[verts[:k] + verts[k + 1:]]
                            for k in range(len(verts))})

    low_owner: dict[int, int] = {}
    pair_of: dict[int, int] = {}
    for j in range(len(simplices)):
        col = columns[j]
        while col:
            low = max(col)
            if low not in low_owner:
                low_owner[low] = j
                pair_of[low] = j
                break
            col ^= columns[low_owner[low]]

    pairs = []
    for low, j in pair_of.items():
        verts, fb = simplices[low]
        fd = simplices[j][1]
        if fd > fb:
            pairs.append((len(verts) - 1, fb, fd))
    for i, (verts, f) in enumerate(simplices):
        q = len(verts) - 1
        if q > max_dim:
            continue
        if not columns[i] and i not in pair_of:
            pairs.append((q, f, math.inf))
    pairs.sort()
    return pairs


def brute_bottleneck(a: np.ndarray, b: np.ndarray) -> float:
    """Exhaustive bottleneck over all partial matchings of finite diagrams."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    na, nb = len(a), len(b)
    diag_a = (a[:, 1] - a[:, 0]) / 2.0
    diag_b = (b[:, 1] - b[:, 0]) / 2.0

    best = math.inf
    for k in range(0, min(na, nb) + 1):
        for subset_a in itertools.combinations(range(na), k):
            rest_a = [i for i in range(na) if i not in subset_a]
            for subset_b in itertools.permutations(range(nb), k):
                cost = 0.0
                for i, j in zip(subset_a, subset_b):
                    cost = max(cost, max(abs(a[i, 0] - b[j, 0]),
                                         abs(a[i, 1] - b[j, 1])))
                for i in rest_a:
                    cost = max(cost, diag_a[i])
                for j in set(range(nb)) - set(subset_b):
                    cost = max(cost, diag_b[j])
                best = min(best, cost)
    return best


def floyd_warshall(indptr, indices, weights, n) -> np.ndarray:
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    for u in range(n):
        for e in range(indptr[u], indptr[u + 1]):
            dist[u, indices[e]] = min(dist[u, indices[e]], weights[e])
    for k in range(n):
        dist = np.minimum(dist, dist[:, k][:, None] + dist[k, :][None, :])
    return dist


def brute_gram(y: np.ndarray) -> np.ndarray:
    n, p = y.shape
    g = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            acc = 0.0
            for k in range(p):
                acc += y[i, k] * y[j, k]
            g[i, j] = acc
    return g


def brute_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    def directed(x, yy):
        worst = 0.0
        for u in x:
            best = min(math.dist(u, v) for v in yy)
            worst = max(worst, best)
        return worst

    return max(directed(a, b), directed(b, a))


def teleport_min_image(z, zp, r1, r2) -> float:
    """Minimum Euclidean distance over the nine lattice translates."""
    best = math.inf
    for s1 in (-1, 0, 1):
        for s2 in (-1, 0, 1):
            shifted = (zp[0] + s1 * r1[0] + s2 * r2[0],
                       zp[1] + s1 * r1[1] + s2 * r2[1])
            best = min(best, math.dist(z, shifted))
    return best
