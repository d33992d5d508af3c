"""Pure-Python compute backend.

Mirrors the compiled extension exactly: Vietoris-Rips persistence pairs via
coboundary reduction with clearing (union-find in dimension 0), and
binary-heap Dijkstra over CSR graphs.  Kept dependency-light so it can serve
as the fallback when the extension is unavailable; the compiled backend must
produce identical output.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .errors import RipsBudgetError

NAME = "pure"


def _find(parent: list[int], x: int) -> int:
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def _pack(verts, n: int) -> int:
    key = 0
    for v in verts:
        key = key * n + v
    return key


def rips_pairs(dist: np.ndarray, max_dim: int, max_edge: float,
               budget: int = 100_000_000):
    """Persistence pairs of the Rips filtration of a distance matrix.

    Returns ``(dims, births, deaths)`` arrays with ``inf`` deaths for classes
    alive at ``max_edge``; zero-persistence pairs are dropped.  Pairing is
    computed by reducing the coboundary matrix dimension by dimension with
    clearing, processing columns in decreasing (filtration, vertex-key) order
    with the minimal cofacet as pivot.
    """
    d = np.asarray(dist, dtype=float)
    n = d.shape[0]
    work = n  # simplex-entry counter for the budget guard

    pairs: list[tuple[int, float, float]] = []

    # Dimension 0: union-find over edges in increasing filtration order.
    iu, ju = np.triu_indices(n, k=1)
    keep = d[iu, ju] <= max_edge
    iu, ju, w = iu[keep], ju[keep], d[iu, ju][keep]
    ekeys = iu.astype(np.int64) * n + ju
    order = np.lexsort((ekeys, w))
    work += order.size
    if work > budget:
        raise RipsBudgetError(work, budget)

    parent = list(range(n))
    mst_keys: set[int] = set()
    for idx in order:
        u, v, f = int(iu[idx]), int(ju[idx]), float(w[idx])
        ru, rv = _find(parent, u), _find(parent, v)
        if ru == rv:
            continue
        parent[max(ru, rv)] = min(ru, rv)
        mst_keys.add(int(ekeys[idx]))
        if f > 0.0:
            pairs.append((0, 0.0, f))
    n_components = sum(1 for x in range(n) if _find(parent, x) == x)
    pairs.extend((0, 0.0, math.inf) for _ in range(n_components))

    if max_dim >= 1 and n >= 2:
        nbr_sets = [set(map(int, np.flatnonzero((d[i] <= max_edge)
                                                & (np.arange(n) != i))))
                    for i in range(n)]

        def cofacet(verts, x, f_lo):
            fc = f_lo
            for v in verts:
                if d[x, v] > fc:
                    fc = d[x, v]
            return fc, _pack(sorted((*verts, x)), n)

        # Columns per dimension: (filtration, packed key, vertex tuple).
        columns = [(float(w[idx]), int(ekeys[idx]), (int(iu[idx]), int(ju[idx])))
                   for idx in range(iu.size)]
        negatives = mst_keys

        for q in range(1, max_dim + 1):
            columns.sort()
            pivot_owner: dict[int, set] = {}
            negatives_next: set[int] = set()

            for f_sig, key_sig, verts in reversed(columns):
                if key_sig in negatives:
                    continue
                common = set.intersection(*(nbr_sets[v] for v in verts))
                col = {cofacet(verts, x, f_sig) for x in common}
                work += len(col)
                if work > budget:
                    raise RipsBudgetError(work, budget)

                while col:
                    piv = min(col)
                    owner = pivot_owner.get(piv[1])
                    if owner is None:
                        pivot_owner[piv[1]] = col
                        negatives_next.add(piv[1])
                        if piv[0] > f_sig:
                            pairs.append((q, f_sig, piv[0]))
                        break
                    col ^= owner
                else:
                    pairs.append((q, f_sig, math.inf))

            if q < max_dim:
                nxt = []
                for f_sig, key_sig, verts in columns:
                    common = set.intersection(*(nbr_sets[v] for v in verts))
                    top = verts[-1]
                    for x in common:
                        if x > top:
                            fc, ck = cofacet(verts, x, f_sig)
                            nxt.append((fc, ck, (*verts, x)))
                work += len(nxt)
                if work > budget:
                    raise RipsBudgetError(work, budget)
                columns = nxt
                negatives = negatives_next

    pairs.sort()
    dims = np.array([p[0] for p in pairs], dtype=np.int8)
    births = np.array([p[1] for p in pairs], dtype=float)
    deaths = np.array([p[2] for p in pairs], dtype=float)
    return dims, births, deaths


def dijkstra_csr(indptr: np.ndarray, indices: np.ndarray, weights: np.ndarray,
                 sources: np.ndarray, n: int) -> np.ndarray:
    """Single-source shortest-path lengths from each source over a CSR graph."""
    out = np.full((len(sources), n), np.inf)
    for row, s in enumerate(sources):
        dist = out[row]
        dist[s] = 0.0
        heap = [(0.0, int(s))]
        done = np.zeros(n, dtype=bool)
        while heap:
            du, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                alt = du + weights[e]
                if alt < dist[v]:
                    dist[v] = alt
                    heapq.heappush(heap, (alt, int(v)))
    return out
