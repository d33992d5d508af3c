"""Latent metrics, k-NN graphs, shortest paths, smoothing, and the
isometry regression.

The teleport metric realizes periodic boundary conditions on a rhombus by
minimizing plain Euclidean distance over the nine lattice translates of one
endpoint, which reproduces shortest flat-torus separations without
materializing the re-tessellated point set.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ._core import dijkstra_csr
from .homology import pairwise_distances
from .model import embed_torus3d

__all__ = [
    "OpenFieldEuclid",
    "RhombusEuclid",
    "RhombusTeleport",
    "Torus3D",
    "AmbientEuclid",
    "KnnGraph",
    "GeodesicMatrix",
    "IsometryReport",
    "latent_distance",
    "metric_pairwise",
    "knn_graph",
    "shortest_paths",
    "smooth_path_lengths",
    "isometry_regression",
]

_DOMAIN_TOL = 1e-9


@dataclass(frozen=True)
class OpenFieldEuclid:
    """Plain Euclidean distance between latent positions."""


@dataclass(frozen=True)
class AmbientEuclid:
    """Euclidean distance between data rows (used for observed clouds)."""


def _check_basis(r1, r2) -> None:
    if abs(r1[0] * r2[1] - r1[1] * r2[0]) < 1e-12:
        raise ValueError("lattice vectors r1, r2 must be linearly independent")


@dataclass(frozen=True)
class RhombusEuclid:
    r1: tuple[float, float] = (1.0, 0.0)
    r2: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        _check_basis(self.r1, self.r2)

    @property
    def basis(self) -> np.ndarray:
        return np.column_stack([self.r1, self.r2]).astype(float)


@dataclass(frozen=True)
class RhombusTeleport:
    r1: tuple[float, float] = (1.0, 0.0)
    r2: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        _check_basis(self.r1, self.r2)

    @property
    def basis(self) -> np.ndarray:
        return np.column_stack([self.r1, self.r2]).astype(float)


@dataclass(frozen=True)
class Torus3D:
    """Chordal distance after embedding rhombus coordinates on a 3D torus.

    Lattice coordinates (a, b) of a point map to angles (2 pi a, 2 pi b);
    R and r are the major/minor radii of the embedding.
    """

    R: float
    r: float
    r1: tuple[float, float] = (1.0, 0.0)
    r2: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if not self.R > self.r > 0:
            raise ValueError("torus radii must satisfy R > r > 0")
        _check_basis(self.r1, self.r2)

    @property
    def basis(self) -> np.ndarray:
        return np.column_stack([self.r1, self.r2]).astype(float)


LatentMetric = OpenFieldEuclid | RhombusEuclid | RhombusTeleport | Torus3D | AmbientEuclid


def _check_rhombus_domain(basis: np.ndarray, pts: np.ndarray) -> np.ndarray:
    ab = np.linalg.solve(basis, pts.T).T
    if np.any(ab < -_DOMAIN_TOL) or np.any(ab > 1 + _DOMAIN_TOL):
        bad = np.argwhere((ab < -_DOMAIN_TOL) | (ab > 1 + _DOMAIN_TOL))[0, 0]
        raise ValueError(f"point {bad} lies outside the rhombus")
    return ab


def metric_pairwise(metric: LatentMetric, a: np.ndarray,
                    b: np.ndarray | None = None) -> np.ndarray:
    """Pairwise distance matrix between point sets under a latent metric."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = a if b is None else np.atleast_2d(np.asarray(b, dtype=float))

    if isinstance(metric, (OpenFieldEuclid, AmbientEuclid)):
        return _euclid(a, b)
    if isinstance(metric, RhombusEuclid):
        _check_rhombus_domain(metric.basis, a)
        _check_rhombus_domain(metric.basis, b)
        return _euclid(a, b)
    if isinstance(metric, RhombusTeleport):
        _check_rhombus_domain(metric.basis, a)
        _check_rhombus_domain(metric.basis, b)
        r1 = np.asarray(metric.r1)
        r2 = np.asarray(metric.r2)
        diff = a[:, None, :] - b[None, :, :]
        best = None
        # Shift the raw difference rather than one endpoint: negating the
        # difference is exact in floating point, so the metric is exactly
        # symmetric.
        for s1 in (-1, 0, 1):
            for s2 in (-1, 0, 1):
                shifted = diff - (s1 * r1 + s2 * r2)
                d = np.sqrt(np.einsum("ijk,ijk->ij", shifted, shifted))
                best = d if best is None else np.minimum(best, d)
        return best
    if isinstance(metric, Torus3D):
        ea = embed_torus3d(2 * np.pi * _check_rhombus_domain(metric.basis, a),
                           metric.R, metric.r)
        eb = embed_torus3d(2 * np.pi * _check_rhombus_domain(metric.basis, b),
                           metric.R, metric.r)
        return _euclid(ea, eb)
    raise TypeError(f"unsupported metric {type(metric).__name__}")


def _euclid(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return cdist(a, b)


def latent_distance(metric: LatentMetric, z, z_prime) -> float:
    """Distance between two single latent points under the metric."""
    return float(metric_pairwise(metric, np.atleast_2d(z), np.atleast_2d(z_prime))[0, 0])


# ---------------------------------------------------------------------------
# k-NN graphs and shortest paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KnnGraph:
    n: int
    k: int
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    symmetrized: bool = True


@dataclass(frozen=True)
class GeodesicMatrix:
    lengths: np.ndarray
    source_set: np.ndarray


def _connected_at_k(order: np.ndarray, k: int) -> bool:
    n = order.shape[0]
    parent = np.arange(n)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        ri = find(i)
        for j in order[i, :k]:
            rj = find(j)
            if ri != rj:
                parent[rj] = ri
    return sum(1 for i in range(n) if find(i) == i) == 1


def knn_graph(points: np.ndarray, metric: LatentMetric, k: int | str = 10) -> KnnGraph:
    """Symmetrized k-nearest-neighbour graph under a latent metric.

    Neighbour ties break toward the smaller index; edges are symmetrized by
    union.  ``k='auto'`` picks the smallest k whose symmetrized graph is
    connected (binary search; connectivity is monotone in k).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n = pts.shape[0]
    if n < 2:
        raise ValueError("need at least two points for a k-NN graph")

    auto = isinstance(k, str)
    if auto and k != "auto":
        raise ValueError(f"unknown k selector {k!r}")
    if not auto and not 1 <= int(k) < n:
        raise ValueError("k must satisfy 1 <= k < n")

    dmat = metric_pairwise(metric, pts)
    np.fill_diagonal(dmat, np.inf)
    order = np.argsort(dmat, axis=1, kind="stable")

    if auto:
        lo, hi = 1, n - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if _connected_at_k(order, mid):
                hi = mid
            else:
                lo = mid + 1
        k = lo
    k = int(k)

    nbr = order[:, :k]
    rows = np.repeat(np.arange(n), k)
    cols = nbr.ravel()
    und = np.unique(np.stack([np.minimum(rows, cols), np.maximum(rows, cols)], axis=1), axis=0)
    u, v = und[:, 0], und[:, 1]
    w = dmat[u, v]
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    wts = np.concatenate([w, w])
    perm = np.lexsort((dst, src))
    src, dst, wts = src[perm], dst[perm], wts[perm]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    indptr = np.cumsum(indptr)
    return KnnGraph(n=n, k=k, indptr=indptr,
                    indices=dst.astype(np.int32),
                    weights=wts.astype(float), symmetrized=True)


def shortest_paths(g: KnnGraph, sources: np.ndarray | str = "all",
                   threads: int = 1) -> GeodesicMatrix:
    """Exact shortest-path lengths from each source (label-setting, binary heap)."""
    if np.any(g.weights < 0):
        raise ValueError("negative edge weights are not allowed")
    src = np.arange(g.n, dtype=np.int64) if isinstance(sources, str) else \
        np.asarray(sources, dtype=np.int64)
    if threads <= 1 or len(src) < 4:
        lengths = dijkstra_csr(g.indptr, g.indices, g.weights, src, g.n)
    else:
        chunks = np.array_split(src, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda c: dijkstra_csr(g.indptr, g.indices, g.weights, c, g.n),
                chunks))
        lengths = np.vstack(parts)
    return GeodesicMatrix(lengths=lengths, source_set=src)


def smooth_path_lengths(lengths: GeodesicMatrix | np.ndarray, positions: np.ndarray,
                        k_smooth: int = 10) -> tuple[GeodesicMatrix, int]:
    """Position-space smoothing of path lengths.

    For each source i and target j, the smoothed length is a weighted average
    of the raw lengths to the k_smooth position-space neighbours of j, each
    neighbour weighted by how much closer to the source it is than the
    farthest neighbour.  Neighbourhoods with all-equal source distances fall
    back to uniform weights; the count of such fallbacks is returned.
    """
    raw = lengths.lengths if isinstance(lengths, GeodesicMatrix) else np.asarray(lengths, dtype=float)
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    n = pos.shape[0]
    if raw.shape != (n, n):
        raise ValueError("lengths must be a full n-by-n matrix over the positions")
    if k_smooth < 2:
        raise ValueError("k_smooth must be at least 2")

    pd = pairwise_distances(pos)
    np.fill_diagonal(pd, np.inf)
    hood = np.argsort(pd, axis=1, kind="stable")[:, :k_smooth]  # (n, k)

    out = np.empty_like(raw)
    fallbacks = 0
    for i in range(n):
        dk = pd[i][hood]                       # distance of each neighbour to source i
        dk[hood == i] = 0.0                    # the source itself, masked to inf above
        w = dk.max(axis=1, keepdims=True) - dk
        denom = w.sum(axis=1)
        flat = denom <= 0
        fallbacks += int(np.count_nonzero(flat))
        w[flat] = 1.0
        denom[flat] = k_smooth
        out[i] = (w * raw[i][hood]).sum(axis=1) / denom
    src = lengths.source_set if isinstance(lengths, GeodesicMatrix) else np.arange(n)
    return GeodesicMatrix(lengths=out, source_set=src), fallbacks


# ---------------------------------------------------------------------------
# Isometry regression
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IsometryReport:
    slope: float
    intercept: float
    rho: float
    pairs_used: int
    window: int
    moving_average: np.ndarray  # columns: bin center, mean, std

    def to_json_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "rho": self.rho,
            "pairsUsed": self.pairs_used,
            "window": self.window,
        }


def isometry_regression(lz: GeodesicMatrix | np.ndarray, ly: GeodesicMatrix | np.ndarray,
                        window: int | str = "auto", max_pairs: int = 1_000_000,
                        seed: int = 0) -> IsometryReport:
    """OLS of observed on latent geodesic lengths over unordered pairs.

    Under isometry the scatter is linear with a positive intercept produced
    by the noise floor; rho (Pearson) quantifies the fit.  For n > 2000 a
    seeded uniform subsample of ``max_pairs`` pairs is used.  The moving
    average sorts pairs by latent length and averages fixed-count windows of
    ``ceil(0.01 * pairs)`` under ``window='auto'``.
    """
    mz = lz.lengths if isinstance(lz, GeodesicMatrix) else np.asarray(lz, dtype=float)
    my = ly.lengths if isinstance(ly, GeodesicMatrix) else np.asarray(ly, dtype=float)
    if mz.shape != my.shape or mz.shape[0] != mz.shape[1]:
        raise ValueError("geodesic matrices must be square and same shape")
    n = mz.shape[0]

    iu, ju = np.triu_indices(n, k=1)
    if n > 2000 and iu.size > max_pairs:
        rng = np.random.Generator(np.random.Philox(key=[np.uint64(seed), np.uint64(97)]))
        sel = rng.choice(iu.size, size=max_pairs, replace=False)
        sel.sort()
        iu, ju = iu[sel], ju[sel]
    x = mz[iu, ju]
    y = my[iu, ju]
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("nonfinite path lengths on used pairs (graph disconnected?)")
    if np.ptp(x) == 0:
        raise ValueError("latent path lengths have zero variance")

    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    sxy = float(np.sum((x - xm) * (y - ym)))
    syy = float(np.sum((y - ym) ** 2))
    slope = sxy / sxx
    intercept = ym - slope * xm
    rho = sxy / math.sqrt(sxx * syy) if syy > 0 else 0.0

    m = x.size
    win = max(1, math.ceil(0.01 * m)) if isinstance(window, str) else int(window)
    srt = np.argsort(x, kind="stable")
    xs, ys = x[srt], y[srt]
    nbins = m // win
    rows = []
    for bin_i in range(nbins):
        sl = slice(bin_i * win, (bin_i + 1) * win)
        rows.append((float(xs[sl].mean()), float(ys[sl].mean()), float(ys[sl].std())))
    return IsometryReport(slope=float(slope), intercept=float(intercept),
                          rho=float(rho), pairs_used=int(m), window=win,
                          moving_average=np.array(rows, dtype=float).reshape(-1, 3))
