"""Vietoris-Rips persistence, diagram distances, and point-cloud bounds.

Diagrams are computed from a distance matrix only, so any of the supported
scalings (raw, 1/sqrt(p), self-normalized) plug in uniformly.  The
bottleneck distance is exact: a binary search over the finite set of
candidate values with a bipartite matching feasibility test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from ._core import RipsBudgetError, rips_pairs
from .model import DataMatrix

__all__ = [
    "DistanceMatrix",
    "PersistenceDiagram",
    "BettiEstimate",
    "RipsBudgetError",
    "distance_matrix",
    "pairwise_distances",
    "enclosing_radius",
    "rips_persistence",
    "betti_estimate",
    "bottleneck_distance",
    "hausdorff_distance",
    "gh_upper_bound",
]


@dataclass(frozen=True)
class DistanceMatrix:
    d: np.ndarray
    scaling: str = "raw"

    @property
    def n(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (dimension, birth, death) features; death may be inf."""

    pairs: list[tuple[int, float, float]]
    max_dim: int
    max_edge: float

    def in_dim(self, dim: int) -> np.ndarray:
        sel = [(b, d) for q, b, d in self.pairs if q == dim]
        return np.array(sel, dtype=float).reshape(-1, 2)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("dim,birth,death\n")
            for q, b, d in self.pairs:
                death = "inf" if math.isinf(d) else "%.17g" % d
                fh.write(f"{q},{'%.17g' % b},{death}\n")

    @classmethod
    def from_csv(cls, path, max_dim: int = 2, max_edge: float = float("inf")):
        pairs = []
        with open(path) as fh:
            header = fh.readline()
            if header.strip() != "dim,birth,death":
                raise ValueError(f"unexpected diagram header {header.strip()!r}")
            for line in fh:
                q, b, d = line.strip().split(",")
                pairs.append((int(q), float(b), math.inf if d == "inf" else float(d)))
        return cls(pairs=pairs, max_dim=max_dim, max_edge=max_edge)


@dataclass(frozen=True)
class BettiEstimate:
    counts: tuple[int, ...]
    rule: str
    persistence_ratios: list[float] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "counts": list(self.counts),
            "rule": self.rule,
            "persistenceRatios": [float(r) for r in self.persistence_ratios],
        }


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix between rows, exactly symmetric."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    out = cdist(x, x)
    out = (out + out.T) / 2.0
    np.fill_diagonal(out, 0.0)
    return out


def distance_matrix(y: DataMatrix | np.ndarray, scaling: str = "raw") -> DistanceMatrix:
    """Distances between rows under one of the supported scalings.

    ``raw`` uses the rows as given, ``inv-sqrt-p`` divides rows by sqrt(p),
    and ``self-normalized`` projects rows to the unit sphere first.
    """
    v = y.values if isinstance(y, DataMatrix) else np.asarray(y, dtype=float)
    if scaling == "raw":
        pts = v
    elif scaling == "inv-sqrt-p":
        pts = v / math.sqrt(v.shape[1])
    elif scaling == "self-normalized":
        norms = np.linalg.norm(v, axis=1)
        zero = np.where(norms == 0)[0]
        if zero.size:
            raise ValueError(f"zero row {zero[0]} cannot be self-normalized")
        pts = v / norms[:, None]
    else:
        raise ValueError(f"unknown scaling {scaling!r}")
    return DistanceMatrix(d=pairwise_distances(pts), scaling=scaling)


def enclosing_radius(d: np.ndarray) -> float:
    """min over centers of the max distance to any point; beyond this scale
    the Rips complex is a cone and gains no new homology."""
    return float(np.min(np.max(d, axis=1)))


def rips_persistence(dist: DistanceMatrix | np.ndarray, max_dim: int = 1,
                     max_edge: float | None = None,
                     budget: int = 100_000_000) -> PersistenceDiagram:
    """Rips persistence diagram of a distance matrix up to ``max_dim``.

    ``max_edge`` defaults to the enclosing radius.  Zero-persistence pairs
    are dropped; classes alive at ``max_edge`` get death ``inf``.
    """
    d = dist.d if isinstance(dist, DistanceMatrix) else np.asarray(dist, dtype=float)
    n = d.shape[0]
    if n < 1:
        raise ValueError("need at least one point")
    if n > 65535:
        raise ValueError("at most 65535 points (packed simplex keys)")
    if not 0 <= max_dim <= 2:
        raise ValueError("supported homology dimensions are 0..2")
    if max_edge is None:
        max_edge = enclosing_radius(d) if n > 1 else 1.0
    if max_edge <= 0:
        raise ValueError("max_edge must be positive")
    dims, births, deaths = rips_pairs(d, max_dim, float(max_edge), budget)
    pairs = [(int(q), float(b), float(dd)) for q, b, dd in zip(dims, births, deaths)]
    return PersistenceDiagram(pairs=pairs, max_dim=max_dim, max_edge=float(max_edge))


_EPS_GUARD = np.finfo(float).eps


def betti_estimate(dgm: PersistenceDiagram, ratio_threshold: float = 3.0) -> BettiEstimate:
    """Read Betti numbers off a diagram via a persistence-gap ratio rule.

    Per dimension, finite persistences are sorted descending; the count is
    the smallest k >= 1 with ``pers_k >= ratio_threshold * pers_{k+1}``
    among consecutive present bars (0 when no such gap exists, 1 for a
    lone bar).  Infinite-death classes are always counted on top.  The rule
    and the consecutive ratios examined are recorded in the output.
    """
    if ratio_threshold <= 1:
        raise ValueError("ratio threshold must exceed 1")
    counts = []
    ratios: list[float] = []
    for dim in range(dgm.max_dim + 1):
        pts = dgm.in_dim(dim)
        n_inf = int(np.sum(np.isinf(pts[:, 1]))) if pts.size else 0
        finite = pts[np.isfinite(pts[:, 1])]
        pers = np.sort(finite[:, 1] - finite[:, 0])[::-1]
        if len(pers) == 1:
            k = 1
        else:
            k = 0
            for j in range(len(pers) - 1):
                ratios.append(float(pers[j] / max(pers[j + 1], _EPS_GUARD)))
                if pers[j] >= ratio_threshold * pers[j + 1]:
                    k = j + 1
                    break
        counts.append(n_inf + k)
    rule = (f"count = infinite classes + smallest k with "
            f"pers_k >= {ratio_threshold} * pers_(k+1) over consecutive "
            f"finite bars; a lone bar counts")
    return BettiEstimate(counts=tuple(counts), rule=rule, persistence_ratios=ratios)


# ---------------------------------------------------------------------------
# Diagram and cloud distances
# ---------------------------------------------------------------------------

def _bottleneck_feasible(cross: np.ndarray, diag_a: np.ndarray,
                         diag_b: np.ndarray, lam: float) -> bool:
    """Can every point be matched (cross or to the diagonal) at cost <= lam?

    Standard augmented bipartite graph: left = A points plus one diagonal
    copy per B point, right = B points plus one diagonal copy per A point.
    Diagonal copies pair with their own point at that point's projection
    cost, and with each other for free; feasibility = a perfect matching,
    checked as a zero-cost assignment on the forbidden-edge indicator.
    """
    na, nb = len(diag_a), len(diag_b)
    m = na + nb
    forbidden = np.ones((m, m), dtype=np.int8)
    if na and nb:
        forbidden[:na, :nb] = (cross > lam)
    if na:
        idx = np.arange(na)
        forbidden[idx, nb + idx] = (diag_a > lam)
    if nb:
        idx = np.arange(nb)
        forbidden[na + idx, idx] = (diag_b > lam)
    forbidden[na:, nb:] = 0
    rows, cols = linear_sum_assignment(forbidden)
    return int(forbidden[rows, cols].sum()) == 0


def bottleneck_distance(d1: PersistenceDiagram | np.ndarray,
                        d2: PersistenceDiagram | np.ndarray,
                        dim: int = 1) -> float:
    """Exact bottleneck distance between two diagrams restricted to ``dim``.

    Infinite-death classes must match in count (else inf, flagged by the
    sentinel); among finite points the distance is found by binary search
    over the finite set of candidate values with a matching feasibility
    check, so the result is exact rather than iteratively approximated.
    """
    a = d1.in_dim(dim) if isinstance(d1, PersistenceDiagram) else np.asarray(d1, dtype=float).reshape(-1, 2)
    b = d2.in_dim(dim) if isinstance(d2, PersistenceDiagram) else np.asarray(d2, dtype=float).reshape(-1, 2)

    inf_a = a[np.isinf(a[:, 1])]
    inf_b = b[np.isinf(b[:, 1])]
    if len(inf_a) != len(inf_b):
        return math.inf
    best_inf = 0.0
    if len(inf_a):
        births_a = np.sort(inf_a[:, 0])
        births_b = np.sort(inf_b[:, 0])
        best_inf = float(np.max(np.abs(births_a - births_b)))

    a = a[np.isfinite(a[:, 1])]
    b = b[np.isfinite(b[:, 1])]
    if len(a) == 0 and len(b) == 0:
        return best_inf

    diag_a = (a[:, 1] - a[:, 0]) / 2.0
    diag_b = (b[:, 1] - b[:, 0]) / 2.0
    cands = {0.0}
    cands.update(diag_a.tolist())
    cands.update(diag_b.tolist())
    cross = np.zeros((len(a), len(b)))
    if len(a) and len(b):
        cross = np.maximum(np.abs(a[:, None, 0] - b[None, :, 0]),
                           np.abs(a[:, None, 1] - b[None, :, 1]))
        cands.update(cross.ravel().tolist())
    cand = sorted(cands)

    lo, hi = 0, len(cand) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _bottleneck_feasible(cross, diag_a, diag_b, cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(max(best_inf, cand[lo]))


def hausdorff_distance(a: np.ndarray, b: np.ndarray) -> float:
    """max of the two directed nearest-point distances between point clouds."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("point clouds must be nonempty")
    if a.shape[1] != b.shape[1]:
        raise ValueError("point clouds must share a dimension")
    d = cdist(a, b)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def gh_upper_bound(gram_y: np.ndarray, gram_phi: np.ndarray, p: int) -> float:
    """Upper bound on the Gromov-Hausdorff distance of the 1/sqrt(p)-scaled
    clouds: the identity correspondence gives distortion at most
    ``2 sqrt(max_ij |gram_y - gram_phi| / p)``, hence the bound below."""
    gy = np.asarray(gram_y, dtype=float)
    gp = np.asarray(gram_phi, dtype=float)
    if gy.shape != gp.shape:
        raise ValueError(f"gram shapes differ: {gy.shape} vs {gp.shape}")
    return float(math.sqrt(np.max(np.abs(gy - gp)) / p))
