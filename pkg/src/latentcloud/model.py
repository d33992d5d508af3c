"""Latent spaces, finite-rank feature maps, and the random function sampler.

Data are generated as ``Y_i = Sigma^{1/2}(z_i) X(z_i) + mu(z_i) + sigma E_i``
where the random functions are built from a finite-rank expansion
``X_j(z) = sum_k g_{jk} phi_k(z) / sqrt(p)`` with i.i.d. unit-variance
coefficients ``g_{jk}``, so that ``E[Y_nf(z) . Y_nf(z')]`` reproduces the
feature-map kernel exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Circle",
    "Interval",
    "Square",
    "FlatTorusRhombus",
    "EmbeddedTorus3D",
    "CustomPointSet",
    "LatentSample",
    "FeatureMap",
    "toy_circle_map",
    "torus_fourier_map",
    "custom_map",
    "IdentityScaled",
    "DiagonalSpectrum",
    "ModelSpec",
    "DataMatrix",
    "sample_latent",
    "evaluate_kernel",
    "sample_data",
    "expected_gram",
]


# ---------------------------------------------------------------------------
# Latent spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Circle:
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("circle radius must be positive")


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("interval requires b > a")


@dataclass(frozen=True)
class Square:
    side: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.side <= 0:
            raise ValueError("square side must be positive")


@dataclass(frozen=True)
class FlatTorusRhombus:
    """Rhombus spanned by two independent lattice vectors, edges identified."""

    r1: tuple[float, float] = (1.0, 0.0)
    r2: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if abs(_det2(self.r1, self.r2)) < 1e-12:
            raise ValueError("rhombus vectors r1, r2 must be linearly independent")

    @property
    def basis(self) -> np.ndarray:
        return np.column_stack([self.r1, self.r2]).astype(float)

    def lattice_coords(self, points: np.ndarray) -> np.ndarray:
        """Map plane points to (a, b) coordinates in the r1/r2 basis."""
        return np.linalg.solve(self.basis, np.atleast_2d(points).T).T


@dataclass(frozen=True)
class EmbeddedTorus3D:
    R: float
    r: float

    def __post_init__(self):
        if not self.R > self.r > 0:
            raise ValueError("torus radii must satisfy R > r > 0")


@dataclass(frozen=True)
class CustomPointSet:
    points: tuple = ()


LatentSpace = Circle | Interval | Square | FlatTorusRhombus | EmbeddedTorus3D | CustomPointSet


def _det2(u, v) -> float:
    return u[0] * v[1] - u[1] * v[0]


@dataclass(frozen=True)
class LatentSample:
    """Points sampled from a latent space, one row per sample."""

    points: np.ndarray
    space: LatentSpace

    @property
    def n(self) -> int:
        return self.points.shape[0]


def sample_latent(space: LatentSpace, n: int, scheme: str = "grid",
                  seed: int = 0) -> LatentSample:
    """Draw ``n`` latent points, either on a uniform grid or uniformly at random.

    Grid sampling is deterministic and ignores ``seed``; random sampling is
    reproducible given ``seed``.  On two-dimensional spaces the grid uses a
    ``floor(sqrt(n))`` by ``floor(sqrt(n))`` lattice, dropping the remainder.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if scheme not in ("grid", "random"):
        raise ValueError(f"unknown sampling scheme {scheme!r}")
    rng = np.random.Generator(np.random.Philox(key=[np.uint64(seed), np.uint64(0)]))

    if isinstance(space, Circle):
        if scheme == "grid":
            theta = 2.0 * np.pi * np.arange(n) / n
        else:
            theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
        pts = space.radius * np.column_stack([np.cos(theta), np.sin(theta)])
    elif isinstance(space, Interval):
        if scheme == "grid":
            pts = np.linspace(space.a, space.b, n)[:, None]
        else:
            pts = rng.uniform(space.a, space.b, size=(n, 1))
    elif isinstance(space, Square):
        cx, cy = space.center
        lo = np.array([cx, cy]) - space.side / 2.0
        if scheme == "grid":
            m = int(math.isqrt(n))
            u = (np.arange(m) + 0.5) / m
            A, B = np.meshgrid(u, u, indexing="ij")
            ab = np.column_stack([A.ravel(), B.ravel()])
        else:
            ab = rng.uniform(0.0, 1.0, size=(n, 2))
        pts = lo + space.side * ab
    elif isinstance(space, FlatTorusRhombus):
        if scheme == "grid":
            m = int(math.isqrt(n))
            u = np.arange(m) / m
            A, B = np.meshgrid(u, u, indexing="ij")
            ab = np.column_stack([A.ravel(), B.ravel()])
        else:
            ab = rng.uniform(0.0, 1.0, size=(n, 2))
        pts = ab @ space.basis.T
    elif isinstance(space, EmbeddedTorus3D):
        if scheme == "grid":
            m = int(math.isqrt(n))
            u = 2.0 * np.pi * np.arange(m) / m
            T1, T2 = np.meshgrid(u, u, indexing="ij")
            ang = np.column_stack([T1.ravel(), T2.ravel()])
        else:
            ang = rng.uniform(0.0, 2.0 * np.pi, size=(n, 2))
        pts = embed_torus3d(ang, space.R, space.r)
    else:
        raise ValueError(f"cannot sample scheme {scheme!r} on {type(space).__name__}")
    return LatentSample(points=np.ascontiguousarray(pts, dtype=float), space=space)


def embed_torus3d(angles: np.ndarray, R: float, r: float) -> np.ndarray:
    """Embed angle pairs (theta1, theta2) as points of a torus in R^3."""
    t1, t2 = angles[:, 0], angles[:, 1]
    ring = R + r * np.cos(t2)
    return np.column_stack([ring * np.cos(t1), ring * np.sin(t1), r * np.sin(t2)])


# ---------------------------------------------------------------------------
# Feature maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureMap:
    """Finite-rank feature map z -> phi(z) in R^rank.

    ``evaluate`` maps an (n, d) array of latent points to the (n, rank)
    matrix of feature values; the induced kernel is phi(z) . phi(z').
    """

    rank: int
    p: int
    evaluate: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    name: str = "custom"

    def feature_matrix(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.asarray(self.evaluate(pts), dtype=float)
        if out.shape != (pts.shape[0], self.rank):
            raise ValueError(
                f"feature map returned shape {out.shape}, expected {(pts.shape[0], self.rank)}"
            )
        return out


def toy_circle_map(p: int) -> FeatureMap:
    """Rank-3 map on the unit circle: sqrt(p) [z1, (2/pi) sin(pi z2/2), (2/pi) cos(pi z2/2)]."""
    if p < 3:
        raise ValueError("toy circle map needs p >= 3")
    s = math.sqrt(p)

    def ev(z):
        return s * np.column_stack([
            z[:, 0],
            (2.0 / np.pi) * np.sin(np.pi * z[:, 1] / 2.0),
            (2.0 / np.pi) * np.cos(np.pi * z[:, 1] / 2.0),
        ])

    return FeatureMap(rank=3, p=p, evaluate=ev, name="toy-circle")


def torus_fourier_map(p: int) -> FeatureMap:
    """Rank-4 map on angle pairs: sqrt(p/2) (cos t1, sin t1, cos t2, sin t2).

    The kernel is (p/2)(cos(t1-t1') + cos(t2-t2')), so phi(z).phi(z)/p = 1
    and the induced embedding is a product of two circles, flat and isometric
    (up to scale) to the square torus of its angle coordinates.
    """
    if p < 4:
        raise ValueError("torus Fourier map needs p >= 4")
    s = math.sqrt(p / 2.0)

    def ev(z):
        return s * np.column_stack([
            np.cos(z[:, 0]), np.sin(z[:, 0]), np.cos(z[:, 1]), np.sin(z[:, 1]),
        ])

    return FeatureMap(rank=4, p=p, evaluate=ev, name="torus-fourier")


def custom_map(components: Sequence[Callable[[np.ndarray], np.ndarray]],
               p: int, weights: Sequence[float] | None = None,
               name: str = "custom") -> FeatureMap:
    """Assemble a feature map from scalar component functions and weights."""
    r = len(components)
    if p < r:
        raise ValueError(f"ambient dimension p={p} below feature map rank {r}")
    w = np.ones(r) if weights is None else np.asarray(weights, dtype=float)

    def ev(z):
        return np.column_stack([w[k] * np.asarray(components[k](z), dtype=float)
                                for k in range(r)])

    return FeatureMap(rank=r, p=p, evaluate=ev, name=name)


def make_feature_map(kind: str, p: int, **kwargs) -> FeatureMap:
    """Build one of the named feature maps ('toy-circle', 'torus-fourier', 'custom')."""
    if kind == "toy-circle":
        return toy_circle_map(p)
    if kind == "torus-fourier":
        return torus_fourier_map(p)
    if kind == "custom":
        return custom_map(p=p, **kwargs)
    raise ValueError(f"unknown feature map kind {kind!r}")


def evaluate_kernel(fm: FeatureMap, z, z_prime) -> float:
    """Kernel value phi(z) . phi(z') for single latent points."""
    a = fm.feature_matrix(np.atleast_2d(z))
    b = fm.feature_matrix(np.atleast_2d(z_prime))
    return float(a[0] @ b[0])


# ---------------------------------------------------------------------------
# Model specification and sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityScaled:
    c: float = 1.0

    def __post_init__(self):
        if self.c < 0:
            raise ValueError("covariance scale must be nonnegative")


@dataclass(frozen=True)
class DiagonalSpectrum:
    values: tuple

    def __post_init__(self):
        if any(v < 0 for v in self.values):
            raise ValueError("spectrum entries must be nonnegative")


CovarianceRule = IdentityScaled | DiagonalSpectrum


@dataclass(frozen=True)
class ModelSpec:
    """Full generative description of one synthetic data set."""

    feature_map: FeatureMap
    p: int
    sigma: float = 0.0
    cov_rule: CovarianceRule = IdentityScaled(1.0)
    mu_rule: Callable[[np.ndarray], np.ndarray] | None = None
    noise_family: str = "gaussian"
    coef_family: str = "gaussian"
    sub_gaussian_bound: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.p < self.feature_map.rank:
            raise ValueError("p must be at least the feature map rank")
        if self.noise_family not in ("gaussian", "rademacher"):
            raise ValueError(f"unknown noise family {self.noise_family!r}")
        if self.coef_family not in ("gaussian", "rademacher"):
            raise ValueError(f"unknown coefficient family {self.coef_family!r}")
        if isinstance(self.cov_rule, DiagonalSpectrum) and len(self.cov_rule.values) != self.p:
            raise ValueError("diagonal spectrum length must equal p")

    def covariance_diag(self) -> np.ndarray:
        if isinstance(self.cov_rule, IdentityScaled):
            return np.full(self.p, self.cov_rule.c)
        return np.asarray(self.cov_rule.values, dtype=float)


@dataclass(frozen=True)
class DataMatrix:
    """An n-by-p matrix of observations, rows are samples."""

    values: np.ndarray
    row_meta: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def _draw(rng: np.random.Generator, family: str, shape) -> np.ndarray:
    if family == "gaussian":
        return rng.standard_normal(shape)
    return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0


def _stream(seed: int, stream: int) -> np.random.Generator:
    # Counter-based keyed streams: rows can be generated in parallel with
    # results independent of scheduling.
    return np.random.Generator(np.random.Philox(key=[np.uint64(seed) & np.uint64(2**64 - 1),
                                                     np.uint64(stream)]))


def sample_data(spec: ModelSpec, latent: LatentSample,
                strict_unit_variance: bool = False) -> DataMatrix:
    """Generate data from the random function model at the given latent points.

    The noise-free part is ``Phi G^T / sqrt(p)`` column-scaled by the
    covariance square root, with the coefficient matrix ``G`` drawn once per
    data set (the random functions are shared across samples) and noise rows
    drawn from per-row counter-based streams.

    With ``strict_unit_variance`` the per-feature variance condition
    ``phi(z).phi(z)/p == 1`` is enforced at the sampled points.
    """
    n = latent.n
    p, r = spec.p, spec.feature_map.rank
    if n == 0:
        return DataMatrix(values=np.zeros((0, p)))

    phi = spec.feature_map.feature_matrix(latent.points)  # (n, r)
    if strict_unit_variance:
        diag = np.einsum("ij,ij->i", phi, phi) / p
        bad = np.where(np.abs(diag - 1.0) > 1e-9)[0]
        if bad.size:
            raise ValueError(
                f"feature map violates unit variance at latent row {bad[0]}: "
                f"kernel(z,z)/p = {diag[bad[0]]!r}"
            )

    coef_rng = _stream(spec.seed, 0)
    g = _draw(coef_rng, spec.coef_family, (p, r))
    y = (phi @ g.T) / math.sqrt(p)
    y *= np.sqrt(spec.covariance_diag())[None, :]

    if spec.mu_rule is not None:
        mu = np.asarray(spec.mu_rule(latent.points), dtype=float)
        if mu.shape != (n, p):
            raise ValueError(f"mu rule returned shape {mu.shape}, expected {(n, p)}")
        y += mu

    if spec.sigma > 0:
        noise = np.empty((n, p))
        for i in range(n):
            noise[i] = _draw(_stream(spec.seed, i + 1), spec.noise_family, p)
        y += spec.sigma * noise

    return DataMatrix(values=y, row_meta=np.arange(n))


def expected_gram(spec: ModelSpec, latent: LatentSample) -> np.ndarray:
    """E[Y_nf(z_i) . Y_nf(z_j)] under the spec: the Mercer kernel matrix.

    Column scaling by a covariance spectrum multiplies the feature-map kernel
    by tr(Sigma)/p; a mean function adds its outer products.
    """
    phi = spec.feature_map.feature_matrix(latent.points)
    k = phi @ phi.T
    k *= spec.covariance_diag().sum() / spec.p
    if spec.mu_rule is not None:
        mu = np.asarray(spec.mu_rule(latent.points), dtype=float)
        k += mu @ mu.T
    return k
