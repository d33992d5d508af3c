"""Gram/cosine statistics, tail bounds, and deviation-rate studies.

The central quantity is the maximal deviation of pairwise dot products from
their expected values under the random function model, in one of three
normalizations: by the ambient dimension, by expected norms, or fully
self-normalized (cosine similarity against the noise-corrected target).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import DataMatrix

__all__ = [
    "GramStats",
    "DeviationReport",
    "RateStudy",
    "ambient_intrinsic_dim",
    "gram_stats",
    "ghw_tail_bound",
    "max_gram_deviation",
    "rate_study",
]


@dataclass(frozen=True)
class GramStats:
    gram: np.ndarray
    cosine: np.ndarray
    norms: np.ndarray


@dataclass(frozen=True)
class DeviationReport:
    max_abs_deviation: float
    normalization: str
    sigma_sq_used: float
    per_pair: np.ndarray | None = None

    def to_json_dict(self) -> dict:
        return {
            "maxAbsDeviation": self.max_abs_deviation,
            "normalization": self.normalization,
            "sigmaSqUsed": self.sigma_sq_used,
        }


@dataclass(frozen=True)
class RateStudy:
    grid: list[tuple[int, int, float]]
    medians: list[float]
    fitted_slope: float
    fitted_intercept: float
    seeds: int

    def to_json_dict(self) -> dict:
        return {
            "grid": [[int(n), int(p), float(pi)] for n, p, pi in self.grid],
            "medians": [float(m) for m in self.medians],
            "fittedSlope": self.fitted_slope,
            "fittedIntercept": self.fitted_intercept,
            "seeds": self.seeds,
        }


def ambient_intrinsic_dim(spectrum: Sequence[float]) -> float:
    """tr(Sigma) / ||Sigma|| for a covariance eigenvalue spectrum."""
    s = np.asarray(spectrum, dtype=float)
    if s.size == 0 or np.any(s < 0):
        raise ValueError("spectrum must be nonnegative and nonempty")
    top = s.max()
    if top == 0:
        raise ValueError("spectrum must contain a strictly positive eigenvalue")
    return float(s.sum() / top)


def gram_stats(y: DataMatrix | np.ndarray) -> GramStats:
    """Exact pairwise dot products, cosines, and row norms."""
    v = y.values if isinstance(y, DataMatrix) else np.asarray(y, dtype=float)
    gram = v @ v.T
    gram = (gram + gram.T) / 2.0
    norms = np.sqrt(np.einsum("ij,ij->i", v, v))
    zero = np.where(norms == 0)[0]
    if zero.size:
        raise ValueError(f"zero-norm row {zero[0]}: cosine similarity undefined")
    cosine = gram / np.outer(norms, norms)
    np.fill_diagonal(cosine, 1.0)
    return GramStats(gram=gram, cosine=cosine, norms=norms)


def ghw_tail_bound(frob_norm: float, spec_norm: float, k: float,
                   t: float, c: float = 1.0) -> float:
    """Sub-Gaussian bilinear-form tail bound.

    Returns ``2 exp[-c min(t^2 / (K^4 ||A||_F^2), t / (K^2 ||A||))]``.  The
    absolute constant is not pinned by the theory, so ``c`` is a parameter.
    """
    if frob_norm <= 0 or spec_norm <= 0 or k <= 0 or c <= 0:
        raise ValueError("norms, K and c must be positive")
    if t < 0:
        raise ValueError("t must be nonnegative")
    exponent = min(t * t / (k**4 * frob_norm**2), t / (k * k * spec_norm))
    return 2.0 * math.exp(-c * exponent)


def max_gram_deviation(y: DataMatrix | np.ndarray, target_gram: np.ndarray,
                       sigma: float = 0.0, normalization: str = "by-p",
                       exclude_diagonal: bool = False,
                       keep_per_pair: bool = False) -> DeviationReport:
    """Maximal absolute deviation of observed from target dot products.

    Modes:

    - ``by-p``: ``|Y_i.Y_j/p - T_ij/p - sigma^2 I[i=j]|``.
    - ``by-expected-norms``: same numerator normalized by the expected norms
      ``sqrt(T_ii + p sigma^2) sqrt(T_jj + p sigma^2)``.
    - ``self-normalized``: ``|CosSim(Y_i, Y_j) - CosSim_T(i, j) / gamma_ij|``
      with ``gamma_i = sqrt(T_ii + p sigma^2) / sqrt(T_ii)``, off-diagonal
      pairs only (the diagonal statement is vacuous for cosines).
    """
    v = y.values if isinstance(y, DataMatrix) else np.asarray(y, dtype=float)
    n, p = v.shape
    t = np.asarray(target_gram, dtype=float)
    if t.shape != (n, n):
        raise ValueError(f"target gram shape {t.shape} does not match n={n}")

    if normalization == "by-p":
        gram = v @ v.T
        dev = np.abs(gram / p - t / p - sigma**2 * np.eye(n))
    elif normalization == "by-expected-norms":
        gram = v @ v.T
        enorm = np.sqrt(np.diag(t) + p * sigma**2)
        dev = np.abs(gram - t - p * sigma**2 * np.eye(n)) / np.outer(enorm, enorm)
    elif normalization == "self-normalized":
        phinorm_sq = np.diag(t)
        if np.any(phinorm_sq <= 0):
            raise ValueError("self-normalized mode needs strictly positive phi norms")
        gs = gram_stats(v)
        gamma = np.sqrt(phinorm_sq + p * sigma**2) / np.sqrt(phinorm_sq)
        cos_target = t / np.sqrt(np.outer(phinorm_sq, phinorm_sq))
        dev = np.abs(gs.cosine - cos_target / np.outer(gamma, gamma))
        exclude_diagonal = True
    else:
        raise ValueError(f"unknown normalization {normalization!r}")

    mask = ~np.eye(n, dtype=bool) if exclude_diagonal else np.ones((n, n), dtype=bool)
    max_dev = float(np.max(dev[mask])) if mask.any() else 0.0
    return DeviationReport(
        max_abs_deviation=max_dev,
        normalization=normalization,
        sigma_sq_used=sigma**2,
        per_pair=dev if keep_per_pair else None,
    )


def rate_study(generator: Callable[[int, int, int], tuple[np.ndarray, np.ndarray, float]],
               grid: Sequence[tuple[int, int]], seeds: int,
               p_int_of_cell: Callable[[int, int], float] | None = None,
               normalization: str = "by-p",
               exclude_diagonal: bool = False) -> RateStudy:
    """Median max-deviation over seeds per (n, p) cell, with a log-log rate fit.

    ``generator(n, p, seed)`` returns ``(Y, target_gram, sigma)`` for one
    replicate.  The fit regresses ``log(median deviation)`` on
    ``log(sqrt(log n / p_int))``; a slope near 1 reproduces the
    ``sqrt(log n / p_int)`` concentration rate.
    """
    if len(grid) == 0:
        raise ValueError("grid must be nonempty")
    if seeds < 3:
        raise ValueError("need at least 3 seeds per cell")
    if p_int_of_cell is None:
        p_int_of_cell = lambda n, p: float(p)

    cells: list[tuple[int, int, float]] = []
    medians: list[float] = []
    for n, p in grid:
        devs = []
        for s in range(seeds):
            y, target, sigma = generator(n, p, s)
            rep = max_gram_deviation(y, target, sigma=sigma,
                                     normalization=normalization,
                                     exclude_diagonal=exclude_diagonal)
            devs.append(rep.max_abs_deviation)
        cells.append((n, p, p_int_of_cell(n, p)))
        medians.append(float(np.median(devs)))

    x = np.array([0.5 * (math.log(math.log(n)) - math.log(pi))
                  for n, _, pi in cells])
    if np.ptp(x) < 1e-12:
        raise ValueError("rate fit undefined: grid has a single effective cell")
    ylog = np.log(np.asarray(medians))
    slope, intercept = np.polyfit(x, ylog, 1)
    return RateStudy(grid=cells, medians=medians, fitted_slope=float(slope),
                     fitted_intercept=float(intercept), seeds=seeds)
