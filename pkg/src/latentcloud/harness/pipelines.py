"""End-to-end experiment pipelines.

Each pipeline writes its artifacts under ``out_dir``, plus ``report.json``
(config echo, per-stage outputs, named checks, wall clock) and
``manifest.json`` (SHA-256 digests of every artifact).  Reruns with the same
config and seed reproduce the artifact bytes exactly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from .._core import BACKEND_NAME
from ..concentration import max_gram_deviation, rate_study
from ..geodesic import (AmbientEuclid, OpenFieldEuclid, RhombusEuclid,
                        RhombusTeleport, Torus3D, isometry_regression,
                        knn_graph, shortest_paths, smooth_path_lengths)
from ..homology import (betti_estimate, bottleneck_distance, distance_matrix,
                        enclosing_radius, gh_upper_bound, hausdorff_distance,
                        rips_persistence)
from ..model import (Circle, FlatTorusRhombus, LatentSample, ModelSpec,
                     expected_gram, sample_data, sample_latent,
                     toy_circle_map, torus_fourier_map)
from .config import ExperimentConfig
from .io import load_matrix, save_json, save_matrix, write_manifest

__all__ = [
    "ExperimentReport",
    "PipelineCheckError",
    "run_toy_circle",
    "run_concentration_rate",
    "run_persistence_consistency",
    "run_torus_isometry",
    "run_external",
    "run_experiment",
]


class PipelineCheckError(AssertionError):
    """A recorded pipeline check failed (maps to CLI exit code 2)."""


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    seed: int
    version: str
    backend: str
    stages: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    wall_clock: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "backend": self.backend,
            "stages": self.stages,
            "checks": self.checks,
            "artifacts": self.artifacts,
            "wallClock": self.wall_clock,
        }


class _Stopwatch:
    def __init__(self, report: ExperimentReport):
        self.report = report
        self.t0 = time.perf_counter()

    def lap(self, name: str) -> None:
        t1 = time.perf_counter()
        self.report.wall_clock[name] = t1 - self.t0
        self.t0 = t1


def _new_report(cfg: ExperimentConfig) -> tuple[ExperimentReport, Path, _Stopwatch]:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rep = ExperimentReport(experiment=cfg.experiment, config=cfg.to_dict(),
                           seed=cfg.seed, version=__version__, backend=BACKEND_NAME)
    return rep, out, _Stopwatch(rep)


def _emit(rep: ExperimentReport, out: Path, name: str, writer) -> None:
    writer(out / name)
    rep.artifacts.append(name)


def _finalize(rep: ExperimentReport, out: Path) -> ExperimentReport:
    missing = [name for name in rep.artifacts if not (out / name).is_file()]
    if missing:
        raise RuntimeError(f"artifacts missing on completion: {missing}")
    save_json(out / "report.json", rep.to_json_dict())
    write_manifest(out)
    return rep


def _subsample(n: int, size: int, seed: int) -> np.ndarray:
    if size >= n:
        return np.arange(n)
    rng = np.random.Generator(np.random.Philox(key=[np.uint64(seed), np.uint64(11)]))
    idx = rng.choice(n, size=size, replace=False)
    idx.sort()
    return idx


def _derived_seed(seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _ratio_threshold(cfg: ExperimentConfig, pipeline_default: float) -> float:
    return cfg.ratio_threshold if cfg.ratio_threshold > 0 else pipeline_default


# ---------------------------------------------------------------------------
# Toy circle: emergence of latent topology as p grows
# ---------------------------------------------------------------------------

def run_toy_circle(cfg: ExperimentConfig) -> ExperimentReport:
    """Sample the circle model for each p; emit SVD coordinates, dot-product
    deviations, and a Rips diagram with Betti estimates on a subsample."""
    if min(cfg.p_list) < 3:
        raise ValueError("toy circle model needs p >= 3")
    rep, out, watch = _new_report(cfg)
    sigma = math.sqrt(cfg.sigma_sq)
    latent = sample_latent(Circle(1.0), cfg.n, "grid")

    for p in cfg.p_list:
        spec = ModelSpec(feature_map=toy_circle_map(p), p=p, sigma=sigma,
                         seed=_derived_seed(cfg.seed, p))
        y = sample_data(spec, latent)

        u, s, _ = np.linalg.svd(y.values, full_matrices=False)
        coords = u[:, :3] * s[:3]
        energy = float((s[:3] ** 2).sum() / (s**2).sum())
        _emit(rep, out, f"svd_coords_p{p}.csv", lambda f, c=coords: save_matrix(f, c))

        dev = max_gram_deviation(y, expected_gram(spec, latent), sigma=sigma,
                                 normalization="by-p", keep_per_pair=cfg.per_pair)
        _emit(rep, out, f"deviation_p{p}.json",
              lambda f, d=dev: save_json(f, d.to_json_dict()))
        if cfg.per_pair:
            _emit(rep, out, f"deviation_pairs_p{p}.csv",
                  lambda f, d=dev: save_matrix(f, d.per_pair))

        idx = _subsample(cfg.n, cfg.n_sub, cfg.seed)
        dm = distance_matrix(y.values[idx], "inv-sqrt-p")
        dgm = rips_persistence(dm, max_dim=1,
                               max_edge=cfg.max_edge if cfg.max_edge > 0 else None)
        betti = betti_estimate(dgm, _ratio_threshold(cfg, 3.0))
        _emit(rep, out, f"diagram_p{p}.csv", dgm.to_csv)
        _emit(rep, out, f"betti_p{p}.json",
              lambda f, b=betti: save_json(f, b.to_json_dict()))

        rep.stages[f"p{p}"] = {
            "maxAbsDeviation": dev.max_abs_deviation,
            "svdTop3Energy": energy,
            "betti": list(betti.counts),
        }
        watch.lap(f"p{p}")

    p_hi = max(cfg.p_list)
    rep.checks["betti_circle_at_largest_p"] = \
        rep.stages[f"p{p_hi}"]["betti"] == [1, 1]
    rep.checks["deviation_decreases_with_p"] = (
        rep.stages[f"p{p_hi}"]["maxAbsDeviation"]
        < rep.stages[f"p{min(cfg.p_list)}"]["maxAbsDeviation"]
    )
    return _finalize(rep, out)


# ---------------------------------------------------------------------------
# Concentration rate studies
# ---------------------------------------------------------------------------

def _iid_gaussian_generator(base_seed: int):
    def gen(n: int, p: int, s: int):
        rng = np.random.Generator(np.random.Philox(
            seed=np.random.SeedSequence(base_seed, spawn_key=(n, p, s))))
        y = rng.standard_normal((n, p))
        return y, p * np.eye(n), 0.0
    return gen


def _toy_circle_generator(base_seed: int, sigma: float):
    def gen(n: int, p: int, s: int):
        latent = sample_latent(Circle(1.0), n, "grid")
        spec = ModelSpec(feature_map=toy_circle_map(p), p=p, sigma=sigma,
                         seed=_derived_seed(base_seed, n, p, s))
        y = sample_data(spec, latent)
        return y.values, expected_gram(spec, latent), sigma
    return gen

def run_concentration_rate(cfg: ExperimentConfig) -> ExperimentReport:
    """Fit the sqrt(log n / p_int) deviation rate for the i.i.d. baseline and
    for the circle model over the configured p grid."""
    if len(cfg.p_list) < 4:
        raise ValueError("rate study needs at least 4 p values")
    rep, out, watch = _new_report(cfg)
    grid = [(cfg.n, p) for p in cfg.p_list]

    iid = rate_study(_iid_gaussian_generator(cfg.seed), grid, cfg.seeds)
    _emit(rep, out, "rate_iid.json", lambda f: save_json(f, iid.to_json_dict()))
    rep.stages["iid"] = iid.to_json_dict()
    watch.lap("iid")

    model = rate_study(_toy_circle_generator(cfg.seed, math.sqrt(cfg.sigma_sq)),
                       grid, cfg.seeds)
    _emit(rep, out, "rate_model.json", lambda f: save_json(f, model.to_json_dict()))
    rep.stages["model"] = model.to_json_dict()
    watch.lap("model")

    rep.checks["iid_slope_near_one"] = 0.85 <= iid.fitted_slope <= 1.15
    return _finalize(rep, out)


# ---------------------------------------------------------------------------
# Persistence-diagram consistency
# ---------------------------------------------------------------------------

def run_persistence_consistency(cfg: ExperimentConfig) -> ExperimentReport:
    """Compare diagrams of the observed and noise-free clouds per p: their
    bottleneck distances must obey the correspondence bound chain."""
    if len(cfg.p_list) < 2:
        raise ValueError("consistency study needs at least two p values")
    rep, out, watch = _new_report(cfg)
    sigma = math.sqrt(cfg.sigma_sq)
    latent = sample_latent(Circle(1.0), cfg.n, "grid")
    chain_ok = True
    cells = []

    for p in cfg.p_list:
        db_h1 = []
        for s in range(cfg.seeds):
            spec = ModelSpec(feature_map=toy_circle_map(p), p=p, sigma=sigma,
                             seed=_derived_seed(cfg.seed, p, s))
            y = sample_data(spec, latent)
            phi = spec.feature_map.feature_matrix(latent.points)
            dgm_y = rips_persistence(distance_matrix(y.values, "inv-sqrt-p"),
                                     max_dim=cfg.max_dim)
            # phi has r columns, so the ambient 1/sqrt(p) scale is explicit.
            dgm_m = rips_persistence(distance_matrix(phi / math.sqrt(p), "raw"),
                                     max_dim=cfg.max_dim)
            ghub = gh_upper_bound(y.values @ y.values.T, phi @ phi.T, p)
            phi_pad = np.pad(phi, ((0, 0), (0, p - phi.shape[1])))
            dh = hausdorff_distance(y.values / math.sqrt(p), phi_pad / math.sqrt(p))
            cell = {"p": p, "seed": s, "ghUpperBound": ghub, "hausdorff": dh}
            for dim in range(cfg.max_dim + 1):
                db = bottleneck_distance(dgm_y, dgm_m, dim)
                cell[f"bottleneckH{dim}"] = db
                if not db <= 2.0 * (dh + ghub) + 1e-9:
                    chain_ok = False
            db_h1.append(cell["bottleneckH1"])
            cells.append(cell)
        rep.stages[f"p{p}"] = {"medianBottleneckH1": float(np.median(db_h1))}
        watch.lap(f"p{p}")

    _emit(rep, out, "consistency_cells.json", lambda f: save_json(f, {"cells": cells}))
    p_lo, p_hi = min(cfg.p_list), max(cfg.p_list)
    rep.checks["bound_chain_holds"] = chain_ok
    rep.checks["bottleneck_h1_improves_with_p"] = (
        rep.stages[f"p{p_hi}"]["medianBottleneckH1"]
        <= rep.stages[f"p{p_lo}"]["medianBottleneckH1"]
    )
    return _finalize(rep, out)


# ---------------------------------------------------------------------------
# Flat-torus isometry
# ---------------------------------------------------------------------------

_TORUS_METRICS = ("rhombus-euclid", "rhombus-teleport", "torus3d")


def _metric_by_name(name: str, cfg: ExperimentConfig):
    r1, r2 = tuple(cfg.r1), tuple(cfg.r2)
    if name == "open-field":
        return OpenFieldEuclid()
    if name == "rhombus-euclid":
        return RhombusEuclid(r1, r2)
    if name == "rhombus-teleport":
        return RhombusTeleport(r1, r2)
    if name == "torus3d":
        return Torus3D(R=cfg.torus_ratio, r=1.0, r1=r1, r2=r2)
    raise ValueError(f"unknown metric {name!r}")


def run_torus_isometry(cfg: ExperimentConfig) -> ExperimentReport:
    """Clifford-torus synthetic: Betti check plus isometry regressions under
    the rhombus, teleport, and embedded-torus latent metrics."""
    if cfg.n < 300:
        raise ValueError("torus isometry experiment needs n >= 300")
    rep, out, watch = _new_report(cfg)
    sigma = math.sqrt(cfg.sigma_sq)

    space = FlatTorusRhombus(tuple(cfg.r1), tuple(cfg.r2))
    latent = sample_latent(space, cfg.n, "random", seed=cfg.seed)
    angles = 2.0 * np.pi * space.lattice_coords(latent.points)
    spec = ModelSpec(feature_map=torus_fourier_map(cfg.p), p=cfg.p, sigma=sigma,
                     seed=_derived_seed(cfg.seed, cfg.p))
    y = sample_data(spec, LatentSample(points=angles, space=space))
    watch.lap("sample")

    idx = _subsample(cfg.n, cfg.n_sub, cfg.seed)
    dm = distance_matrix(y.values[idx], "inv-sqrt-p")
    # 0.8 * enclosing radius sits above the torus H1/H2 death scales with
    # margin while keeping the filtration desk-sized.
    max_edge = cfg.max_edge if cfg.max_edge > 0 else 0.8 * enclosing_radius(dm.d)
    dgm = rips_persistence(dm, max_dim=2, max_edge=max_edge, budget=400_000_000)
    betti = betti_estimate(dgm, _ratio_threshold(cfg, 1.8))
    _emit(rep, out, "diagram.csv", dgm.to_csv)
    _emit(rep, out, "betti.json", lambda f: save_json(f, betti.to_json_dict()))
    rep.stages["betti"] = list(betti.counts)
    watch.lap("homology")

    # Denser graphs than the real-data k=10 default: at n=500 the geodesic
    # discretization error otherwise dominates the fit quality.
    k = cfg.k if cfg.k > 0 else 14
    ly = shortest_paths(knn_graph(y.values, AmbientEuclid(), k=k),
                        threads=cfg.threads)
    watch.lap("observed-geodesics")

    metric_names = [m for m in cfg.metrics.split(",") if m] if cfg.metrics else \
        list(_TORUS_METRICS)
    rhos = {}
    for name in metric_names:
        metric = _metric_by_name(name, cfg)
        lz = shortest_paths(knn_graph(latent.points, metric, k=k),
                            threads=cfg.threads)
        reg = isometry_regression(lz, ly, seed=cfg.seed)
        rhos[name] = reg.rho
        rep.stages[f"isometry_{name}"] = reg.to_json_dict()
        _emit(rep, out, f"isometry_{name}.json",
              lambda f, r=reg: save_json(f, r.to_json_dict()))
        _emit(rep, out, f"moving_avg_{name}.csv",
              lambda f, r=reg: save_matrix(f, r.moving_average,
                                           header=["bin_center", "mean", "std"]))
        watch.lap(f"isometry_{name}")

    rep.checks["betti_torus"] = list(betti.counts) == [1, 2, 1]
    if "rhombus-teleport" in rhos:
        if "rhombus-euclid" in rhos:
            rep.checks["teleport_beats_euclid"] = rhos["rhombus-teleport"] > rhos["rhombus-euclid"]
        if "torus3d" in rhos:
            rep.checks["teleport_beats_torus3d"] = rhos["rhombus-teleport"] > rhos["torus3d"]
    return _finalize(rep, out)


# ---------------------------------------------------------------------------
# External data
# ---------------------------------------------------------------------------

def run_external(cfg: ExperimentConfig) -> ExperimentReport:
    """Run homology and isometry stages on externally supplied (Y, xi) files."""
    rep, out, watch = _new_report(cfg)
    y = load_matrix(cfg.y_path)
    xi = load_matrix(cfg.xi_path, expected_cols=2)
    if y.shape[0] != xi.shape[0]:
        raise ValueError(
            f"row mismatch: Y has {y.shape[0]} rows, xi has {xi.shape[0]}")

    if cfg.top_active > 0 and cfg.top_active < y.shape[0]:
        activity = y.mean(axis=1)
        keep = np.sort(np.argsort(-activity, kind="stable")[:cfg.top_active])
        y, xi = y[keep], xi[keep]
    n = y.shape[0]

    if cfg.scaling == "self-normalized":
        norms = np.linalg.norm(y, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero rows cannot be self-normalized")
        proc = y / norms[:, None]
    elif cfg.scaling == "inv-sqrt-p":
        proc = y / math.sqrt(y.shape[1])
    else:
        proc = y
    if cfg.pca_dims > 0:
        u, s, _ = np.linalg.svd(proc - proc.mean(axis=0), full_matrices=False)
        proc = u[:, :cfg.pca_dims] * s[:cfg.pca_dims]
    watch.lap("preprocess")

    idx = _subsample(n, cfg.n_sub, cfg.seed)
    dm = distance_matrix(proc[idx], "raw")
    if cfg.max_edge > 0:
        max_edge = cfg.max_edge
    elif cfg.max_dim >= 2:
        # The full enclosing radius is intractable with tetrahedra.
        max_edge = 0.8 * enclosing_radius(dm.d)
    else:
        max_edge = None
    dgm = rips_persistence(dm, max_dim=cfg.max_dim, max_edge=max_edge,
                           budget=400_000_000)
    betti = betti_estimate(dgm, _ratio_threshold(cfg, 3.0))
    _emit(rep, out, "diagram.csv", dgm.to_csv)
    _emit(rep, out, "betti.json", lambda f: save_json(f, betti.to_json_dict()))
    rep.stages["betti"] = list(betti.counts)
    watch.lap("homology")

    k = cfg.k if cfg.k > 0 else 10
    iso_idx = _subsample(n, 2000, cfg.seed)
    proc_iso, xi_iso = proc[iso_idx], xi[iso_idx]
    ly = shortest_paths(knn_graph(proc_iso, AmbientEuclid(), k=k),
                        threads=cfg.threads)
    fallbacks = 0
    if cfg.smooth:
        ly, fallbacks = smooth_path_lengths(ly, xi_iso, cfg.k_smooth)
    rep.stages["smoothing"] = {"applied": cfg.smooth, "uniformFallbacks": fallbacks}
    watch.lap("observed-geodesics")

    metric_names = [m for m in cfg.metrics.split(",") if m] if cfg.metrics else \
        ["open-field"]
    basis = np.column_stack([cfg.r1, cfg.r2]).astype(float)
    for name in metric_names:
        metric = _metric_by_name(name, cfg)
        if name.startswith("rhombus") or name == "torus3d":
            ab = np.linalg.solve(basis, xi_iso.T).T % 1.0
            pts = ab @ basis.T
        else:
            pts = xi_iso
        lz = shortest_paths(knn_graph(pts, metric, k=k), threads=cfg.threads)
        reg = isometry_regression(lz, ly, seed=cfg.seed)
        rep.stages[f"isometry_{name}"] = reg.to_json_dict()
        _emit(rep, out, f"isometry_{name}.json",
              lambda f, r=reg: save_json(f, r.to_json_dict()))
        _emit(rep, out, f"moving_avg_{name}.csv",
              lambda f, r=reg: save_matrix(f, r.moving_average,
                                           header=["bin_center", "mean", "std"]))
        watch.lap(f"isometry_{name}")
    return _finalize(rep, out)


_RUNNERS = {
    "toy-circle": run_toy_circle,
    "conc-rate": run_concentration_rate,
    "persistence": run_persistence_consistency,
    "torus-isometry": run_torus_isometry,
    "external": run_external,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    return _RUNNERS[cfg.experiment](cfg)
