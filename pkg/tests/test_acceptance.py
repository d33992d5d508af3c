"""Acceptance criteria, one test per criterion, each printing a verdict line.

Run with ``pytest tests/test_acceptance.py -s`` to see the verdict lines as
they complete.  Every tolerance is pinned here, not tuned at runtime.
"""

import math
import time

import numpy as np
import pytest

from latentcloud.concentration import max_gram_deviation, rate_study
from latentcloud.geodesic import (AmbientEuclid, KnnGraph, RhombusEuclid,
                                  RhombusTeleport, Torus3D, isometry_regression,
                                  knn_graph, latent_distance, metric_pairwise,
                                  shortest_paths)
from latentcloud.harness.config import ExperimentConfig
from latentcloud.harness.io import load_json
from latentcloud.harness.pipelines import (run_concentration_rate, run_external,
                                           run_persistence_consistency,
                                           run_torus_isometry, run_toy_circle)
from latentcloud.homology import (bottleneck_distance, pairwise_distances,
                                  rips_persistence)
from latentcloud.model import (Circle, FlatTorusRhombus, LatentSample,
                               ModelSpec, expected_gram, sample_data,
                               sample_latent, torus_fourier_map,
                               toy_circle_map)

from oracles import brute_bottleneck, floyd_warshall, naive_rips_pairs
from test_harness import _write_external_fixture


def _verdict(num, name, ok, detail=""):
    print(f"ACCEPTANCE {num} ({name}): {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, f"criterion {num} ({name}) failed: {detail}"


def test_criterion_1_ghw_rate():
    t0 = time.perf_counter()

    def iid(n, p, s):
        rng = np.random.Generator(np.random.Philox(
            seed=np.random.SeedSequence(2024, spawn_key=(n, p, s))))
        return rng.standard_normal((n, p)), p * np.eye(n), 0.0

    study = rate_study(iid, [(100, p) for p in (64, 128, 256, 512, 1024)], seeds=10)
    elapsed = time.perf_counter() - t0
    ok = 0.85 <= study.fitted_slope <= 1.15 and elapsed < 60
    _verdict(1, "concentration rate", ok,
             f"slope={study.fitted_slope:.3f} in [0.85, 1.15], {elapsed:.1f}s < 60s")


def test_criterion_2_emergence():
    t0 = time.perf_counter()
    latent = sample_latent(Circle(1.0), 1000, "grid")
    sigma = math.sqrt(0.02)
    wins = 0
    energies = []
    for s in range(20):
        devs = {}
        for p in (3, 200):
            spec = ModelSpec(feature_map=toy_circle_map(p), p=p, sigma=sigma, seed=s)
            y = sample_data(spec, latent)
            rep = max_gram_deviation(y, expected_gram(spec, latent), sigma=sigma,
                                     normalization="by-p")
            devs[p] = rep.max_abs_deviation
            if p == 200:
                svals = np.linalg.svd(y.values, compute_uv=False)
                energies.append((svals[:3] ** 2).sum() / (svals**2).sum())
        wins += devs[200] < devs[3]
    elapsed = time.perf_counter() - t0
    ok = wins == 20 and min(energies) >= 0.90 and elapsed < 30
    _verdict(2, "emergence", ok,
             f"deviation drop {wins}/20 seeds, min SVD energy "
             f"{min(energies):.3f} >= 0.90, {elapsed:.1f}s < 30s")


def test_criterion_3_homology_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    rips_ok = 0
    for _ in range(50):
        n = int(rng.integers(2, 9))
        d = pairwise_distances(rng.standard_normal((n, 3)))
        max_edge = float(d.max()) * (0.3 + 0.7 * rng.random())
        got = sorted(rips_persistence(d, max_dim=2, max_edge=max_edge).pairs)
        rips_ok += got == naive_rips_pairs(d, 2, max_edge)

    bottleneck_ok = 0
    for _ in range(50):
        na, nb = int(rng.integers(0, 6)), int(rng.integers(0, 6))
        a = np.sort(rng.uniform(0, 2, (na, 2)), axis=1)
        b = np.sort(rng.uniform(0, 2, (nb, 2)), axis=1)
        got = bottleneck_distance(a, b)
        bottleneck_ok += abs(got - brute_bottleneck(a, b)) <= 1e-12
    elapsed = time.perf_counter() - t0
    ok = rips_ok == 50 and bottleneck_ok == 50 and elapsed < 30
    _verdict(3, "homology oracle", ok,
             f"rips {rips_ok}/50 exact, bottleneck {bottleneck_ok}/50 exact, "
             f"{elapsed:.1f}s < 30s")


def test_criterion_4_topology_recovery(tmp_path):
    t0 = time.perf_counter()
    circle_hits = 0
    for s in range(10):
        cfg = ExperimentConfig(experiment="toy-circle", n=1000, p_list=[200],
                               sigma_sq=0.02, n_sub=300, seed=s,
                               out_dir=str(tmp_path / f"c{s}"))
        rep = run_toy_circle(cfg)
        circle_hits += rep.stages["p200"]["betti"] == [1, 1]

    torus_hits = 0
    for s in range(10):
        cfg = ExperimentConfig(experiment="torus-isometry", n=500, p=200,
                               sigma_sq=0.02, n_sub=300, seed=s,
                               metrics="rhombus-teleport",
                               out_dir=str(tmp_path / f"t{s}"))
        rep = run_torus_isometry(cfg)
        torus_hits += rep.stages["betti"] == [1, 2, 1]
    elapsed = time.perf_counter() - t0
    ok = circle_hits >= 9 and torus_hits >= 9 and elapsed < 300
    _verdict(4, "topology recovery", ok,
             f"circle (1,1) {circle_hits}/10, torus (1,2,1) {torus_hits}/10, "
             f"{elapsed:.0f}s < 300s")


def test_criterion_5_consistency_chain(tmp_path):
    cfg = ExperimentConfig(experiment="persistence", n=200,
                           p_list=[25, 50, 100, 200, 400], sigma_sq=0.0,
                           seeds=10, seed=7, out_dir=str(tmp_path / "chain"))
    rep = run_persistence_consistency(cfg)
    cells = load_json(tmp_path / "chain" / "consistency_cells.json")["cells"]
    chain_all = all(
        cell[f"bottleneckH{dim}"] <= 2 * (cell["hausdorff"] + cell["ghUpperBound"]) + 1e-9
        for cell in cells for dim in (0, 1))
    med_lo = rep.stages["p25"]["medianBottleneckH1"]
    med_hi = rep.stages["p400"]["medianBottleneckH1"]
    ok = chain_all and rep.checks["bound_chain_holds"] and med_hi < med_lo
    _verdict(5, "consistency chain", ok,
             f"chain holds on {len(cells)}/{len(cells)} runs, median d_b(H1) "
             f"{med_hi:.4f}@p400 < {med_lo:.4f}@p25")


def test_criterion_6_isometry_ordering():
    t0 = time.perf_counter()
    space = FlatTorusRhombus((1.0, 0.0), (0.0, 1.0))
    fm = torus_fourier_map(200)
    sigma = math.sqrt(0.02)
    k = 14

    tel_high = euclid_order = torus3d_order = 0
    intercept_positive = 0
    n_seeds_order = 10
    for s in range(20):
        latent = sample_latent(space, 500, "random", seed=s)
        angles = 2 * np.pi * space.lattice_coords(latent.points)
        spec = ModelSpec(feature_map=fm, p=200, sigma=sigma, seed=s)
        y = sample_data(spec, LatentSample(points=angles, space=space))
        ly = shortest_paths(knn_graph(y.values, AmbientEuclid(), k=k))
        lz_tel = shortest_paths(knn_graph(latent.points, RhombusTeleport(), k=k))
        reg_tel = isometry_regression(lz_tel, ly)
        intercept_positive += reg_tel.intercept > 0
        if s < n_seeds_order:
            lz_euc = shortest_paths(knn_graph(latent.points, RhombusEuclid(), k=k))
            lz_t3 = shortest_paths(knn_graph(
                latent.points, Torus3D(R=2.5, r=1.0), k=k))
            rho_euc = isometry_regression(lz_euc, ly).rho
            rho_t3 = isometry_regression(lz_t3, ly).rho
            tel_high += reg_tel.rho > 0.99
            euclid_order += reg_tel.rho > rho_euc
            torus3d_order += reg_tel.rho > rho_t3
    elapsed = time.perf_counter() - t0
    ok = (tel_high >= 9 and euclid_order >= 9 and torus3d_order >= 9
          and intercept_positive >= 15 and elapsed < 300)
    _verdict(6, "isometry ordering", ok,
             f"rho(tel)>0.99 {tel_high}/10, tel>euclid {euclid_order}/10, "
             f"tel>torus3d {torus3d_order}/10, intercept>0 "
             f"{intercept_positive}/20 (sign test), {elapsed:.0f}s < 300s")


def test_criterion_7_metric_axioms():
    unit = RhombusTeleport((1.0, 0.0), (0.0, 1.0))
    rng = np.random.default_rng(123)
    pts = rng.uniform(0, 1, (3, 10_000, 2))
    dxy = np.array([metric_pairwise(unit, a[None], b[None])[0, 0]
                    for a, b in zip(pts[0], pts[1])])
    dyx = np.array([metric_pairwise(unit, b[None], a[None])[0, 0]
                    for a, b in zip(pts[0], pts[1])])
    sym_exact = bool(np.all(dxy == dyx))
    dxz = np.array([metric_pairwise(unit, a[None], c[None])[0, 0]
                    for a, c in zip(pts[0], pts[2])])
    dyz = np.array([metric_pairwise(unit, b[None], c[None])[0, 0]
                    for b, c in zip(pts[1], pts[2])])
    triangle_ok = bool(np.all(dxz <= dxy + dyz + 1e-9))
    twin_zero = latent_distance(unit, (0.0, 0.25), (1.0, 0.25)) <= 1e-12

    dijkstra_exact = 0
    for trial in range(20):
        trng = np.random.default_rng(1000 + trial)
        n = 50
        adj = [[] for _ in range(n)]
        for u in range(n):
            for v in trng.choice(n, 4, replace=False):
                if u != v:
                    w = float(trng.integers(1, 100))
                    adj[u].append((int(v), w))
                    adj[int(v)].append((u, w))
        indptr = np.zeros(n + 1, dtype=np.int64)
        indices, weights = [], []
        for u in range(n):
            indptr[u + 1] = indptr[u] + len(adj[u])
            for v, w in sorted(adj[u]):
                indices.append(v)
                weights.append(w)
        g = KnnGraph(n=n, k=0, indptr=indptr,
                     indices=np.array(indices, dtype=np.int32),
                     weights=np.array(weights, dtype=float))
        got = shortest_paths(g).lengths
        want = floyd_warshall(g.indptr, g.indices, g.weights, n)
        dijkstra_exact += bool(np.array_equal(got, want))

    ok = sym_exact and triangle_ok and twin_zero and dijkstra_exact == 20
    _verdict(7, "metric axioms", ok,
             f"symmetry exact={sym_exact}, triangle<=1e-9 over 10^4 triples="
             f"{triangle_ok}, twin zero={twin_zero}, dijkstra==FW {dijkstra_exact}/20")


def test_criterion_8_determinism(tmp_path):
    runs = {
        "toy-circle": dict(experiment="toy-circle", n=150, p_list=[3, 16], n_sub=60),
        "conc-rate": dict(experiment="conc-rate", n=40, p_list=[8, 16, 32, 64],
                          seeds=3),
        "persistence": dict(experiment="persistence", n=50, p_list=[8, 32],
                            seeds=3),
        "torus-isometry": dict(experiment="torus-isometry", n=310, p=32,
                               n_sub=100),
    }
    y_path, xi_path = _write_external_fixture(tmp_path, n=320)
    runs["external"] = dict(experiment="external", y_path=str(y_path),
                            xi_path=str(xi_path), n_sub=80, max_dim=1)
    runners = {"toy-circle": run_toy_circle, "conc-rate": run_concentration_rate,
               "persistence": run_persistence_consistency,
               "torus-isometry": run_torus_isometry, "external": run_external}

    mismatches = []
    for name, kw in runs.items():
        manifests = []
        for attempt, threads in enumerate((1, 3)):
            out = tmp_path / f"{name}-{attempt}"
            cfg = ExperimentConfig(seed=5, threads=threads, out_dir=str(out), **kw)
            runners[name](cfg)
            manifests.append((out / "manifest.json").read_text())
        if manifests[0] != manifests[1]:
            mismatches.append(name)
    ok = not mismatches
    _verdict(8, "determinism", ok,
             f"5/5 pipelines byte-identical across reruns and thread counts"
             if ok else f"mismatch in {mismatches}")
