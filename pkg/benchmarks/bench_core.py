"""Benchmark the compiled core against the pure-Python fallback.

Times the two hot kernels (Rips persistence pairs, all-sources Dijkstra) on
representative workloads and prints a small table.  Usage:

    python benchmarks/bench_core.py [--rips-n 140] [--dijkstra-n 600]
"""

import argparse
import math
import time

import numpy as np

from latentcloud._core import _pure

try:
    from latentcloud._core import _speedups
except ImportError:
    _speedups = None

from latentcloud.geodesic import AmbientEuclid, knn_graph
from latentcloud.homology import enclosing_radius, pairwise_distances
from latentcloud.model import (FlatTorusRhombus, LatentSample, ModelSpec,
                               sample_data, sample_latent, torus_fourier_map)


def torus_cloud(n, p=64, seed=0):
    space = FlatTorusRhombus((1.0, 0.0), (0.0, 1.0))
    latent = sample_latent(space, n, "random", seed=seed)
    angles = 2 * np.pi * space.lattice_coords(latent.points)
    spec = ModelSpec(feature_map=torus_fourier_map(p), p=p,
                     sigma=math.sqrt(0.02), seed=seed)
    return sample_data(spec, LatentSample(points=angles, space=space)).values


def best_of(fn, repeats=3):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rips-n", type=int, default=140)
    ap.add_argument("--dijkstra-n", type=int, default=600)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    if _speedups is None:
        print("compiled extension unavailable; showing pure backend only")

    rows = []

    y = torus_cloud(args.rips_n)
    d = pairwise_distances(y / math.sqrt(y.shape[1]))
    max_edge = 0.76 * enclosing_radius(d)
    pure_t, pure_out = best_of(lambda: _pure.rips_pairs(d, 2, max_edge), args.repeats)
    row = [f"rips n={args.rips_n} maxdim=2", pure_t, None]
    if _speedups is not None:
        comp_t, comp_out = best_of(lambda: _speedups.rips_pairs(d, 2, max_edge),
                                   args.repeats)
        assert all(np.array_equal(a, b) for a, b in zip(pure_out, comp_out)), \
            "backends disagree"
        row[2] = comp_t
    rows.append(row)

    pts = torus_cloud(args.dijkstra_n, p=16, seed=1)
    g = knn_graph(pts, AmbientEuclid(), k=10)
    src = np.arange(g.n, dtype=np.int64)
    pure_t, pure_out = best_of(
        lambda: _pure.dijkstra_csr(g.indptr, g.indices, g.weights, src, g.n),
        args.repeats)
    row = [f"dijkstra n={args.dijkstra_n} all sources", pure_t, None]
    if _speedups is not None:
        comp_t, comp_out = best_of(
            lambda: _speedups.dijkstra_csr(g.indptr, g.indices, g.weights, src, g.n),
            args.repeats)
        assert np.array_equal(pure_out, comp_out), "backends disagree"
        row[2] = comp_t
    rows.append(row)

    print(f"{'workload':<36} {'pure':>10} {'compiled':>10} {'speedup':>9}")
    for name, pure_t, comp_t in rows:
        if comp_t is None:
            print(f"{name:<36} {pure_t:>9.3f}s {'-':>10} {'-':>9}")
        else:
            print(f"{name:<36} {pure_t:>9.3f}s {comp_t:>9.3f}s {pure_t / comp_t:>8.1f}x")


if __name__ == "__main__":
    main()
