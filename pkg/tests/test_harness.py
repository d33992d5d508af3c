"""Harness: I/O round trips, config, pipelines, CLI, determinism."""

import json
import math

import numpy as np
import pytest

from latentcloud.harness.cli import main as cli_main
from latentcloud.harness.config import ExperimentConfig
from latentcloud.harness.io import load_json, load_matrix, save_json, save_matrix
from latentcloud.harness.pipelines import (run_external,
                                           run_persistence_consistency,
                                           run_torus_isometry, run_toy_circle)
from latentcloud.model import (FlatTorusRhombus, LatentSample, ModelSpec,
                               sample_data, sample_latent, torus_fourier_map)


class TestMatrixIO:
    def test_round_trip_bit_identical(self, tmp_path):
        m = np.random.default_rng(0).standard_normal((10, 5))
        path = tmp_path / "m.csv"
        save_matrix(path, m)
        back = load_matrix(path)
        np.testing.assert_array_equal(back, m)

    def test_round_trip_extreme_values(self, tmp_path):
        m = np.array([[1e-308, 1e308, -1.0 / 3.0, math.pi]])
        path = tmp_path / "m.csv"
        save_matrix(path, m)
        np.testing.assert_array_equal(load_matrix(path), m)

    def test_ragged_rows_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2,3\n4,5\n")
        with pytest.raises(ValueError, match="row 2"):
            load_matrix(path)

    def test_non_numeric_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2\n3,potato\n")
        with pytest.raises(ValueError, match="row 2"):
            load_matrix(path)

    def test_column_count_mismatch(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1,2\n3,4\n")
        with pytest.raises(ValueError, match="expected 3"):
            load_matrix(path, expected_cols=3)

    def test_empty_errors(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("")
        with pytest.raises(ValueError, match="no data"):
            load_matrix(path)

    def test_distance_matrix_lower_triangle_round_trip(self, tmp_path):
        from latentcloud.harness.io import (load_distance_matrix,
                                            save_distance_matrix)
        rng = np.random.default_rng(1)
        pts = rng.standard_normal((8, 3))
        from latentcloud.homology import pairwise_distances
        d = pairwise_distances(pts)
        for lower in (False, True):
            path = tmp_path / f"d{lower}.csv"
            save_distance_matrix(path, d, lower_triangle=lower)
            np.testing.assert_array_equal(
                load_distance_matrix(path, lower_triangle=lower), d)


class TestConfig:
    def test_round_trip(self, tmp_path):
        cfg = ExperimentConfig(experiment="toy-circle", n=50, seed=3)
        path = tmp_path / "cfg.json"
        cfg.save(path)
        assert ExperimentConfig.load(path) == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            ExperimentConfig.from_dict({"experiment": "toy-circle", "bogus": 1})

    def test_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="nope")
        with pytest.raises(ValueError):
            ExperimentConfig(experiment="toy-circle", n=0)
        with pytest.raises(ValueError, match="y_path"):
            ExperimentConfig(experiment="external")


def _small_toy_cfg(out_dir, **kw):
    return ExperimentConfig(experiment="toy-circle", n=200, p_list=[3, 32],
                            n_sub=80, seed=1, out_dir=str(out_dir), **kw)


class TestToyCirclePipeline:
    def test_artifacts_and_stages(self, tmp_path):
        rep = run_toy_circle(_small_toy_cfg(tmp_path / "a"))
        for p in (3, 32):
            assert f"svd_coords_p{p}.csv" in rep.artifacts
            assert f"deviation_p{p}.json" in rep.artifacts
            stage = rep.stages[f"p{p}"]
            assert 0 < stage["svdTop3Energy"] <= 1.0
        assert (tmp_path / "a" / "manifest.json").exists()
        assert rep.stages["p32"]["maxAbsDeviation"] \
            < rep.stages["p3"]["maxAbsDeviation"]

    def test_report_echoes_config(self, tmp_path):
        rep = run_toy_circle(_small_toy_cfg(tmp_path / "b"))
        saved = load_json(tmp_path / "b" / "report.json")
        assert saved["config"]["n"] == 200
        assert saved["seed"] == 1
        assert saved["version"]
        assert saved["backend"]

    def test_rerun_reproduces_artifacts(self, tmp_path):
        run_toy_circle(_small_toy_cfg(tmp_path / "r1"))
        run_toy_circle(_small_toy_cfg(tmp_path / "r2", threads=3))
        m1 = (tmp_path / "r1" / "manifest.json").read_text()
        m2 = (tmp_path / "r2" / "manifest.json").read_text()
        assert m1 == m2
        r1 = load_json(tmp_path / "r1" / "report.json")
        r2 = load_json(tmp_path / "r2" / "report.json")
        r1.pop("wallClock"), r2.pop("wallClock")
        r1["config"].pop("out_dir"), r2["config"].pop("out_dir")
        r1["config"].pop("threads"), r2["config"].pop("threads")
        assert r1 == r2


class TestPersistenceConsistency:
    def test_chain_and_trend_recorded(self, tmp_path):
        cfg = ExperimentConfig(experiment="persistence", n=60, p_list=[16, 128],
                               sigma_sq=0.0, seeds=3, seed=0,
                               out_dir=str(tmp_path / "c"))
        rep = run_persistence_consistency(cfg)
        assert rep.checks["bound_chain_holds"]
        cells = load_json(tmp_path / "c" / "consistency_cells.json")["cells"]
        assert len(cells) == 6
        for cell in cells:
            assert cell["bottleneckH1"] <= 2 * (cell["hausdorff"]
                                                + cell["ghUpperBound"]) + 1e-9

    def test_needs_two_p_values(self, tmp_path):
        cfg = ExperimentConfig(experiment="persistence", n=60, p_list=[16],
                               out_dir=str(tmp_path / "d"))
        with pytest.raises(ValueError, match="two"):
            run_persistence_consistency(cfg)


class TestTorusIsometry:
    def test_small_run(self, tmp_path):
        cfg = ExperimentConfig(experiment="torus-isometry", n=320, p=64,
                               n_sub=150, sigma_sq=0.02, seed=0,
                               out_dir=str(tmp_path / "t"))
        rep = run_torus_isometry(cfg)
        assert "betti" in rep.stages
        assert "isometry_rhombus-teleport" in rep.stages
        rho_tel = rep.stages["isometry_rhombus-teleport"]["rho"]
        rho_euc = rep.stages["isometry_rhombus-euclid"]["rho"]
        assert rho_tel > rho_euc

    def test_n_floor(self, tmp_path):
        cfg = ExperimentConfig(experiment="torus-isometry", n=299,
                               out_dir=str(tmp_path / "t2"))
        with pytest.raises(ValueError, match="300"):
            run_torus_isometry(cfg)


def _write_external_fixture(tmp_path, n=400, p=64, seed=5):
    space = FlatTorusRhombus((1.0, 0.0), (0.0, 1.0))
    latent = sample_latent(space, n, "random", seed=seed)
    angles = 2 * np.pi * space.lattice_coords(latent.points)
    spec = ModelSpec(feature_map=torus_fourier_map(p), p=p,
                     sigma=math.sqrt(0.02), seed=seed)
    y = sample_data(spec, LatentSample(points=angles, space=space))
    y_path = tmp_path / "y.csv"
    xi_path = tmp_path / "xi.csv"
    save_matrix(y_path, y.values)
    save_matrix(xi_path, latent.points)
    return y_path, xi_path


class TestExternalPipeline:
    def test_synthetic_files_round_trip(self, tmp_path):
        y_path, xi_path = _write_external_fixture(tmp_path)
        cfg = ExperimentConfig(experiment="external", y_path=str(y_path),
                               xi_path=str(xi_path), n_sub=120, max_dim=1,
                               seed=2, metrics="open-field,rhombus-teleport",
                               out_dir=str(tmp_path / "ext"))
        rep = run_external(cfg)
        assert "isometry_open-field" in rep.stages
        assert "isometry_rhombus-teleport" in rep.stages
        assert rep.stages["smoothing"]["applied"]
        # teleport metric respects the wrapped structure better
        assert rep.stages["isometry_rhombus-teleport"]["rho"] \
            > rep.stages["isometry_open-field"]["rho"]

    def test_row_mismatch_rejected(self, tmp_path):
        y_path, xi_path = _write_external_fixture(tmp_path, n=50)
        save_matrix(tmp_path / "xi_short.csv",
                    load_matrix(xi_path)[:40])
        cfg = ExperimentConfig(experiment="external", y_path=str(y_path),
                               xi_path=str(tmp_path / "xi_short.csv"),
                               out_dir=str(tmp_path / "e2"))
        with pytest.raises(ValueError, match="mismatch"):
            run_external(cfg)

    def test_top_active_and_pca(self, tmp_path):
        y_path, xi_path = _write_external_fixture(tmp_path, n=300)
        cfg = ExperimentConfig(experiment="external", y_path=str(y_path),
                               xi_path=str(xi_path), n_sub=80, max_dim=1,
                               top_active=250, pca_dims=6, smooth=False,
                               seed=2, out_dir=str(tmp_path / "e3"))
        rep = run_external(cfg)
        assert not rep.stages["smoothing"]["applied"]


class TestCli:
    def test_exit_codes(self, tmp_path, capsys):
        y_path, xi_path = _write_external_fixture(tmp_path, n=320)
        cfg = {"y_path": str(y_path), "xi_path": str(xi_path),
               "n_sub": 100, "max_dim": 1, "experiment": "external",
               "out_dir": str(tmp_path / "cli")}
        cfg_path = tmp_path / "cfg.json"
        save_json(cfg_path, cfg)
        code = cli_main(["external", "--config", str(cfg_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "artifacts written" in out

    def test_bad_config_is_exit_1(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"bogus_key": 1}))
        assert cli_main(["toy-circle", "--config", str(cfg_path)]) == 1

    def test_missing_file_is_exit_1(self, tmp_path):
        cfg = {"y_path": str(tmp_path / "nope.csv"), "xi_path": str(tmp_path / "nope2.csv"),
               "experiment": "external", "out_dir": str(tmp_path / "x")}
        cfg_path = tmp_path / "cfg.json"
        save_json(cfg_path, cfg)
        assert cli_main(["external", "--config", str(cfg_path)]) == 1

    def test_failed_check_is_exit_2(self, tmp_path):
        # p too small for the circle to emerge: Betti check at largest p fails.
        cfg = {"experiment": "toy-circle", "n": 120, "p_list": [3],
               "n_sub": 60, "out_dir": str(tmp_path / "f")}
        cfg_path = tmp_path / "cfg.json"
        save_json(cfg_path, cfg)
        assert cli_main(["toy-circle", "--config", str(cfg_path)]) == 2
