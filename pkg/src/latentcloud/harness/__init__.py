from .config import ExperimentConfig
from .io import load_json, load_matrix, save_json, save_matrix, write_manifest
from .pipelines import (ExperimentReport, run_concentration_rate, run_experiment,
                        run_external, run_persistence_consistency,
                        run_torus_isometry, run_toy_circle)

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "load_json",
    "load_matrix",
    "save_json",
    "save_matrix",
    "write_manifest",
    "run_experiment",
    "run_toy_circle",
    "run_concentration_rate",
    "run_persistence_consistency",
    "run_torus_isometry",
    "run_external",
]
