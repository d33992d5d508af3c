"""Flat key-value experiment configuration."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

from .io import load_json, save_json

EXPERIMENTS = ("toy-circle", "conc-rate", "persistence", "torus-isometry", "external")


@dataclass
class ExperimentConfig:
    """One flat record drives every pipeline; unused keys are ignored."""

    experiment: str = "toy-circle"
    n: int = 1000
    p_list: list[int] = field(default_factory=lambda: [3, 8, 20, 200])
    p: int = 200
    sigma_sq: float = 0.02
    seed: int = 0
    seeds: int = 10
    n_sub: int = 300
    k: int = 0  # 0 means the per-pipeline default
    k_smooth: int = 10
    max_dim: int = 1
    max_edge: float = 0.0  # 0 means the per-pipeline default
    ratio_threshold: float = 0.0  # 0 means the per-pipeline default
    torus_ratio: float = 2.5
    threads: int = 1
    scaling: str = "self-normalized"
    metrics: str = ""  # comma-separated; empty means the pipeline default
    per_pair: bool = False  # also dump per-pair deviation matrices as CSV
    smooth: bool = True
    pca_dims: int = 0
    top_active: int = 0
    r1: list[float] = field(default_factory=lambda: [1.0, 0.0])
    r2: list[float] = field(default_factory=lambda: [0.0, 1.0])
    y_path: str = ""
    xi_path: str = ""
    out_dir: str = "out"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        for name in ("n", "seeds", "n_sub", "k_smooth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive count")
        if self.k < 0:
            raise ValueError("k must be nonnegative (0 = pipeline default)")
        if self.sigma_sq < 0:
            raise ValueError("sigma_sq must be nonnegative")
        if self.experiment == "external" and not (self.y_path and self.xi_path):
            raise ValueError("external experiment needs y_path and xi_path")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(load_json(path))

    def save(self, path) -> None:
        save_json(path, self.to_dict())
