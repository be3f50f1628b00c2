"""Experiment configuration and success criteria.

``ExperimentConfig`` mirrors the JSON config file field-for-field; see
``from_dict`` / ``to_dict`` for the schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

Array = np.ndarray

METHODS = ("CBO", "PB", "wPB")
GATE_MODES = ("sharp", "smoothed")
INIT_KINDS = ("uniform_box", "explicit", "perturbed")
SUCCESS_KINDS = ("benchmark_ftol", "toy_radius", "toy_literal")

BENCHMARK_FTOL = 0.1   # |f(v_f(T)) - f_star| < tol
TOY_RADIUS = 0.4       # all particles within radius of the target


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class InitSpec:
    """Initial particle distribution.

    * uniform_box: each particle i.i.d. uniform in ``box`` (None = objective default)
    * explicit: deterministic ``points``, exactly N of dimension d
    * perturbed: ``centers`` plus an independent uniform perturbation in
      [-radius, radius]^d per particle
    """

    kind: str = "uniform_box"
    box: Optional[List[List[float]]] = None
    points: Optional[List[List[float]]] = None
    centers: Optional[List[List[float]]] = None
    radius: float = 0.1

    def __post_init__(self):
        if self.kind not in INIT_KINDS:
            raise ConfigError(f"init kind must be one of {INIT_KINDS}, got {self.kind!r}")
        if self.kind == "explicit" and not self.points:
            raise ConfigError("explicit init requires points")
        if self.kind == "perturbed":
            if not self.centers:
                raise ConfigError("perturbed init requires centers")
            if not (np.isfinite(self.radius) and self.radius > 0):
                raise ConfigError("perturbed init requires radius > 0")


@dataclass(frozen=True)
class SuccessSpec:
    """Success criterion applied to the final state of one realization.

    * benchmark_ftol: |f(v_f(T)) - f_star| < tol
    * toy_radius:     |X^i(T) - x_star| < tol for every particle
    * toy_literal:    |v_f(T) - X^i(T)| < tol for every particle (the
      concentration-at-consensus reading, kept for comparison)
    """

    kind: str = "benchmark_ftol"
    tol: float = BENCHMARK_FTOL

    def __post_init__(self):
        if self.kind not in SUCCESS_KINDS:
            raise ConfigError(f"success kind must be one of {SUCCESS_KINDS}, got {self.kind!r}")
        if not (np.isfinite(self.tol) and self.tol > 0):
            raise ConfigError("success tol must be finite and > 0")


def success_benchmark(f_vf_final, f_star, tol=BENCHMARK_FTOL):
    """True iff |f(v_f(T)) - f_star| < tol; NaN counts as failure."""
    f_vf_final = np.asarray(f_vf_final, dtype=float)
    with np.errstate(invalid="ignore"):
        ok = np.abs(f_vf_final - f_star) < tol
    out = np.where(np.isfinite(f_vf_final), ok, False)
    return bool(out) if out.ndim == 0 else out


def success_toy(final_positions, x_star, radius=TOY_RADIUS):
    """True iff every particle ends within ``radius`` of ``x_star`` (strict).

    ``final_positions``: (..., N, d); returns bool or (...,) bool array.
    """
    final_positions = np.asarray(final_positions, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    dist = np.linalg.norm(final_positions - x_star, axis=-1)
    with np.errstate(invalid="ignore"):
        out = np.all(np.where(np.isfinite(dist), dist < radius, False), axis=-1)
    return bool(out) if out.ndim == 0 else out


def success_toy_literal(final_positions, v_final, radius=TOY_RADIUS):
    """True iff every particle ends within ``radius`` of the final consensus."""
    final_positions = np.asarray(final_positions, dtype=float)
    v_final = np.asarray(v_final, dtype=float)
    dist = np.linalg.norm(final_positions - v_final[..., None, :], axis=-1)
    with np.errstate(invalid="ignore"):
        out = np.all(np.where(np.isfinite(dist), dist < radius, False), axis=-1)
    return bool(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ExperimentConfig:
    """Full parameterization of one Monte-Carlo study."""

    method: str = "CBO"
    objective: str = "rastrigin"
    dim: int = 2
    n_particles: int = 20
    alpha: float = 10.0
    beta: float = 10.0
    sigma: float = 0.5
    lambda_const: float = 1.0
    t_final: float = 15.0
    n_steps: int = 30000
    n_mc: int = 5000
    base_seed: int = 0
    init: InitSpec = field(default_factory=InitSpec)
    success: SuccessSpec = field(default_factory=SuccessSpec)
    timeseries: bool = False
    gate_mode: str = "sharp"
    epsilon: float = 1e-2

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.gate_mode not in GATE_MODES:
            raise ConfigError(f"gate_mode must be one of {GATE_MODES}, got {self.gate_mode!r}")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.n_particles < 1:
            raise ConfigError("n_particles must be >= 1")
        if self.n_mc < 1:
            raise ConfigError("n_mc must be >= 1")
        if self.n_steps < 0:
            raise ConfigError("n_steps must be >= 0")
        if not (np.isfinite(self.t_final) and self.t_final > 0):
            raise ConfigError("t_final must be finite and > 0")
        for name in ("alpha", "beta", "sigma", "lambda_const"):
            val = getattr(self, name)
            if not (np.isfinite(val) and val >= 0):
                raise ConfigError(f"{name} must be finite and >= 0, got {val}")
        if self.gate_mode == "smoothed" and not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ConfigError("epsilon must be finite and > 0 in smoothed gate mode")
        if self.init.kind == "explicit":
            pts = np.asarray(self.init.points, dtype=float)
            if pts.shape != (self.n_particles, self.dim):
                raise ConfigError(
                    f"explicit init needs exactly {self.n_particles} points of dim {self.dim}"
                )
        if self.init.kind == "perturbed":
            ctr = np.asarray(self.init.centers, dtype=float)
            if ctr.shape != (self.n_particles, self.dim):
                raise ConfigError(
                    f"perturbed init needs exactly {self.n_particles} centers of dim {self.dim}"
                )

    @property
    def dt(self) -> float:
        if self.n_steps == 0:
            return 0.0
        return self.t_final / self.n_steps

    # ---- JSON round-trip -------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "objective": self.objective,
            "dim": self.dim,
            "n_particles": self.n_particles,
            "alpha": self.alpha,
            "beta": self.beta,
            "sigma": self.sigma,
            "lambda_const": self.lambda_const,
            "t_final": self.t_final,
            "n_steps": self.n_steps,
            "n_mc": self.n_mc,
            "base_seed": self.base_seed,
            "init": {k: v for k, v in {
                "kind": self.init.kind,
                "box": self.init.box,
                "points": self.init.points,
                "centers": self.init.centers,
                "radius": self.init.radius if self.init.kind == "perturbed" else None,
            }.items() if v is not None},
            "success": {"kind": self.success.kind, "tol": self.success.tol},
            "timeseries": self.timeseries,
            "gate_mode": self.gate_mode,
            "epsilon": self.epsilon,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = {
            "method", "objective", "dim", "n_particles", "alpha", "beta", "sigma",
            "lambda_const", "t_final", "n_steps", "n_mc", "base_seed", "init",
            "success", "timeseries", "gate_mode", "epsilon",
        }
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "init" in d and not isinstance(d["init"], InitSpec):
            d["init"] = InitSpec(**d["init"])
        if "success" in d and not isinstance(d["success"], SuccessSpec):
            d["success"] = SuccessSpec(**d["success"])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: "
                              f"{exc.msg}") from None
        if not isinstance(d, dict):
            raise ConfigError("config JSON must be an object")
        return cls.from_dict(d)
