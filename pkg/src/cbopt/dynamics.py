"""Euler-Maruyama integration of the gated consensus SDE.

One step moves each particle by

    X <- X + [-lam*(X - v) - mu*(X - p)]*dt + sqrt(2)*sigma*(X - v)*sqrt(dt)*xi

where v is the ensemble consensus point, p the particle's personal best and
xi ~ N(0,1) i.i.d. per coordinate. The drift gates are Heaviside products:
lam fires when the consensus beats both the particle and its personal best,
mu fires when the personal best beats both the particle and the consensus;
with sharp gates (H(0) = 0) at most one of the two is active. CBO mode fixes
lam to a constant and mu to zero and never allocates a personal-best tracker.

Per discrete step the order is: update memory with the current position
(left-endpoint quadrature), compute v from current positions, compute gates,
then move. A realization whose state goes non-finite is frozen at its last
finite state and flagged as diverged; it cannot poison the rest of a batch.

The simulation is vectorized over a batch of realizations (leading axis);
realization ``i`` consumes draws only from its own RNG stream, in blocks of
``BLOCK_STEPS`` steps, so its path is invariant to batch composition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import (ConfigError, ExperimentConfig, success_benchmark,
                     success_toy, success_toy_literal)
from .consensus import softmax_mean
from .memory import RecordMemory, WeightedMemory
from .objectives import ObjectiveSpec
from .rng import RngStream

Array = np.ndarray

# Normal draws are pulled from each stream in blocks of this many steps.
# Fixed constant: changing it would change every simulated path.
BLOCK_STEPS = 512


def heaviside(x):
    """Sharp gate: 1 where x > 0, else 0 (H(0) = 0)."""
    out = np.where(np.asarray(x) > 0, 1.0, 0.0)
    return float(out) if out.ndim == 0 else out


def heaviside_smoothed(x, epsilon):
    """Smoothed gate 1/2 + 1/2 tanh(x/eps); in [0,1], Lipschitz with 1/(2 eps)."""
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    out = 0.5 + 0.5 * np.tanh(np.asarray(x, dtype=float) / epsilon)
    return float(out) if out.ndim == 0 else out


def gates(f_x, f_v, f_p, gate_mode="sharp", epsilon=1e-2):
    """Drift gates (lam, mu) from the three objective values.

    lam = H(f_x - f_v) * H(f_p - f_v), mu = H(f_x - f_p) * H(f_v - f_p).
    All arguments broadcast.
    """
    f_x = np.asarray(f_x, dtype=float)
    f_v = np.asarray(f_v, dtype=float)
    f_p = np.asarray(f_p, dtype=float)
    if gate_mode == "sharp":
        h = heaviside
        lam = np.asarray(h(f_x - f_v) * h(f_p - f_v))
        mu = np.asarray(h(f_x - f_p) * h(f_v - f_p))
    elif gate_mode == "smoothed":
        lam = np.asarray(heaviside_smoothed(f_x - f_v, epsilon)
                         * heaviside_smoothed(f_p - f_v, epsilon))
        mu = np.asarray(heaviside_smoothed(f_x - f_p, epsilon)
                        * heaviside_smoothed(f_v - f_p, epsilon))
    else:
        raise ValueError(f"unknown gate_mode {gate_mode!r}")
    if lam.ndim == 0:
        return float(lam), float(mu)
    return lam, mu


def em_step(x, v, p, lam, mu, sigma, dt, xi):
    """One explicit Euler-Maruyama update; pure array math, no checks.

    ``x``, ``p``, ``xi``: (..., N, d); ``v``: (..., d); ``lam``, ``mu``:
    scalars or (..., N). The diffusion is component-wise in (x - v), so a
    particle sitting exactly at the consensus point feels no noise.
    """
    dxv = x - v[..., None, :]
    lam = np.asarray(lam)[..., None] if np.ndim(lam) else lam
    mu = np.asarray(mu)[..., None] if np.ndim(mu) else mu
    drift = -lam * dxv
    if p is not None:
        drift = drift - mu * (x - p)
    return x + drift * dt + (np.sqrt(2.0) * sigma * np.sqrt(dt)) * dxv * xi


@dataclass
class BatchResult:
    """Final state of a batch of realizations (leading axis = realization)."""

    stream_ids: Array          # (B,)
    final_positions: Array     # (B, N, d)
    v_final: Array             # (B, d)
    f_vf_final: Array          # (B,)
    success: Array             # (B,) bool
    diverged: Array            # (B,) bool
    t_grid: Optional[Array] = None        # (n_steps+1,)
    dist_vf: Optional[Array] = None       # sum mode: (n_steps+1,), full: (B, n_steps+1)
    energy: Optional[Array] = None        # same shape as dist_vf


def _initial_positions(objective, config, streams):
    init = config.init
    n, d = config.n_particles, config.dim
    if init.kind == "explicit":
        pts = np.asarray(init.points, dtype=float)
        return np.broadcast_to(pts, (len(streams), n, d)).copy()
    if init.kind == "perturbed":
        centers = np.asarray(init.centers, dtype=float)
        r = float(init.radius)
        box = np.column_stack([np.full(d, -r), np.full(d, r)])
        return np.stack([centers + s.uniform_in_box(box, size=n) for s in streams])
    box = init.box
    if box is None:
        box = objective.init_box
    box = np.asarray(box, dtype=float)
    if box.shape != (d, 2):
        raise ConfigError(f"init box must have shape ({d}, 2), got {box.shape}")
    return np.stack([s.uniform_in_box(box, size=n) for s in streams])


def _evaluate_success(objective, config, x, v, fv, diverged):
    spec = config.success
    if spec.kind == "benchmark_ftol":
        if objective.f_star is None:
            raise ConfigError(f"objective '{objective.name}' has no known f_star; "
                              "benchmark_ftol success is undefined")
        ok = success_benchmark(fv, objective.f_star, spec.tol)
    elif spec.kind == "toy_radius":
        if objective.x_star is None:
            raise ConfigError(f"objective '{objective.name}' has no known x_star; "
                              "toy_radius success is undefined")
        ok = success_toy(x, objective.x_star, spec.tol)
    else:
        ok = success_toy_literal(x, v, spec.tol)
    return np.asarray(ok) & ~diverged


def simulate_batch(objective: ObjectiveSpec, config: ExperimentConfig,
                   stream_ids, series_mode: str = "none") -> BatchResult:
    """Run a batch of realizations with streams ``stream_ids``.

    ``series_mode``: "none", "sum" (per-step sums of |v_f - x_star| and of the
    energy over the batch, for Monte-Carlo means) or "full" (per-realization
    series; use only for small batches).
    """
    if series_mode not in ("none", "sum", "full"):
        raise ValueError(f"bad series_mode {series_mode!r}")
    if objective.dim != config.dim:
        raise ConfigError("objective dim does not match config dim")
    stream_ids = np.asarray(list(stream_ids), dtype=np.uint64)
    B, N, d = len(stream_ids), config.n_particles, config.dim
    n_steps, dt = config.n_steps, config.dt
    alpha, sigma = config.alpha, config.sigma
    method = config.method

    x_star = objective.x_star
    if series_mode != "none":
        if x_star is None:
            raise ConfigError(f"objective '{objective.name}' has no x_star; "
                              "time series diagnostics are undefined")
        t_grid = np.arange(n_steps + 1) * dt
        shape = (n_steps + 1,) if series_mode == "sum" else (B, n_steps + 1)
        dist_vf = np.zeros(shape)
        energy = np.zeros(shape)

    streams = [RngStream(config.base_seed, int(s)) for s in stream_ids]
    x = _initial_positions(objective, config, streams)
    fx = objective.eval(x)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(fx))):
        raise ConfigError("non-finite objective values at the initial positions")

    memory = None
    if method == "PB":
        memory = RecordMemory(x, fx)
    elif method == "wPB":
        memory = WeightedMemory(x, fx, config.beta)

    alive = np.ones(B, dtype=bool)
    noise_scale = np.sqrt(2.0) * sigma * np.sqrt(dt) if n_steps > 0 else 0.0
    smoothed = config.gate_mode == "smoothed"
    eps = config.epsilon

    def record_series(k, v):
        dv = np.linalg.norm(v - x_star, axis=-1)
        en = np.sum((x - x_star) ** 2, axis=(-2, -1))
        if series_mode == "sum":
            dist_vf[k] = dv.sum()
            energy[k] = en.sum()
        else:
            dist_vf[:, k] = dv
            energy[:, k] = en

    step = 0
    while step < n_steps:
        bs = min(BLOCK_STEPS, n_steps - step)
        xi = np.stack([s.standard_normal((bs, N, d)) for s in streams])
        for s in range(bs):
            if memory is not None:
                memory.update(x, fx, dt)
            v = softmax_mean(x, fx, alpha)
            if series_mode != "none":
                record_series(step, v)
            dxv = x - v[:, None, :]
            if method == "CBO":
                drift = -config.lambda_const * dxv
            else:
                fv = objective.eval(v)
                p = memory.personal_best()
                if method == "PB":
                    fp = memory.best_values()
                else:
                    fp = objective.eval(p)
                if smoothed:
                    lam = (heaviside_smoothed(fx - fv[:, None], eps)
                           * heaviside_smoothed(fp - fv[:, None], eps))
                    mu = (heaviside_smoothed(fx - fp, eps)
                          * heaviside_smoothed(fv[:, None] - fp, eps))
                else:
                    lam = ((fx > fv[:, None]) & (fp > fv[:, None])).astype(float)
                    mu = ((fx > fp) & (fv[:, None] > fp)).astype(float)
                drift = -lam[..., None] * dxv - mu[..., None] * (x - p)
            upd = drift * dt + noise_scale * dxv * xi[:, s]
            x_new = x + alive[:, None, None] * upd
            fx_new = objective.eval(x_new)
            finite = (np.isfinite(fx_new).all(axis=-1)
                      & np.isfinite(x_new.reshape(B, -1)).all(axis=-1))
            bad = alive & ~finite
            if bad.any():
                mask = bad[:, None, None]
                x_new = np.where(mask, x, x_new)
                fx_new = np.where(bad[:, None], fx, fx_new)
                alive[bad] = False
            x, fx = x_new, fx_new
            step += 1

    v = softmax_mean(x, fx, alpha)
    fv = objective.eval(v)
    if series_mode != "none":
        record_series(n_steps, v)
    diverged = ~alive | ~np.isfinite(fv)
    success = _evaluate_success(objective, config, x, v, fv, diverged)
    return BatchResult(
        stream_ids=stream_ids,
        final_positions=x,
        v_final=v,
        f_vf_final=np.where(diverged, np.nan, fv),
        success=success,
        diverged=diverged,
        t_grid=t_grid if series_mode != "none" else None,
        dist_vf=dist_vf if series_mode != "none" else None,
        energy=energy if series_mode != "none" else None,
    )


@dataclass(frozen=True)
class RunOutcome:
    """Result of a single realization."""

    success: bool
    f_vf_final: float
    vf_final: Array
    final_positions: Array
    diverged: bool
    t_grid: Optional[Array] = None
    dist_vf: Optional[Array] = None   # |v_f(t) - x_star| per step
    energy: Optional[Array] = None    # sum_i |X^i(t) - x_star|^2 per step


def run_realization(objective: ObjectiveSpec, config: ExperimentConfig,
                    stream_id: int = 0) -> RunOutcome:
    """One realization with RNG stream (config.base_seed, stream_id)."""
    series = "full" if config.timeseries else "none"
    res = simulate_batch(objective, config, [stream_id], series_mode=series)
    return RunOutcome(
        success=bool(res.success[0]),
        f_vf_final=float(res.f_vf_final[0]),
        vf_final=res.v_final[0],
        final_positions=res.final_positions[0],
        diverged=bool(res.diverged[0]),
        t_grid=res.t_grid,
        dist_vf=None if res.dist_vf is None else res.dist_vf[0],
        energy=None if res.energy is None else res.energy[0],
    )
