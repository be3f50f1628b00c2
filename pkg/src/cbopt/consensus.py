"""Weighted global best of the particle ensemble.

The consensus point is the softmax-weighted mean of the particle positions
with weights exp(-alpha * f_i). Weights are stabilized by subtracting the
ensemble minimum of f inside the exponent, which is mathematically a common
factor of numerator and denominator; after stabilization the largest weight
is exactly 1, so the denominator can never underflow to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Array = np.ndarray


@dataclass(frozen=True)
class ConsensusPoint:
    v: Array      # consensus position in R^d
    f_v: float    # objective value at v


def softmax_mean(positions: Array, f_values: Array, alpha: float) -> Array:
    """Stabilized exp(-alpha f) weighted mean over axis -2, no input checks.

    ``positions``: (..., N, d), ``f_values``: (..., N) -> (..., d).
    Used directly by the simulation hot loop.
    """
    w = np.exp(-alpha * (f_values - f_values.min(axis=-1, keepdims=True)))
    return np.sum(positions * w[..., None], axis=-2) / np.sum(w, axis=-1)[..., None]


def weighted_global_best(positions, f_values, alpha: float) -> Array:
    """Consensus point v of an ensemble; lies in the convex hull of positions.

    ``positions``: (N, d) or batched (..., N, d); ``f_values``: matching (..., N).
    """
    positions = np.asarray(positions, dtype=float)
    f_values = np.asarray(f_values, dtype=float)
    if positions.ndim < 2 or positions.shape[:-1] != f_values.shape:
        raise ValueError("positions (..., N, d) and f_values (..., N) must align")
    if positions.shape[-2] < 1:
        raise ValueError("need at least one particle")
    if not np.isfinite(alpha) or alpha < 0:
        raise ValueError(f"alpha must be finite and >= 0, got {alpha}")
    if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(f_values))):
        raise ValueError("non-finite positions or f values")
    return softmax_mean(positions, f_values, alpha)


def lemma_constants(n, l_f, f_lo, f_hi, alpha, beta, n_particles):
    """Local-Lipschitz constants (C1, C2) for the weighted averages on B_n.

    C1 bounds the weighted personal best, C2 the global best:
      |p_f[phi](t) - p_f[phi_hat](t)|^2  <= C1 * sup_{s<=t} |phi - phi_hat|^2
      |v_f[phi(t)] - v_f[phi_hat(t)]|^2  <= C2 * |phi(t) - phi_hat(t)|^2
    ``l_f`` is the Lipschitz constant of f on B_n, ``f_lo``/``f_hi`` its min
    and max there. Overflowing exponentials return inf rather than raising, so
    callers can skip rather than crash.
    """
    for name, val in [("n", n), ("l_f", l_f), ("f_lo", f_lo), ("f_hi", f_hi),
                      ("alpha", alpha), ("beta", beta)]:
        if not np.isfinite(val):
            raise ValueError(f"{name} must be finite, got {val}")
    if n <= 0:
        raise ValueError("n must be positive")
    if n_particles < 1:
        raise ValueError("n_particles must be >= 1")
    with np.errstate(over="ignore"):
        c1 = 1.0 + (1.0 + 2.0 * l_f) * beta * n * np.exp(beta * (f_hi - f_lo))
        c2 = (
            1.0
            + alpha * n * l_f * np.exp(-alpha * f_lo) / n_particles
            + n * np.exp(alpha * (f_hi - f_lo)) * (1.0 / n_particles + alpha * n * l_f)
        ) ** 2 * 2.0 ** (n_particles - 1)
    return float(c1), float(c2)
