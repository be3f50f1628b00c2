"""Per-particle personal-best tracking.

Two flavors:

* ``RecordMemory`` -- the exact record process: argmin of f along each
  particle's own past trajectory. Strict improvement only, so the earliest
  best wins on ties and outcomes are deterministic.

* ``WeightedMemory`` -- the exp(-beta f)-weighted time average of the
  trajectory, held in O(1) running accumulators (left-endpoint quadrature,
  matching the Euler-Maruyama evaluation points). The exponent is stored
  relative to the lowest f seen so far; when a new minimum arrives both
  accumulators are rescaled by exp(-beta*(ref_old - ref_new)) <= 1, which
  keeps the denominator bounded for beta*f in the thousands. Before the
  first update the personal best is the initial position.

Both operate on arbitrary leading batch shape: positions (..., N, d),
values (..., N). One memory instance belongs to one realization batch and
is mutated single-threaded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Array = np.ndarray

MODES = ("record", "weighted")


@dataclass(frozen=True)
class MemoryParams:
    beta: float = 0.0
    mode: str = "record"

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta < 0:
            raise ValueError(f"beta must be finite and >= 0, got {self.beta}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


def _check_aligned(positions, values):
    positions = np.array(positions, dtype=float)
    values = np.array(values, dtype=float)
    if positions.ndim < 2 or positions.shape[:-1] != values.shape:
        raise ValueError("positions (..., N, d) and values (..., N) must align")
    if positions.shape[-2] < 1:
        raise ValueError("need at least one particle")
    return positions, values


class RecordMemory:
    """Running argmin of f along each particle trajectory."""

    def __init__(self, positions, values):
        self.best_pos, self.best_val = _check_aligned(positions, values)

    def update(self, positions, values, dt=None):
        """Fold in the current positions; ``dt`` is ignored (API symmetry)."""
        improved = values < self.best_val
        if improved.any():
            np.copyto(self.best_pos, positions, where=improved[..., None])
            np.copyto(self.best_val, values, where=improved)

    def update_particle(self, i, x, f_x):
        """Single-particle update (non-batched memories only)."""
        if float(f_x) < self.best_val[..., i]:
            self.best_pos[..., i, :] = x
            self.best_val[..., i] = f_x

    def personal_best(self) -> Array:
        return self.best_pos

    def best_values(self) -> Array:
        return self.best_val


class WeightedMemory:
    """exp(-beta f)-weighted running time average of each trajectory."""

    def __init__(self, positions, values, beta):
        if not np.isfinite(beta) or beta < 0:
            raise ValueError(f"beta must be finite and >= 0, got {beta}")
        positions, values = _check_aligned(positions, values)
        self.beta = float(beta)
        self.x0 = positions
        self.ref = values          # lowest f accumulated so far
        self.num = np.zeros_like(positions)
        self.den = np.zeros_like(values)

    def update(self, positions, values, dt, check=False):
        """Add one left-endpoint rectangle of width ``dt`` per particle."""
        if not (np.isfinite(dt) and dt > 0):
            raise ValueError(f"dt must be finite and > 0, got {dt}")
        if check and not (np.all(np.isfinite(positions)) and np.all(np.isfinite(values))):
            raise ValueError("non-finite positions or f values")
        beta = self.beta
        improved = values < self.ref
        if improved.any():
            new_ref = np.minimum(self.ref, values)
            factor = np.exp(-beta * (self.ref - new_ref))
            self.num *= factor[..., None]
            self.den *= factor
            self.ref = new_ref
        w = np.exp(-beta * (values - self.ref)) * dt
        self.num += positions * w[..., None]
        self.den += w

    def update_particle(self, i, x, f_x, dt):
        """Single-particle update (non-batched memories only)."""
        x = np.asarray(x, dtype=float)
        f_x = float(f_x)
        if not (np.all(np.isfinite(x)) and np.isfinite(f_x)):
            raise ValueError("non-finite position or f value")
        if not (np.isfinite(dt) and dt > 0):
            raise ValueError(f"dt must be finite and > 0, got {dt}")
        if f_x < self.ref[..., i]:
            factor = np.exp(-self.beta * (self.ref[..., i] - f_x))
            self.num[..., i, :] *= factor
            self.den[..., i] *= factor
            self.ref[..., i] = f_x
        w = np.exp(-self.beta * (f_x - self.ref[..., i])) * dt
        self.num[..., i, :] += x * w
        self.den[..., i] += w

    def personal_best(self) -> Array:
        """num/den, or the initial position before any accumulation."""
        started = self.den > 0
        if started.all():
            return self.num / self.den[..., None]
        den = np.where(started, self.den, 1.0)
        return np.where(started[..., None], self.num / den[..., None], self.x0)


def init_memory(positions, values, params: MemoryParams):
    """Memory state whose personal best starts at the initial positions."""
    if params.mode == "record":
        return RecordMemory(positions, values)
    return WeightedMemory(positions, values, params.beta)
