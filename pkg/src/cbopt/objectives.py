"""Benchmark objective functions and the objective registry.

All objectives are vectorized over the last axis: ``eval`` accepts arrays of
shape ``(..., d)`` and returns shape ``(...,)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

Array = np.ndarray


class UnknownObjectiveError(KeyError):
    """Raised when an objective name is not registered."""


@dataclass(frozen=True, eq=False)
class ObjectiveSpec:
    """An objective function plus the metadata the harness needs.

    ``x_star`` / ``f_star`` are the known global minimizer and minimum, if any.
    ``init_box`` is the default uniform-initialization domain, shape (d, 2).
    """

    name: str
    dim: int
    fn: Callable[[Array], Array]
    init_box: Array
    x_star: Optional[Array] = None
    f_star: Optional[float] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        box = np.asarray(self.init_box, dtype=float)
        if box.shape != (self.dim, 2):
            raise ValueError(f"init_box must have shape ({self.dim}, 2), got {box.shape}")
        if not np.all(box[:, 0] < box[:, 1]):
            raise ValueError("init_box requires lo < hi in every coordinate")
        object.__setattr__(self, "init_box", box)
        if self.x_star is not None:
            xs = np.asarray(self.x_star, dtype=float).reshape(-1)
            if xs.shape != (self.dim,):
                raise ValueError("x_star has wrong dimension")
            object.__setattr__(self, "x_star", xs)

    def eval(self, x) -> Array:
        """Evaluate f at one point (shape (d,)) or a batch (shape (..., d))."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.dim:
            raise ValueError(
                f"objective '{self.name}' has dim {self.dim}, got point of shape {x.shape}"
            )
        out = self.fn(x)
        return float(out) if np.ndim(out) == 0 else out


# ----------------------------------------------------------------------
# The benchmark functions
# ----------------------------------------------------------------------


def alpine(x: Array) -> Array:
    x = np.asarray(x, dtype=float)
    return np.sum(np.abs(x * np.sin(x) + 0.1 * x), axis=-1)


def ackley(x: Array) -> Array:
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    s1 = np.sum(x**2, axis=-1) / d
    s2 = np.sum(np.cos(2.0 * np.pi * x), axis=-1) / d
    return -20.0 * np.exp(-0.2 * np.sqrt(s1)) - np.exp(s2) + 20.0 + np.e


def rastrigin(x: Array) -> Array:
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    return 10.0 * d + np.sum(x**2 - 10.0 * np.cos(2.0 * np.pi * x), axis=-1)


def xinsheyang2(x: Array) -> Array:
    x = np.asarray(x, dtype=float)
    return np.sum(np.abs(x), axis=-1) * np.exp(-np.sum(np.sin(x**2), axis=-1))


def double_well_1d(x: Array) -> Array:
    x = np.asarray(x, dtype=float)
    x1 = x[..., 0]
    return (x1**2 - 1.0) ** 2 + 0.01 * x1 + 0.5


def double_well_2d(x: Array) -> Array:
    x = np.asarray(x, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    return (x1**2 - 1.0) ** 2 + 0.01 * x1 + 0.5 + x2**2


# Stationary points of the double-well profile, as used in the toy studies.
DOUBLE_WELL_GLOBAL_MIN = -1.00125
DOUBLE_WELL_LOCAL_MIN = 0.998748


@dataclass(frozen=True)
class _Entry:
    fn: Callable[[Array], Array]
    default_halfwidth: float  # symmetric default init box [-w, w]^d
    fixed_dim: Optional[int] = None
    x_star_fn: Optional[Callable[[int], Array]] = None


_origin = lambda d: np.zeros(d)

_REGISTRY: Dict[str, _Entry] = {
    "alpine": _Entry(alpine, 5.0, x_star_fn=_origin),
    "ackley": _Entry(ackley, 32.0, x_star_fn=_origin),
    "rastrigin": _Entry(rastrigin, 5.12, x_star_fn=_origin),
    "xinsheyang2": _Entry(xinsheyang2, 2.0 * np.pi, x_star_fn=_origin),
    "double_well_1d": _Entry(
        double_well_1d, 2.0, fixed_dim=1,
        x_star_fn=lambda d: np.array([DOUBLE_WELL_GLOBAL_MIN]),
    ),
    "double_well_2d": _Entry(
        double_well_2d, 2.0, fixed_dim=2,
        x_star_fn=lambda d: np.array([DOUBLE_WELL_GLOBAL_MIN, 0.0]),
    ),
}

BUILTIN_NAMES = tuple(_REGISTRY)


def register_objective(name, fn, default_halfwidth=1.0, fixed_dim=None, x_star_fn=None):
    """Register a user-supplied objective by name.

    ``fn`` must be vectorized over the last axis; ``x_star_fn(d)`` may return
    the known minimizer if there is one.
    """
    if name in _REGISTRY:
        raise ValueError(f"objective '{name}' is already registered")
    _REGISTRY[name] = _Entry(fn, float(default_halfwidth), fixed_dim, x_star_fn)


def get_objective(name: str, dim: Optional[int] = None, init_box=None) -> ObjectiveSpec:
    """Look up an objective by name and instantiate it at dimension ``dim``."""
    try:
        entry = _REGISTRY[name]
    except KeyError:
        raise UnknownObjectiveError(
            f"unknown objective '{name}'; available: {sorted(_REGISTRY)}"
        ) from None
    if entry.fixed_dim is not None:
        if dim is not None and dim != entry.fixed_dim:
            raise ValueError(f"objective '{name}' is fixed to dim {entry.fixed_dim}")
        dim = entry.fixed_dim
    elif dim is None:
        raise ValueError(f"objective '{name}' needs an explicit dim")
    if init_box is None:
        w = entry.default_halfwidth
        init_box = np.column_stack([np.full(dim, -w), np.full(dim, w)])
    x_star = entry.x_star_fn(dim) if entry.x_star_fn is not None else None
    f_star = None
    if x_star is not None:
        f_star = float(np.asarray(entry.fn(np.asarray(x_star, dtype=float))))
    return ObjectiveSpec(name=name, dim=dim, fn=entry.fn, init_box=init_box,
                         x_star=x_star, f_star=f_star)


def builtin_objectives(dim: int = 2):
    """All built-in objectives; dimension-parametric ones instantiated at ``dim``."""
    return [get_objective(n, None if _REGISTRY[n].fixed_dim else dim) for n in BUILTIN_NAMES]
