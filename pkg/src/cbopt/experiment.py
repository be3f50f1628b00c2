"""Monte-Carlo harness: repeated realizations, success rates, sweeps, CSV.

Realization ``i`` always uses RNG stream ``(base_seed, i)``, so results are
independent of chunking and of the number of worker threads. Aggregation is
a deterministic reduce in realization-index order.
"""

from __future__ import annotations

import io
import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .config import ConfigError, ExperimentConfig, InitSpec, SuccessSpec
from .dynamics import simulate_batch
from .objectives import ObjectiveSpec, get_objective

Array = np.ndarray

# Upper bound on realizations simulated per vectorized batch (memory cap).
# Does not affect results: streams are bound to realization indices.
MAX_CHUNK = 1024


@dataclass(frozen=True)
class SuccessStats:
    """Aggregate over one Monte-Carlo study."""

    n_mc: int
    n_success: int
    n_diverged: int
    success_rate: float
    se: float              # binomial standard error of the success rate
    mean_f_vf: float       # over non-diverged realizations
    sd_f_vf: float
    wall_s: float


@dataclass
class MonteCarloResult:
    config: ExperimentConfig
    stats: SuccessStats
    success: Array              # (M,) bool, per realization
    f_vf_final: Array           # (M,) float, NaN where diverged
    diverged: Array             # (M,) bool
    t_grid: Optional[Array] = None
    mean_dist_vf: Optional[Array] = None
    mean_energy: Optional[Array] = None


def aggregate_stats(success, f_vf_final, diverged, wall_s=0.0) -> SuccessStats:
    """Deterministic aggregation of per-realization records."""
    m = len(success)
    n_success = int(np.count_nonzero(success))
    rate = n_success / m
    ok = ~np.asarray(diverged)
    vals = np.asarray(f_vf_final)[ok]
    if vals.size:
        mean_f = float(np.mean(vals))
        sd_f = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
    else:
        mean_f = float("nan")
        sd_f = float("nan")
    return SuccessStats(
        n_mc=m,
        n_success=n_success,
        n_diverged=int(np.count_nonzero(diverged)),
        success_rate=rate,
        se=float(np.sqrt(rate * (1.0 - rate) / m)),
        mean_f_vf=mean_f,
        sd_f_vf=sd_f,
        wall_s=float(wall_s),
    )


def _resolve_objective(config: ExperimentConfig) -> ObjectiveSpec:
    return get_objective(config.objective, config.dim)


def run_monte_carlo(config: ExperimentConfig, threads: int = 1,
                    objective: Optional[ObjectiveSpec] = None) -> MonteCarloResult:
    """Run ``config.n_mc`` independent realizations and aggregate."""
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    if objective is None:
        objective = _resolve_objective(config)
    m = config.n_mc
    t0 = time.perf_counter()

    chunk = min(MAX_CHUNK, -(-m // threads))
    bounds = [(lo, min(lo + chunk, m)) for lo in range(0, m, chunk)]
    series_mode = "sum" if config.timeseries else "none"

    def work(span):
        lo, hi = span
        return simulate_batch(objective, config, range(lo, hi), series_mode=series_mode)

    if threads == 1 or len(bounds) == 1:
        results = [work(span) for span in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, bounds))

    success = np.zeros(m, dtype=bool)
    f_vf = np.full(m, np.nan)
    diverged = np.zeros(m, dtype=bool)
    for (lo, hi), res in zip(bounds, results):
        success[lo:hi] = res.success
        f_vf[lo:hi] = res.f_vf_final
        diverged[lo:hi] = res.diverged

    t_grid = mean_dist = mean_energy = None
    if config.timeseries:
        t_grid = results[0].t_grid
        mean_dist = sum(res.dist_vf for res in results) / m
        mean_energy = sum(res.energy for res in results) / m

    stats = aggregate_stats(success, f_vf, diverged, wall_s=time.perf_counter() - t0)
    return MonteCarloResult(config=config, stats=stats, success=success,
                            f_vf_final=f_vf, diverged=diverged, t_grid=t_grid,
                            mean_dist_vf=mean_dist, mean_energy=mean_energy)


# ----------------------------------------------------------------------
# Sweeps
# ----------------------------------------------------------------------

# Schema order; grids expand field-by-field in this order, values in listed order.
_SWEEPABLE = ("method", "objective", "dim", "n_particles", "alpha", "beta",
              "sigma", "lambda_const", "t_final", "n_steps", "n_mc",
              "base_seed", "init", "success", "timeseries", "gate_mode", "epsilon")


def expand_grid(raw: dict) -> List[ExperimentConfig]:
    """Cartesian-product expansion of a sweep config.

    Any schema field may hold a list of values to sweep over ("init" and
    "success" count as swept when given as a list of objects).
    """
    if not isinstance(raw, dict):
        raise ConfigError("sweep config must be a JSON object")
    unknown = set(raw) - set(_SWEEPABLE)
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    axes = []
    for name in _SWEEPABLE:
        if name not in raw:
            continue
        val = raw[name]
        values = val if isinstance(val, list) and name not in ("init", "success") else None
        if name in ("init", "success") and isinstance(val, list):
            values = val
        if values is None:
            values = [val]
        if len(values) == 0:
            raise ConfigError(f"empty grid list for field '{name}'")
        axes.append((name, values))
    configs = []
    for combo in itertools.product(*(vals for _, vals in axes)):
        configs.append(ExperimentConfig.from_dict(dict(zip((n for n, _ in axes), combo))))
    return configs


@dataclass
class SweepRow:
    config: ExperimentConfig
    stats: Optional[SuccessStats]
    error: Optional[str] = None


def run_sweep(configs, threads: int = 1) -> List[SweepRow]:
    """One Monte-Carlo study per grid point, rows in grid order."""
    if not configs:
        raise ConfigError("empty sweep grid")
    rows = []
    for cfg in configs:
        try:
            rows.append(SweepRow(cfg, run_monte_carlo(cfg, threads=threads).stats))
        except (ConfigError, KeyError, ValueError) as exc:
            rows.append(SweepRow(cfg, None, error=str(exc)))
    return rows


# ----------------------------------------------------------------------
# Toy studies
# ----------------------------------------------------------------------

# Deterministic 1-d initial points for the double-well toy. Two particles
# cluster in one well, one sits in the other; chosen so that at alpha = 10
# the consensus point's value does not undercut the clustered particles.
TOY_IC1_POINTS = [[-0.8], [0.95], [1.05]]
TOY_IC2_POINTS = [[-1.05], [-0.95], [0.8]]


def toy_initial_conditions(which: str) -> InitSpec:
    """Explicit init for the 1-d toy: IC1 (one particle near the global
    minimizer) or IC2 (two particles near the global minimizer)."""
    key = which.upper()
    if key == "IC1":
        return InitSpec(kind="explicit", points=TOY_IC1_POINTS)
    if key == "IC2":
        return InitSpec(kind="explicit", points=TOY_IC2_POINTS)
    raise ConfigError(f"unknown toy initial condition {which!r} (IC1 or IC2)")


def toy_1d_config(which: str, method: str, **overrides) -> ExperimentConfig:
    """1-d double-well toy protocol: T = 100, dt = 1e-3, beta = 30.

    The default noise level sigma = 0.8 is calibrated so that plain
    consensus dynamics escape the worse well at the documented rates while
    the Euler scheme stays stable (the per-step variance factor
    1 + 2 dt (sigma^2 - 1) must stay close to 1).
    """
    base = dict(
        method=method, objective="double_well_1d", dim=1, n_particles=3,
        alpha=10.0, beta=30.0, sigma=0.8, t_final=100.0, n_steps=100_000,
        n_mc=1000, init=toy_initial_conditions(which),
        success=SuccessSpec(kind="toy_radius", tol=0.4),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def toy_2d_config(method: str, n_particles: int = 4, **overrides) -> ExperimentConfig:
    """2-d double-well toy: half the particles per well, perturbed by 0.1.

    The default noise level sigma = 1.3 keeps the ensemble spread out long
    enough to escape the symmetric trap between the two wells (at small
    sigma the drift collapses all particles onto the midpoint consensus
    point, where the objective is high, and the multiplicative noise dies
    with the spread). The horizon T = 30 gives the wandering consensus
    point time to settle near a well bottom.
    """
    if n_particles % 2:
        raise ConfigError("the 2-d toy splits particles evenly across both wells")
    half = n_particles // 2
    centers = [[-1.0, 0.0]] * half + [[1.0, 0.0]] * half
    base = dict(
        method=method, objective="double_well_2d", dim=2, n_particles=n_particles,
        alpha=10.0, beta=20.0, sigma=1.3, t_final=30.0, n_steps=60_000,
        n_mc=5000, init=InitSpec(kind="perturbed", centers=centers, radius=0.1),
        success=SuccessSpec(kind="benchmark_ftol", tol=0.2),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


# ----------------------------------------------------------------------
# CSV output
# ----------------------------------------------------------------------

RESULTS_HEADER = ("method,objective,dim,n_particles,alpha,beta,sigma,lambda,"
                  "T,n_steps,n_mc,seed,success_rate,se,n_diverged,"
                  "mean_f_vf,sd_f_vf,wall_s")

TIMESERIES_HEADER = "t,mean_dist_vf,mean_energy"


def _fmt(x) -> str:
    """Full round-trip precision so CSV comparison is exact."""
    return repr(float(x))


def format_result_row(config: ExperimentConfig, stats: SuccessStats) -> str:
    """One results-CSV line.

    The wall_s column is written as 0.0: actual timing would break the
    byte-identical-output determinism contract. Measured seconds live in
    ``SuccessStats.wall_s``.
    """
    fields = [
        config.method, config.objective, str(config.dim), str(config.n_particles),
        _fmt(config.alpha), _fmt(config.beta), _fmt(config.sigma),
        _fmt(config.lambda_const), _fmt(config.t_final), str(config.n_steps),
        str(config.n_mc), str(config.base_seed),
        _fmt(stats.success_rate), _fmt(stats.se), str(stats.n_diverged),
        _fmt(stats.mean_f_vf), _fmt(stats.sd_f_vf), _fmt(0.0),
    ]
    return ",".join(fields)


def results_csv(rows) -> str:
    """Full results CSV from (config, stats) pairs."""
    lines = [RESULTS_HEADER]
    lines.extend(format_result_row(cfg, stats) for cfg, stats in rows)
    return "\n".join(lines) + "\n"


def timeseries_csv(t_grid, mean_dist_vf, mean_energy) -> str:
    buf = io.StringIO()
    buf.write(TIMESERIES_HEADER + "\n")
    for t, dv, en in zip(t_grid, mean_dist_vf, mean_energy):
        buf.write(f"{_fmt(t)},{_fmt(dv)},{_fmt(en)}\n")
    return buf.getvalue()
