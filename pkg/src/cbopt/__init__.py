"""Consensus-based global optimization with personal-best variants.

A derivative-free optimizer: particles drift toward a softmax-weighted
consensus point (and, in the PB/wPB variants, toward their personal best)
while diffusing proportionally to their distance from consensus. Includes a
Monte-Carlo experiment harness with deterministic per-realization RNG
streams and a CSV-emitting CLI (``python -m cbopt.cli`` or ``cbopt``).
"""

from .config import (ConfigError, ExperimentConfig, InitSpec, SuccessSpec,
                     success_benchmark, success_toy, success_toy_literal)
from .consensus import ConsensusPoint, lemma_constants, weighted_global_best
from .dynamics import (BatchResult, RunOutcome, em_step, gates,
                       heaviside, heaviside_smoothed, run_realization,
                       simulate_batch)
from .experiment import (MonteCarloResult, SuccessStats, SweepRow, expand_grid,
                         results_csv, run_monte_carlo, run_sweep,
                         timeseries_csv, toy_1d_config, toy_2d_config,
                         toy_initial_conditions)
from .memory import (MemoryParams, RecordMemory, WeightedMemory, init_memory)
from .objectives import (BUILTIN_NAMES, ObjectiveSpec, UnknownObjectiveError,
                         builtin_objectives, get_objective, register_objective)
from .rng import RngStream

__version__ = "0.1.0"
