"""Particle swarm optimization variants and a seeded benchmark harness."""

from .benchmarks import ObjectiveFunction, griewank, lookup, rastrigin, rosenbrock
from .core import Bounds, ConfigError, EvaluationError, SwarmConfig, SwarmState, init_swarm, make_rng
from .experiments import (
    AggregateResult,
    ExperimentSpec,
    RunTrace,
    compare_variants,
    iterations_to_threshold,
    run_experiments,
    run_repeated,
    run_single,
)
from .variants import VARIANT_NAMES, VariantSpec

__version__ = "0.1.0"
