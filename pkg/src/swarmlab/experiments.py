"""Seeded repeated runs, mean convergence traces and variant comparison.

Run ``r`` of an experiment uses seed ``base_seed + r``. Traces are aggregated
in ascending run order, so serial and parallel execution give bit-identical
results.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .benchmarks import lookup
from .core import ConfigError, SwarmConfig, init_swarm, make_rng
from .variants import VariantSpec

__all__ = [
    "AggregateResult",
    "ComparisonRow",
    "DEFAULT_EPSILON",
    "ExperimentSpec",
    "RunError",
    "RunTrace",
    "SnapshotStats",
    "aggregate",
    "compare_variants",
    "comparison_table",
    "iterations_to_threshold",
    "run_experiments",
    "run_repeated",
    "run_single",
]

# "attained the global minimum" levels quoted for the 30-D runs
DEFAULT_EPSILON = {"griewank": 1e-15, "rastrigin": 1e-12}
FALLBACK_EPSILON = 1e-12


class RunError(RuntimeError):
    """A single run failed; carries the experiment label and seed."""

    def __init__(self, label: str, seed: int, cause: BaseException):
        self.label = label
        self.seed = seed
        super().__init__(f"{label}: run with seed {seed} failed: {cause}")


@dataclass(frozen=True)
class ExperimentSpec:
    objective_name: str
    variant: VariantSpec
    swarm: SwarmConfig
    repetitions: int = 20
    base_seed: int = 0
    snapshot_iterations: tuple[int, ...] = (10, 2000)
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        snaps = tuple(int(s) for s in self.snapshot_iterations)
        for s in snaps:
            if not 0 <= s <= self.swarm.it_max:
                raise ConfigError(
                    f"snapshot iteration {s} outside [0, {self.swarm.it_max}]"
                )
        object.__setattr__(self, "snapshot_iterations", snaps)
        if self.epsilon is None:
            eps = DEFAULT_EPSILON.get(self.objective_name, FALLBACK_EPSILON)
            object.__setattr__(self, "epsilon", eps)
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be > 0")
        # fail early on unknown names or bad dimensions
        lookup(self.objective_name, self.swarm.n_dims)

    @property
    def n_dims(self) -> int:
        return self.swarm.n_dims

    @property
    def label(self) -> str:
        return f"{self.objective_name}-{self.n_dims}/{self.variant.name}"

    def seeds(self) -> list[int]:
        return [self.base_seed + r for r in range(self.repetitions)]


@dataclass
class RunTrace:
    seed: int
    best_fitness: np.ndarray
    final_best_position: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SnapshotStats:
    mean: float
    std: float
    min: float
    max: float


@dataclass
class AggregateResult:
    spec: ExperimentSpec
    mean_trace: np.ndarray
    snapshots: dict[int, SnapshotStats]
    iters_to_threshold: list[Optional[int]]
    runs: list[RunTrace] = field(repr=False)

    @property
    def iters_to_threshold_mean(self) -> Optional[float]:
        """Mean over the runs that reached epsilon, or None if none did."""
        hits = [k for k in self.iters_to_threshold if k is not None]
        return sum(hits) / len(hits) if hits else None

    @property
    def n_reached(self) -> int:
        return sum(k is not None for k in self.iters_to_threshold)


def run_single(spec: ExperimentSpec, seed: int) -> RunTrace:
    """One run: initialization, then ``it_max`` steps of the variant.

    Entry 0 of the trace is the best fitness after initialization; entry
    ``k`` is the best fitness after ``k`` iterations.
    """
    objective = lookup(spec.objective_name, spec.n_dims)
    config = spec.swarm
    rng = make_rng(seed)
    try:
        state = init_swarm(config, objective, rng)
        trace = np.empty(config.it_max + 1)
        trace[0] = state.global_best_fit
        for k in range(1, config.it_max + 1):
            spec.variant.step(state, config, objective, rng)
            trace[k] = state.global_best_fit
    except Exception as exc:
        raise RunError(spec.label, seed, exc) from exc
    return RunTrace(seed=seed, best_fitness=trace, final_best_position=state.global_best_pos.copy())


def iterations_to_threshold(trace, epsilon: float) -> Optional[int]:
    """First iteration whose best-so-far fitness is ``<= epsilon``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be > 0")
    values = trace.best_fitness if isinstance(trace, RunTrace) else np.asarray(trace)
    hits = np.flatnonzero(values <= epsilon)
    return int(hits[0]) if hits.size else None


def aggregate(spec: ExperimentSpec, traces: Sequence[RunTrace]) -> AggregateResult:
    """Combine run traces; the result does not depend on the order of ``traces``."""
    runs = sorted(traces, key=lambda t: t.seed)
    if [t.seed for t in runs] != spec.seeds():
        raise ValueError("traces do not match the seeds of the experiment")
    matrix = np.stack([t.best_fitness for t in runs])
    snapshots = {}
    for s in spec.snapshot_iterations:
        col = matrix[:, s]
        snapshots[s] = SnapshotStats(
            mean=float(np.mean(col)),
            std=float(np.std(col)),
            min=float(np.min(col)),
            max=float(np.max(col)),
        )
    return AggregateResult(
        spec=spec,
        mean_trace=np.mean(matrix, axis=0),
        snapshots=snapshots,
        iters_to_threshold=[iterations_to_threshold(t, spec.epsilon) for t in runs],
        runs=runs,
    )


def _run_task(task):
    spec, seed = task
    return run_single(spec, seed)


def run_experiments(
    specs: Sequence[ExperimentSpec],
    jobs: int = 1,
    on_error: Optional[Callable[[ExperimentSpec, RunError], None]] = None,
) -> list[AggregateResult]:
    """Run every repetition of every spec, optionally over ``jobs`` processes.

    Without ``on_error`` the first failing run raises. With it, a failed
    experiment is reported through the callback and left out of the result.
    """
    per_spec = [[(spec, seed) for seed in spec.seeds()] for spec in specs]
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    results = []
    try:
        futures = [[pool.submit(_run_task, t) for t in tasks] for tasks in per_spec] if pool else None
        for i, spec in enumerate(specs):
            try:
                if pool:
                    traces = [f.result() for f in futures[i]]
                else:
                    traces = [_run_task(t) for t in per_spec[i]]
            except RunError as exc:
                if on_error is None:
                    raise
                on_error(spec, exc)
                continue
            results.append(aggregate(spec, traces))
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)
    return results


def run_repeated(spec: ExperimentSpec, jobs: int = 1) -> AggregateResult:
    return run_experiments([spec], jobs=jobs)[0]


@dataclass(frozen=True)
class ComparisonRow:
    objective: str
    dims: int
    variant: str
    snapshot_means: dict[int, float]
    iters_to_threshold_mean: Optional[float]
    n_reached: int
    repetitions: int
    result: AggregateResult = field(repr=False, compare=False)


def _check_consistent(specs: Sequence[ExperimentSpec]):
    if not specs:
        raise ConfigError("nothing to compare")
    first = specs[0]
    for s in specs[1:]:
        if (s.objective_name, s.swarm, s.snapshot_iterations) != (
            first.objective_name,
            first.swarm,
            first.snapshot_iterations,
        ):
            raise ConfigError(
                f"cannot compare {s.label} with {first.label}: objective, swarm "
                "settings and snapshots must match"
            )


def comparison_table(results: Sequence[AggregateResult]) -> list[ComparisonRow]:
    """Rows sorted by the mean at the last snapshot (ties keep input order)."""
    _check_consistent([r.spec for r in results])
    rows = [
        ComparisonRow(
            objective=r.spec.objective_name,
            dims=r.spec.n_dims,
            variant=r.spec.variant.name,
            snapshot_means={k: s.mean for k, s in r.snapshots.items()},
            iters_to_threshold_mean=r.iters_to_threshold_mean,
            n_reached=r.n_reached,
            repetitions=r.spec.repetitions,
            result=r,
        )
        for r in results
    ]
    final = max(results[0].spec.snapshot_iterations, default=None)
    if final is None:
        return rows
    return sorted(rows, key=lambda row: row.snapshot_means[final])


def compare_variants(specs: Sequence[ExperimentSpec], jobs: int = 1) -> list[ComparisonRow]:
    _check_consistent(specs)
    return comparison_table(run_experiments(specs, jobs=jobs))
