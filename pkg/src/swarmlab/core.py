"""Swarm state, random streams and the basic PSO update kernels.

All swarm-level operations follow a minimization convention. A single run is
synchronous: every particle is evaluated, bests are updated, then every
particle moves using the same global best.

Random draw order
-----------------
Draws come from one :class:`numpy.random.Generator` per run. Within an
iteration particles are visited in index order, and for each particle
dimensions in index order. A full velocity update draws ``r1`` then ``r2`` for
each dimension; a cognitive update draws only ``r1``, a social update only
``r2``. Variant-specific draws are documented by the variant steppers.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

__all__ = [
    "Bounds",
    "BoundaryPolicy",
    "ConfigError",
    "EvaluationError",
    "SwarmConfig",
    "SwarmState",
    "VelocityMode",
    "apply_boundary",
    "evaluate_swarm",
    "inertia_weight",
    "init_swarm",
    "make_rng",
    "position_update",
    "update_bests",
    "velocity_update",
]

_SEED_MASK = (1 << 64) - 1


class ConfigError(ValueError):
    """Raised for an invalid swarm, variant or experiment configuration."""


class EvaluationError(RuntimeError):
    """Raised when the objective returns a non-finite value."""

    def __init__(self, particle: int, iteration: int, value: float):
        self.particle = particle
        self.iteration = iteration
        self.value = value
        super().__init__(
            f"non-finite fitness {value!r} for particle {particle} "
            f"at iteration {iteration}"
        )


class BoundaryPolicy(str, Enum):
    NONE = "none"
    CLAMP = "clamp"


class VelocityMode(str, Enum):
    COGNITIVE = "cognitive"
    SOCIAL = "social"
    FULL = "full"


@dataclass(frozen=True)
class Bounds:
    """Box applied uniformly to every dimension."""

    lower: float = -100.0
    upper: float = 100.0

    def __post_init__(self):
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ConfigError("bounds must be finite")
        if self.lower > self.upper:
            raise ConfigError(
                f"lower bound {self.lower} is greater than upper bound {self.upper}"
            )

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class SwarmConfig:
    """Parameters shared by every PSO variant.

    Defaults are the settings used for the benchmark comparison: 40
    particles, 2000 iterations, inertia decaying linearly from 0.9 to 0.1 and
    both acceleration factors equal to 1.4962.
    """

    n_particles: int = 40
    n_dims: int = 30
    it_max: int = 2000
    w_max: float = 0.9
    w_min: float = 0.1
    c1: float = 1.4962
    c2: float = 1.4962
    bounds: Bounds = Bounds()
    boundary_policy: BoundaryPolicy = BoundaryPolicy.NONE

    def __post_init__(self):
        if self.n_particles < 1:
            raise ConfigError("n_particles must be >= 1")
        if self.n_dims < 1:
            raise ConfigError("n_dims must be >= 1")
        if self.it_max < 0:
            raise ConfigError("it_max must be >= 0")
        if self.w_min > self.w_max:
            raise ConfigError("w_min must not exceed w_max")
        # accept plain strings for the policy
        object.__setattr__(self, "boundary_policy", BoundaryPolicy(self.boundary_policy))


@dataclass
class SwarmState:
    """Mutable state of one run. Arrays are owned by the state."""

    positions: np.ndarray
    velocities: np.ndarray
    personal_best_pos: np.ndarray
    personal_best_fit: np.ndarray
    global_best_pos: np.ndarray
    global_best_fit: float
    fitness: np.ndarray
    iteration: int = 0

    @property
    def n_particles(self) -> int:
        return self.positions.shape[0]

    @property
    def n_dims(self) -> int:
        return self.positions.shape[1]

    def copy(self) -> "SwarmState":
        return SwarmState(
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            personal_best_pos=self.personal_best_pos.copy(),
            personal_best_fit=self.personal_best_fit.copy(),
            global_best_pos=self.global_best_pos.copy(),
            global_best_fit=self.global_best_fit,
            fitness=self.fitness.copy(),
            iteration=self.iteration,
        )


def make_rng(seed: int) -> np.random.Generator:
    """Return the per-run random stream for ``seed`` (any Python int).

    Seeds are reduced modulo 2**64 so negative seeds are accepted.
    """
    return np.random.Generator(np.random.PCG64(int(seed) & _SEED_MASK))


def evaluate_swarm(
    objective: Callable[[np.ndarray], np.ndarray], positions: np.ndarray, iteration: int
) -> np.ndarray:
    """Evaluate all rows of ``positions`` and reject non-finite values."""
    fitness = np.asarray(objective(positions), dtype=float).reshape(positions.shape[0])
    bad = ~np.isfinite(fitness)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise EvaluationError(i, iteration, float(fitness[i]))
    return fitness


def init_swarm(
    config: SwarmConfig,
    objective: Callable[[np.ndarray], np.ndarray],
    rng: np.random.Generator,
) -> SwarmState:
    """Draw uniform positions inside the bounds, zero velocities, seed bests."""
    lo, hi = config.bounds.lower, config.bounds.upper
    shape = (config.n_particles, config.n_dims)
    positions = lo + (hi - lo) * rng.random(shape)
    # guards the closed interval against rounding at the upper end
    np.clip(positions, lo, hi, out=positions)
    fitness = evaluate_swarm(objective, positions, 0)
    g = int(np.argmin(fitness))
    return SwarmState(
        positions=positions,
        velocities=np.zeros(shape),
        personal_best_pos=positions.copy(),
        personal_best_fit=fitness.copy(),
        global_best_pos=positions[g].copy(),
        global_best_fit=float(fitness[g]),
        fitness=fitness,
        iteration=0,
    )


def inertia_weight(it: int, config: SwarmConfig) -> float:
    """Linearly decreasing inertia: ``w_max - it * (w_max - w_min) / it_max``."""
    if config.it_max == 0:
        return config.w_max
    return config.w_max - it * (config.w_max - config.w_min) / config.it_max


def velocity_update(
    mode: VelocityMode | str,
    state: SwarmState,
    particle_index: int,
    w: float,
    config: SwarmConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """New velocity of one particle.

    ``full`` is the standard inertia-weight update. ``cognitive`` drops the
    global-best term and ``social`` drops the personal-best term; each mode
    draws only the random factors it uses.
    """
    mode = VelocityMode(mode)
    i = particle_index
    x = state.positions[i]
    n = x.shape[0]
    r1 = r2 = None
    if mode is VelocityMode.FULL:
        r = rng.random((n, 2))
        r1, r2 = r[:, 0], r[:, 1]
    elif mode is VelocityMode.COGNITIVE:
        r1 = rng.random(n)
    else:
        r2 = rng.random(n)

    v = w * state.velocities[i]
    if r1 is not None:
        v = v + config.c1 * r1 * (state.personal_best_pos[i] - x)
    if r2 is not None:
        v = v + config.c2 * r2 * (state.global_best_pos - x)
    return v


def position_update(state: SwarmState, particle_index: int, new_velocity: np.ndarray) -> np.ndarray:
    x = state.positions[particle_index]
    new_velocity = np.asarray(new_velocity, dtype=float)
    if new_velocity.shape != x.shape:
        raise ValueError(f"velocity has shape {new_velocity.shape}, expected {x.shape}")
    return x + new_velocity


def apply_boundary(
    policy: BoundaryPolicy | str,
    position: np.ndarray,
    velocity: np.ndarray,
    bounds: Bounds,
) -> tuple[np.ndarray, np.ndarray]:
    """Apply the boundary policy to positions (any shape) and matching velocities.

    ``clamp`` clips coordinates to the box and zeroes the velocity component of
    every clipped coordinate. Inputs are not modified.
    """
    if BoundaryPolicy(policy) is BoundaryPolicy.NONE:
        return position, velocity
    position = np.asarray(position, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    clipped = np.clip(position, bounds.lower, bounds.upper)
    out = clipped != position
    return clipped, np.where(out, 0.0, velocity)


def update_bests(state: SwarmState, fitness: np.ndarray) -> SwarmState:
    """Record ``fitness`` for the current positions and refresh the bests.

    A personal best is replaced only on strict improvement. When several
    particles tie for a new global best the lowest index wins.
    """
    fitness = np.asarray(fitness, dtype=float)
    bad = ~np.isfinite(fitness)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise EvaluationError(i, state.iteration, float(fitness[i]))
    state.fitness = fitness
    improved = fitness < state.personal_best_fit
    if improved.any():
        state.personal_best_fit[improved] = fitness[improved]
        state.personal_best_pos[improved] = state.positions[improved]
    g = int(np.argmin(fitness))
    if fitness[g] < state.global_best_fit:
        state.global_best_fit = float(fitness[g])
        state.global_best_pos = state.positions[g].copy()
    return state
