"""The five PSO variants as steppers over a :class:`~swarmlab.core.SwarmState`.

Each ``step_*`` function advances the state by one synchronous iteration in
place and returns it. All of them minimize.

``ldw``
    Linearly decreasing inertia weight PSO.
``epsom``
    LDW-PSO followed by a multiplicative mutation of the global best,
    ``G * (1 + 0.5 * eta)``, kept only if it improves the global best.
``psom``
    Fitness classification around the swarm mean: particles in the best band
    use only the cognitive term, the worst band only the social term, the
    rest the full update.
``mpso``
    LDW-PSO plus a position mutation that fires with a probability given by a
    decaying threshold, which also scales the mutation range.
``tpme``
    Classification within ``p * |mean|`` of the mean fitness. Good particles
    move cognitively, fair particles with the full update, bad particles
    socially until iteration ``ne``; after that bad particles are relocated to
    the best particle's position scaled by ``2 a eta + (1 - a)``, with their
    velocity reset. By default one ``eta`` is drawn per relocated particle
    (``tpme_eta="particle"``); ``tpme_eta="coordinate"`` draws one per
    coordinate instead.

Random draw order
-----------------
Per iteration, particles in index order, dimensions in index order. A
particle draws ``(r1, r2)`` per dimension for the full update, ``r1`` only for
a cognitive update, ``r2`` only for a social update and only ``eta`` (one
value, or ``n`` in coordinate mode) when it is relocated by TPME elitism.
EPSOM then draws ``n`` values of ``eta`` for the global-best mutation. MPSO
draws one trigger value per particle (index order) after the velocity draws,
followed by ``n`` values of ``eta`` for each triggered particle in index
order.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Callable, NamedTuple

import numpy as np

from .core import (
    ConfigError,
    SwarmConfig,
    SwarmState,
    apply_boundary,
    evaluate_swarm,
    inertia_weight,
    update_bests,
)

__all__ = [
    "ClassLabel",
    "MPSO_MUTATION_RULE",
    "PsomThresholds",
    "TPME_ETA_MODES",
    "VARIANT_NAMES",
    "VariantKind",
    "VariantSpec",
    "classify_psom",
    "classify_tpme",
    "mpso_threshold",
    "mutate_gbest_epsom",
    "step_epsom",
    "step_ldw",
    "step_mpso",
    "step_psom",
    "step_tpme",
    "tpme_multiplier",
]

MPSO_MUTATION_RULE = "uniform-offset:x+TH*(2*eta-1)*(upper-lower)/2"


class VariantKind(str, Enum):
    LDW = "ldw"
    EPSOM = "epsom"
    PSOM = "psom"
    MPSO = "mpso"
    TPME = "tpme"


VARIANT_NAMES = tuple(k.value for k in VariantKind)
TPME_ETA_MODES = ("particle", "coordinate")


class ClassLabel(IntEnum):
    GOOD = 0
    FAIR = 1
    BAD = 2


class PsomThresholds(NamedTuple):
    aver: float
    aver1: float
    aver2: float
    f_best: float
    f_worst: float


@dataclass(frozen=True)
class VariantSpec:
    """Algorithm choice plus its own parameters.

    ``mpso_mu`` is only read by M-PSO; the ``tpme_*`` fields only by PSO-TPME.
    """

    kind: VariantKind = VariantKind.TPME
    mpso_mu: float = 0.05
    tpme_p: float = 0.02
    tpme_ne: int = 3
    tpme_a: float = 0.5
    tpme_eta: str = "particle"

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", VariantKind(self.kind))
        except ValueError:
            raise ConfigError(
                f"unknown variant {self.kind!r}; valid names: {', '.join(VARIANT_NAMES)}"
            ) from None
        if not self.mpso_mu > 0:
            raise ConfigError("mpso_mu must be > 0")
        if not self.tpme_p > 0:
            raise ConfigError("tpme_p must be > 0")
        if not 0 < self.tpme_a <= 1:
            raise ConfigError("tpme_a must lie in (0, 1]")
        if int(self.tpme_ne) != self.tpme_ne or self.tpme_ne < 1:
            raise ConfigError("tpme_ne must be a positive integer")
        if self.tpme_eta not in TPME_ETA_MODES:
            raise ConfigError(f"tpme_eta must be one of {', '.join(TPME_ETA_MODES)}")

    @property
    def name(self) -> str:
        return self.kind.value

    def step(self, state: SwarmState, config: SwarmConfig, objective, rng) -> SwarmState:
        kind = self.kind
        if kind is VariantKind.LDW:
            return step_ldw(state, config, objective, rng)
        if kind is VariantKind.EPSOM:
            return step_epsom(state, config, objective, rng)
        if kind is VariantKind.PSOM:
            return step_psom(state, config, objective, rng)
        if kind is VariantKind.MPSO:
            return step_mpso(state, config, objective, rng, mu=self.mpso_mu)
        return step_tpme(
            state,
            config,
            objective,
            rng,
            p=self.tpme_p,
            ne=self.tpme_ne,
            a=self.tpme_a,
            eta_mode=self.tpme_eta,
        )


# per-particle draw kinds
_FULL, _COGNITIVE, _SOCIAL, _ELITE = 0, 1, 2, 3


def _draw(rng: np.random.Generator, kinds: np.ndarray, n: int, n_eta: int = 1):
    """Draw r1, r2 and eta for each particle following the documented order.

    ``eta`` has ``n_eta`` columns. Unused entries are zero.
    """
    N = kinds.shape[0]
    if (kinds == _FULL).all():
        r = rng.random((N, n, 2))
        return r[..., 0], r[..., 1], None

    counts = np.select([kinds == _FULL, kinds == _ELITE], [2 * n, n_eta], n)
    offsets = np.cumsum(counts) - counts
    flat = rng.random(int(counts.sum()))
    cols = np.arange(n)
    r1 = np.zeros((N, n))
    r2 = np.zeros((N, n))
    eta = np.zeros((N, n_eta))

    full = kinds == _FULL
    if full.any():
        base = offsets[full, None] + 2 * cols
        r1[full] = flat[base]
        r2[full] = flat[base + 1]
    for kind, target in ((_COGNITIVE, r1), (_SOCIAL, r2), (_ELITE, eta)):
        rows = kinds == kind
        if rows.any():
            target[rows] = flat[offsets[rows, None] + cols[: target.shape[1]]]
    return r1, r2, eta


def _velocities(state, config, w, r1, r2, use_cognitive=None, use_social=None):
    x = state.positions
    cognitive = config.c1 * r1 * (state.personal_best_pos - x)
    social = config.c2 * r2 * (state.global_best_pos - x)
    if use_cognitive is not None:
        cognitive = np.where(use_cognitive[:, None], cognitive, 0.0)
    if use_social is not None:
        social = np.where(use_social[:, None], social, 0.0)
    return w * state.velocities + cognitive + social


def _finish(state, config, objective, positions, velocities):
    positions, velocities = apply_boundary(
        config.boundary_policy, positions, velocities, config.bounds
    )
    state.positions = positions
    state.velocities = velocities
    state.iteration += 1
    update_bests(state, evaluate_swarm(objective, positions, state.iteration))
    return state


def _move_by_kind(state, config, rng, kinds, n_eta=1):
    """Shared update for classified swarms; returns new positions, velocities, eta."""
    w = inertia_weight(state.iteration, config)
    r1, r2, eta = _draw(rng, kinds, state.n_dims, n_eta)
    v = _velocities(
        state,
        config,
        w,
        r1,
        r2,
        use_cognitive=(kinds == _FULL) | (kinds == _COGNITIVE),
        use_social=(kinds == _FULL) | (kinds == _SOCIAL),
    )
    return state.positions + v, v, eta


def step_ldw(state: SwarmState, config: SwarmConfig, objective: Callable, rng) -> SwarmState:
    w = inertia_weight(state.iteration, config)
    r = rng.random((state.n_particles, state.n_dims, 2))
    v = _velocities(state, config, w, r[..., 0], r[..., 1])
    return _finish(state, config, objective, state.positions + v, v)


def mutate_gbest_epsom(gbest: np.ndarray, rng) -> np.ndarray:
    """``gbest * (1 + 0.5 * eta)`` with a fresh ``eta`` per coordinate."""
    gbest = np.asarray(gbest, dtype=float)
    return gbest * (1.0 + 0.5 * rng.random(gbest.shape[0]))


def step_epsom(state: SwarmState, config: SwarmConfig, objective: Callable, rng) -> SwarmState:
    """LDW step, then greedy global-best mutation.

    An accepted mutant also becomes the personal best of the particle that
    owned the global best, so the global best stays the best personal best.
    """
    step_ldw(state, config, objective, rng)
    candidate = mutate_gbest_epsom(state.global_best_pos, rng)
    value = float(evaluate_swarm(objective, candidate[None, :], state.iteration)[0])
    if value < state.global_best_fit:
        owner = int(np.argmin(state.personal_best_fit))
        state.personal_best_pos[owner] = candidate
        state.personal_best_fit[owner] = value
        state.global_best_pos = candidate.copy()
        state.global_best_fit = value
    return state


def classify_psom(fitness) -> tuple[PsomThresholds, np.ndarray]:
    """Three bands split at the midpoints between the mean and the extremes.

    Good if ``f <= (f_best + mean) / 2``, bad if ``f >= (f_worst + mean) / 2``,
    fair otherwise. Good is tested first, so an all-equal swarm is all good.
    """
    fitness = np.asarray(fitness, dtype=float)
    aver = float(np.mean(fitness))
    f_best = float(np.min(fitness))
    f_worst = float(np.max(fitness))
    aver2 = (f_best + aver) / 2
    aver1 = (f_worst + aver) / 2
    labels = np.full(fitness.shape[0], ClassLabel.FAIR, dtype=np.int8)
    labels[fitness >= aver1] = ClassLabel.BAD
    labels[fitness <= aver2] = ClassLabel.GOOD
    return PsomThresholds(aver, aver1, aver2, f_best, f_worst), labels


def step_psom(
    state: SwarmState,
    config: SwarmConfig,
    objective: Callable,
    rng,
    *,
    labels=None,
) -> SwarmState:
    """PSO-M step. ``labels`` overrides the classification (testing hook)."""
    if labels is None:
        _, labels = classify_psom(state.fitness)
    labels = np.asarray(labels)
    kinds = np.select(
        [labels == ClassLabel.GOOD, labels == ClassLabel.BAD], [_COGNITIVE, _SOCIAL], _FULL
    )
    positions, velocities, _ = _move_by_kind(state, config, rng, kinds)
    return _finish(state, config, objective, positions, velocities)


def mpso_threshold(i: int, it_max: int, mu: float) -> float:
    """``(1 - (i - 1) / (it_max - 1)) ** (1 / mu)`` for ``1 <= i <= it_max``."""
    if it_max < 2:
        raise ConfigError("mpso_threshold needs it_max >= 2")
    if not 1 <= i <= it_max:
        raise ConfigError(f"iteration {i} outside [1, {it_max}]")
    if not mu > 0:
        raise ConfigError("mu must be > 0")
    return (1.0 - (i - 1) / (it_max - 1)) ** (1.0 / mu)


def step_mpso(
    state: SwarmState,
    config: SwarmConfig,
    objective: Callable,
    rng,
    mu: float = 0.05,
) -> SwarmState:
    """LDW move, then a conditional uniform position mutation.

    A particle mutates when its trigger draw is below the threshold ``TH``;
    each coordinate then moves by ``TH * (2 eta - 1) * (upper - lower) / 2``.
    The velocity is left untouched.
    """
    th = mpso_threshold(state.iteration + 1, config.it_max, mu)
    w = inertia_weight(state.iteration, config)
    r = rng.random((state.n_particles, state.n_dims, 2))
    v = _velocities(state, config, w, r[..., 0], r[..., 1])
    positions = state.positions + v

    triggered = rng.random(state.n_particles) < th
    k = int(triggered.sum())
    if k:
        eta = rng.random((k, state.n_dims))
        half_range = th * config.bounds.width / 2
        positions[triggered] += (2.0 * eta - 1.0) * half_range
    return _finish(state, config, objective, positions, v)


def classify_tpme(fitness, p: float) -> np.ndarray:
    """Good below ``m - p|m|``, bad above ``m + p|m|``, fair inside (inclusive)."""
    if not p > 0:
        raise ConfigError("p must be > 0")
    fitness = np.asarray(fitness, dtype=float)
    m = float(np.mean(fitness))
    half = p * abs(m)
    labels = np.full(fitness.shape[0], ClassLabel.FAIR, dtype=np.int8)
    labels[fitness < m - half] = ClassLabel.GOOD
    labels[fitness > m + half] = ClassLabel.BAD
    return labels


def tpme_multiplier(eta, a: float):
    """Elite mutation factor ``2 a eta + (1 - a)``; lies in ``[1 - a, 1 + a]``."""
    return 2.0 * a * eta + (1.0 - a)


def step_tpme(
    state: SwarmState,
    config: SwarmConfig,
    objective: Callable,
    rng,
    p: float = 0.02,
    ne: int = 3,
    a: float = 0.5,
    eta_mode: str = "particle",
) -> SwarmState:
    """PSO-TPME step.

    The elite position is the current position of the particle with the
    lowest current fitness (lowest index on ties). Elitism is active once the
    iteration counter reaches ``ne``.
    """
    if eta_mode not in TPME_ETA_MODES:
        raise ConfigError(f"eta_mode must be one of {', '.join(TPME_ETA_MODES)}")
    labels = classify_tpme(state.fitness, p)
    bad = labels == ClassLabel.BAD
    elite = bad & (state.iteration >= ne)
    kinds = np.select(
        [labels == ClassLabel.GOOD, elite, bad], [_COGNITIVE, _ELITE, _SOCIAL], _FULL
    )
    n_eta = 1 if eta_mode == "particle" else state.n_dims
    positions, velocities, eta = _move_by_kind(state, config, rng, kinds, n_eta)
    if elite.any():
        best = state.positions[int(np.argmin(state.fitness))]
        positions[elite] = best * tpme_multiplier(eta[elite], a)
        velocities[elite] = 0.0
    return _finish(state, config, objective, positions, velocities)
