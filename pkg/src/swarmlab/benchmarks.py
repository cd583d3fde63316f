"""Multi-dimensional benchmark objectives.

Every function accepts a single point of shape ``(n,)`` or a batch of shape
``(m, n)`` and returns a float or an array of shape ``(m,)``. Angles are in
radians.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "ObjectiveFunction",
    "RegistryError",
    "DimensionError",
    "OBJECTIVES",
    "griewank",
    "lookup",
    "rastrigin",
    "rosenbrock",
    "rosenbrock_as_printed",
]


class RegistryError(KeyError):
    def __str__(self):
        return str(self.args[0])


class DimensionError(ValueError):
    pass


def _as_batch(x):
    x = np.asarray(x, dtype=float)
    return x, x.ndim == 1


def _finish(values, single):
    return float(values) if single else values


def rosenbrock(x):
    """Sum over i < n of ``100 (x[i+1] - x[i]**2)**2 + (1 - x[i])**2``.

    Minimum 0 at the all-ones vector. Needs at least two dimensions.
    """
    x, single = _as_batch(x)
    if x.shape[-1] < 2:
        raise DimensionError("rosenbrock needs n >= 2")
    head, tail = x[..., :-1], x[..., 1:]
    return _finish(np.sum(100.0 * (tail - head**2) ** 2 + (1.0 - head) ** 2, axis=-1), single)


def rosenbrock_as_printed(x):
    """Variant with the square on the leading coordinate:
    ``100 (x[i+1]**2 - x[i])**2 + (1 - x[i])**2``. Also 0 at the all-ones vector.
    """
    x, single = _as_batch(x)
    if x.shape[-1] < 2:
        raise DimensionError("rosenbrock needs n >= 2")
    head, tail = x[..., :-1], x[..., 1:]
    return _finish(np.sum(100.0 * (tail**2 - head) ** 2 + (1.0 - head) ** 2, axis=-1), single)


def rastrigin(x):
    x, single = _as_batch(x)
    return _finish(np.sum(x**2 - 10.0 * np.cos(2.0 * np.pi * x) + 10.0, axis=-1), single)


def griewank(x):
    x, single = _as_batch(x)
    idx = np.sqrt(np.arange(1, x.shape[-1] + 1, dtype=float))
    total = np.sum(x**2, axis=-1) / 4000.0 - np.prod(np.cos(x / idx), axis=-1) + 1.0
    return _finish(total, single)


@dataclass(frozen=True)
class ObjectiveFunction:
    """A named objective bound to a dimension, with its known minimizer."""

    name: str
    n_dims: int
    function: Callable = field(repr=False)
    known_optimum_value: float
    known_optimizer: np.ndarray = field(repr=False, compare=False)

    def evaluate(self, x):
        return self.function(x)

    __call__ = evaluate


# name -> (function, minimum dimension, optimizer coordinate)
OBJECTIVES: dict[str, tuple[Callable, int, float]] = {
    "griewank": (griewank, 1, 0.0),
    "rastrigin": (rastrigin, 1, 0.0),
    "rosenbrock": (rosenbrock, 2, 1.0),
    "rosenbrock-as-printed": (rosenbrock_as_printed, 2, 1.0),
}


def lookup(name: str, n_dims: int) -> ObjectiveFunction:
    """Return the registered objective ``name`` in ``n_dims`` dimensions."""
    try:
        func, min_dims, coord = OBJECTIVES[name]
    except KeyError:
        valid = ", ".join(sorted(OBJECTIVES))
        raise RegistryError(f"unknown objective {name!r}; valid names: {valid}") from None
    if n_dims < min_dims:
        raise DimensionError(f"{name} needs at least {min_dims} dimensions, got {n_dims}")
    return ObjectiveFunction(
        name=name,
        n_dims=n_dims,
        function=func,
        known_optimum_value=0.0,
        known_optimizer=np.full(n_dims, coord),
    )
