"""Discount profiles ``beta: [0, 1] -> [0, 1]`` for finite-horizon weighting.

Stage ``k`` of an ``N``-step horizon is weighted by ``beta(k / N)``.  The
linear profile ``1 - xi`` reproduces the Cesàro average.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidDiscountError

GRID_STEP = 1e-3
END_SLOPE = -1e-6
_TOL = 1e-12


@dataclass(frozen=True)
class DiscountFunction:
    """A named, validated discount profile.

    ``lipschitz`` is estimated from the validation grid when not supplied.
    Construction runs :func:`validate_discount` and raises
    :class:`InvalidDiscountError` on failure.
    """

    id: str
    evaluator: Callable[[float], float] = field(repr=False)
    lipschitz: float | None = None

    def __post_init__(self):
        slope = validate_discount(self.evaluator)
        if self.lipschitz is None:
            object.__setattr__(self, "lipschitz", slope)

    def __call__(self, xi: float) -> float:
        return float(self.evaluator(xi))

    def weights(self, n: int) -> np.ndarray:
        """``[beta(0/n), beta(1/n), ..., beta((n-1)/n)]``."""
        return np.array([self(k / n) for k in range(n)], dtype=np.float64)

    @classmethod
    def linear(cls) -> "DiscountFunction":
        return cls("linear", lambda xi: 1.0 - xi, 1.0)

    @classmethod
    def quad(cls) -> "DiscountFunction":
        return cls("quad", lambda xi: 1.0 - xi * xi, 2.0)

    @classmethod
    def from_table(cls, xi: Sequence[float], values: Sequence[float], id: str = "table") -> "DiscountFunction":
        """Piecewise-linear interpolation of ``(xi, beta)`` samples."""
        xs = np.asarray(xi, dtype=np.float64)
        ys = np.asarray(values, dtype=np.float64)
        if xs.ndim != 1 or xs.shape != ys.shape or len(xs) < 2:
            raise InvalidDiscountError("table needs matching 1-d xi and value arrays of length >= 2")
        if xs[0] != 0.0 or xs[-1] != 1.0 or np.any(np.diff(xs) <= 0):
            raise InvalidDiscountError("table xi must increase strictly from 0 to 1")
        lip = float(np.max(np.abs(np.diff(ys) / np.diff(xs))))
        return cls(id, lambda t: float(np.interp(t, xs, ys)), lip)


DISCOUNTS = {"linear": DiscountFunction.linear, "quad": DiscountFunction.quad}


def discount(name: str) -> DiscountFunction:
    try:
        return DISCOUNTS[name]()
    except KeyError:
        raise InvalidDiscountError(f"unknown discount {name!r}; choose from {', '.join(DISCOUNTS)}") from None


def validate_discount(beta: Callable[[float], float]) -> float:
    """Grid check of the admissibility conditions; returns the largest grid slope.

    Checks ``beta(0) = 1``, ``beta(1) = 0``, values in ``[0, 1]``,
    monotone non-increase on a ``1e-3`` grid, and a strictly negative
    one-sided slope at ``xi = 1``.
    """
    n = round(1 / GRID_STEP)
    grid = np.linspace(0.0, 1.0, n + 1)
    try:
        vals = np.array([float(beta(t)) for t in grid])
    except Exception as exc:  # evaluator failures are invalid input
        raise InvalidDiscountError(f"discount evaluator failed: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise InvalidDiscountError("discount takes non-finite values")
    if abs(vals[0] - 1.0) > _TOL:
        raise InvalidDiscountError(f"beta(0) must be 1, got {vals[0]!r}")
    if abs(vals[-1]) > _TOL:
        raise InvalidDiscountError(f"beta(1) must be 0, got {vals[-1]!r}")
    if vals.min() < -_TOL or vals.max() > 1.0 + _TOL:
        raise InvalidDiscountError("discount leaves [0, 1]")
    steps = np.diff(vals)
    if np.any(steps > _TOL):
        i = int(np.argmax(steps))
        raise InvalidDiscountError(f"discount increases between xi={grid[i]:.3f} and xi={grid[i + 1]:.3f}")
    end = (vals[-1] - float(beta(1.0 - GRID_STEP))) / GRID_STEP
    if end > END_SLOPE:
        raise InvalidDiscountError(f"slope at xi=1 is {end!r}, must be <= {END_SLOPE}")
    return float(np.max(np.abs(steps)) / GRID_STEP)
