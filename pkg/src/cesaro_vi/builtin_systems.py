"""Built-in example systems and a random system generator."""
from __future__ import annotations

import numpy as np

from .system import TransitionSystem

BUILTINS = ("fig1", "fig2", "linear")


def fig1() -> TransitionSystem:
    """Three states; the 2-cycle x1 <-> x2 is optimal with average cost 0."""
    return TransitionSystem.from_edges(
        [
            ("x1", "u12", "x2", -2.0),
            ("x2", "u21", "x1", 2.0),
            ("x3", "u31", "x1", 0.1),
            ("x3", "u32", "x2", 0.0),
        ],
        states=("x1", "x2", "x3"),
    )


def fig2() -> TransitionSystem:
    """Four states with two zero-cost self-loops (x1 and x2)."""
    return TransitionSystem.from_edges(
        [
            ("x0", "u01", "x1", 2.0),
            ("x0", "u02", "x2", 1.0),
            ("x1", "u11", "x1", 0.0),
            ("x1", "u13", "x3", -3.0),
            ("x2", "u22", "x2", 0.0),
            ("x2", "u23", "x3", -1.0),
            ("x3", "u30", "x0", 5.0),
        ],
        states=("x0", "x1", "x2", "x3"),
    )


def linear_cost(x: int, u: int, offset: float = 0.0) -> float:
    # integer numerator / 10 gives the correctly rounded decimal, so the
    # optimal 2-cycle costs are exact negatives of each other
    return ((x - 4) ** 2 - (u - 4) ** 2 + 63) / 10 + offset


def linear(offset: float = 0.0) -> TransitionSystem:
    """``x+ = x + u`` on x in [1, 9], u in [-8, 8], cost ``0.1((x-4)^2-(u-4)^2)+6.3``.

    ``offset`` is added to every stage cost.
    """
    xs = range(1, 10)
    us = range(-8, 9)
    edges = [
        (str(x), str(u), str(x + u), linear_cost(x, u, offset))
        for x in xs
        for u in us
        if 1 <= x + u <= 9
    ]
    return TransitionSystem.from_edges(
        edges,
        state_coords={str(x): (float(x),) for x in xs},
        input_coords={str(u): (float(u),) for u in us},
        states=[str(x) for x in xs],
        inputs=[str(u) for u in us],
    )


def builtin(name: str) -> TransitionSystem:
    try:
        return {"fig1": fig1, "fig2": fig2, "linear": linear}[name]()
    except KeyError:
        raise ValueError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}") from None


def random_system(
    rng: np.random.Generator,
    max_states: int = 5,
    max_inputs: int = 3,
    cost_range: tuple[float, float] = (-2.0, 2.0),
    n_states: int | None = None,
) -> TransitionSystem:
    """Random system with 1..max_inputs feasible inputs per state.

    Input ``j`` at any state is named ``u<j>``; successors and costs are drawn
    uniformly.
    """
    nx = n_states if n_states is not None else int(rng.integers(1, max_states + 1))
    edges = []
    for x in range(nx):
        k = int(rng.integers(1, max_inputs + 1))
        for j in range(k):
            y = int(rng.integers(0, nx))
            c = float(rng.uniform(*cost_range))
            edges.append((f"s{x}", f"u{j}", f"s{y}", c))
    return TransitionSystem.from_edges(
        edges,
        states=[f"s{x}" for x in range(nx)],
        inputs=[f"u{j}" for j in range(max_inputs)],
    )
