"""Value-iteration families on finite deterministic systems.

Every family runs the same Bellman kernel

    V_N(x) = min_u  w_N * cost(x, u) + f_N * V_{N-1}(f(x, u)),   V_0 = 0,

with per-step weight ``w_N`` and factor ``f_N``:

==========  =============  ===================
family      w_N            f_N
==========  =============  ===================
classic     1              1
gamma       1              gamma
cesaro      1              (N - 1) / N
beta        beta(k / N)    1 (backward in k)
==========  =============  ===================

Ties in the minimisation go to the smallest input index.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._backend import kernels
from .discount import DiscountFunction, discount
from .errors import AssumptionViolation, ExplosionError, InvalidDiscountError, NotConverged
from .orbits import optimal_orbit
from .system import TransitionSystem, simulate

BRUTE_FORCE_CAP = 10**7
TIE_BREAK = "smallest-input-index"


class CostVariant(str, enum.Enum):
    RAW = "raw"
    SHIFTED = "shifted"
    ROTATED = "rotated"


def stage_costs(
    sys: TransitionSystem,
    variant: CostVariant | str = CostVariant.RAW,
    ell_star: float | None = None,
    certificate=None,
) -> np.ndarray:
    """Per-edge stage costs for ``variant``.

    ``shifted`` subtracts ``ell_star`` (computed from the optimal orbit when
    omitted).  ``rotated`` uses the certificate's rotated cost, building one
    if needed, and refuses certificates whose verdict fails.
    """
    variant = CostVariant(variant)
    if variant is CostVariant.RAW:
        return np.asarray(sys.edge_cost)
    if variant is CostVariant.SHIFTED:
        if ell_star is None:
            ell_star = optimal_orbit(sys)[1]
        if not math.isfinite(ell_star):
            raise ValueError("shifted costs need a finite ell_star")
        return sys.edge_cost - ell_star
    if certificate is None:
        from .dissipativity import build_certificate

        certificate = build_certificate(sys)
    if not certificate.verdict.holds:
        raise AssumptionViolation("rotated costs need a certificate whose verdict holds")
    return np.asarray(certificate.rotated_cost)


@dataclass(frozen=True)
class Family:
    """Iteration family: ``classic``, ``gamma`` (with ``gamma``), ``cesaro`` or ``beta``."""

    name: str
    gamma: float | None = None
    beta: DiscountFunction | None = None

    def __post_init__(self):
        if self.name not in ("classic", "gamma", "cesaro", "beta"):
            raise ValueError(f"unknown family {self.name!r}")
        if self.name == "gamma":
            if self.gamma is None or not 0.0 < self.gamma < 1.0:
                raise InvalidDiscountError(f"gamma must lie in (0, 1), got {self.gamma!r}")
            object.__setattr__(self, "gamma", float(self.gamma))
        if self.name == "beta" and self.beta is None:
            raise ValueError("beta family needs a discount function")

    @property
    def label(self) -> str:
        if self.name == "gamma":
            return f"gamma({self.gamma!r})"
        if self.name == "beta":
            return f"beta({self.beta.id})"
        return self.name

    @property
    def params(self) -> str:
        if self.name == "gamma":
            return f"gamma={self.gamma!r}"
        if self.name == "beta":
            return f"beta={self.beta.id}"
        return ""


@dataclass(frozen=True)
class ValueTable:
    values: np.ndarray
    N: int
    family: str
    variant: CostVariant

    def __getitem__(self, x: int) -> float:
        return float(self.values[x])

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class Policy:
    """Greedy input index per state."""

    choice: np.ndarray
    N: int
    family: str

    def __getitem__(self, x: int) -> int:
        return int(self.choice[x])


@dataclass(frozen=True, eq=False)
class VIResult:
    """Value tables for horizons ``0..n_max`` and greedy policies for ``1..n_max``.

    ``values[N]`` is ``V_N``; ``choices[N - 1]`` holds the minimising input
    indices of the step that produced ``V_N``.
    """

    sys: TransitionSystem
    family: Family
    variant: CostVariant
    values: np.ndarray
    choices: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def table(self, N: int) -> ValueTable:
        return ValueTable(self.values[N], N, self.family.label, self.variant)

    def policy(self, N: int) -> Policy:
        if N < 1:
            raise ValueError("policies exist for horizons N >= 1")
        return Policy(self.choices[N - 1], N, self.family.label)

    def value(self, N: int, x) -> float:
        return float(self.values[N, self.sys.state_index(x)])

    def policy_input(self, N: int, x) -> str:
        return self.sys.inputs[int(self.choices[N - 1, self.sys.state_index(x)])].name

    def tables(self):
        return [self.table(N) for N in range(self.n_max + 1)]

    def policies(self):
        return [self.policy(N) for N in range(1, self.n_max + 1)]

    def richardson(self, N: int | None = None, period: int = 1) -> np.ndarray:
        """Extrapolated limit ``(N V_N - (N-p) V_{N-p}) / p``.

        Exact when ``V_N = V + a(N mod p) / N``, the leading-order behaviour of
        Cesàro values near a period-``p`` optimal orbit.
        """
        N = self.n_max if N is None else N
        p = period
        return (N * self.values[N] - (N - p) * self.values[N - p]) / p


def _run(sys, cost, weights, factors) -> tuple[np.ndarray, np.ndarray]:
    return kernels.value_iteration(
        sys.offsets,
        sys.edge_succ,
        sys.edge_input,
        np.ascontiguousarray(cost, dtype=np.float64),
        np.ascontiguousarray(weights, dtype=np.float64),
        np.ascontiguousarray(factors, dtype=np.float64),
        np.zeros(sys.n_states),
    )


def _check_horizon(n: int, least: int = 0) -> int:
    if int(n) != n or n < least:
        raise ValueError(f"horizon must be an integer >= {least}, got {n!r}")
    return int(n)


def cesaro_factors(n_max: int) -> np.ndarray:
    """``(N - 1) / N`` for ``N = 1..n_max``."""
    N = np.arange(1, n_max + 1, dtype=np.float64)
    return (N - 1.0) / N


def run_family(
    sys: TransitionSystem,
    family: Family,
    n_max: int,
    variant: CostVariant | str = CostVariant.RAW,
    ell_star: float | None = None,
    certificate=None,
) -> VIResult:
    """Forward recursion for ``classic``, ``gamma`` or ``cesaro``."""
    n_max = _check_horizon(n_max)
    variant = CostVariant(variant)
    cost = stage_costs(sys, variant, ell_star, certificate)
    if family.name == "classic":
        factors = np.ones(n_max)
    elif family.name == "gamma":
        factors = np.full(n_max, family.gamma)
    elif family.name == "cesaro":
        factors = cesaro_factors(n_max)
    else:
        raise ValueError("beta values have no forward recursion; use beta_value")
    values, choices = _run(sys, cost, np.ones(n_max), factors)
    return VIResult(sys, family, variant, values, choices)


def classic_vi(sys, variant=CostVariant.RAW, n_max: int = 100, ell_star=None, certificate=None) -> VIResult:
    return run_family(sys, Family("classic"), n_max, variant, ell_star, certificate)


def gamma_vi(sys, gamma: float, variant=CostVariant.RAW, n_max: int = 100, ell_star=None, certificate=None) -> VIResult:
    return run_family(sys, Family("gamma", gamma=gamma), n_max, variant, ell_star, certificate)


def cvi(sys, variant=CostVariant.RAW, n_max: int = 100, ell_star=None, certificate=None) -> VIResult:
    """Cesàro value iteration ``V_N = min_u [cost + (N-1)/N V_{N-1}(f)]``."""
    return run_family(sys, Family("cesaro"), n_max, variant, ell_star, certificate)


def beta_value(
    sys: TransitionSystem,
    beta: DiscountFunction | str,
    variant: CostVariant | str = CostVariant.RAW,
    N: int = 1,
    ell_star: float | None = None,
    certificate=None,
) -> tuple[ValueTable, Policy]:
    """Optimal ``sum_k beta(k/N) cost_k`` over ``N`` steps by backward DP.

    ``W_N = 0`` and ``W_k(x) = min_u [beta(k/N) cost(x, u) + W_{k+1}(f(x, u))]``;
    returns ``W_0`` and its minimisers.
    """
    if isinstance(beta, str):
        beta = discount(beta)
    N = _check_horizon(N, 1)
    variant = CostVariant(variant)
    cost = stage_costs(sys, variant, ell_star, certificate)
    weights = beta.weights(N)[::-1]
    values, choices = _run(sys, cost, weights, np.ones(N))
    label = Family("beta", beta=beta).label
    return ValueTable(values[N], N, label, variant), Policy(choices[N - 1], N, label)


def cesaro_weights(N: int) -> np.ndarray:
    """``1 - k/N`` for ``k = 0..N-1``."""
    return (N - np.arange(N, dtype=np.float64)) / N


def brute_force_values(
    sys: TransitionSystem,
    N: int,
    weights: Sequence[float],
    cost: Sequence[float] | None = None,
    cap: int = BRUTE_FORCE_CAP,
) -> np.ndarray:
    """Exhaustive minimum of ``sum_k weights[k] cost_k`` from every state.

    Enumerates every feasible input sequence of length ``N``; raises
    :class:`ExplosionError` once the number of partial sequences exceeds ``cap``.
    """
    N = _check_horizon(N)
    w = np.asarray(weights, dtype=np.float64)
    if len(w) != N:
        raise ValueError(f"need {N} weights, got {len(w)}")
    cost = sys.edge_cost if cost is None else np.asarray(cost, dtype=np.float64)
    origin = np.arange(sys.n_states)
    state = origin.copy()
    acc = np.zeros(sys.n_states)
    deg = np.diff(sys.offsets)
    for k in range(N):
        counts = deg[state]
        total = int(counts.sum())
        if total > cap:
            raise ExplosionError(f"brute force needs more than {cap} partial sequences at step {k + 1}")
        first = np.repeat(sys.offsets[state] - np.cumsum(counts) + counts, counts)
        edge = first + np.arange(total)
        origin = np.repeat(origin, counts)
        acc = np.repeat(acc, counts) + w[k] * cost[edge]
        state = sys.edge_succ[edge]
    best = np.full(sys.n_states, np.inf)
    np.minimum.at(best, origin, acc)
    return best


def brute_force_value(sys, x, N: int, weights: Sequence[float], cost=None, cap: int = BRUTE_FORCE_CAP) -> float:
    return float(brute_force_values(sys, N, weights, cost, cap)[sys.state_index(x)])


def cesaro_cost_direct(
    sys: TransitionSystem,
    x,
    u_seq,
    variant: CostVariant | str = CostVariant.RAW,
    ell_star: float | None = None,
    certificate=None,
) -> tuple[float, float]:
    """Cesàro cost of one input sequence in both forms.

    Returns ``(mean of partial sums, sum of (1 - k/N) cost_k)``.
    """
    traj = simulate(sys, x, u_seq)
    cost = stage_costs(sys, variant, ell_star, certificate)
    stage = [float(cost[sys.edge_index(xk, uk)]) for xk, uk in traj.pairs()]
    N = len(stage)
    if N == 0:
        return 0.0, 0.0
    partial = 0.0
    double = 0.0
    weighted = 0.0
    for k, c in enumerate(stage):
        partial += c
        double += partial
        weighted += (1.0 - k / N) * c
    return double / N, weighted


def bellman_residual(
    sys: TransitionSystem,
    V,
    variant: CostVariant | str = CostVariant.RAW,
    ell_star: float | None = None,
    certificate=None,
) -> float:
    """``max_x |V(x) - min_u [cost(x, u) + V(f(x, u))]|``."""
    v = np.asarray(V.values if isinstance(V, ValueTable) else V, dtype=np.float64)
    cost = stage_costs(sys, variant, ell_star, certificate)
    backup = np.minimum.reduceat(cost + v[sys.edge_succ], sys.offsets[:-1])
    return float(np.max(np.abs(v - backup)))


@dataclass(frozen=True)
class PolicyConvergence:
    n_star: int
    window: int
    n_cap: int
    policy: Policy

    @property
    def rule(self) -> str:
        return f"first N with identical greedy policy on horizons N..N+{self.window}"


def policy_convergence_N(
    sys: TransitionSystem,
    family: Family,
    variant: CostVariant | str = CostVariant.RAW,
    window: int = 50,
    n_cap: int = 5000,
    result: VIResult | None = None,
) -> PolicyConvergence:
    """Smallest ``N`` whose greedy policy repeats unchanged for ``window`` more horizons.

    A heuristic stand-in for the horizon at which the policy has converged.
    Raises :class:`NotConverged` if no such ``N`` with ``N + window <= n_cap``
    exists.  A precomputed ``result`` reaching ``n_cap`` may be passed in.
    """
    if n_cap < window or window < 0:
        raise ValueError("need 0 <= window <= n_cap")
    if result is None:
        result = run_family(sys, family, n_cap, variant)
    ch = result.choices[:n_cap]
    # changed[M] is True when policy(M) differs from policy(M-1); index 0 unused
    changed = np.zeros(n_cap + 1, dtype=bool)
    changed[2:] = np.any(ch[1:] != ch[:-1], axis=1)
    for N in range(1, n_cap - window + 1):
        if not changed[N + 1 : N + window + 1].any():
            return PolicyConvergence(N, window, n_cap, result.policy(N))
    raise NotConverged(f"{family.label} policy not stable for {window} horizons within N={n_cap}")


def difference_sequence(sys: TransitionSystem, x, n_max: int) -> np.ndarray:
    """``d_N = V^ces_N(x) - V^ces_{N-1}(x)`` on raw costs for ``N = 1..n_max``.

    ``x=None`` returns one column per state.
    """
    values = cvi(sys, CostVariant.RAW, n_max).values
    d = np.diff(values, axis=0)
    return d if x is None else d[:, sys.state_index(x)]
