"""Constructive strict-dissipativity certificate for finite systems.

Pipeline: suboptimality gap ``delta`` of the optimal orbit, a linear
``alpha(r) = c r`` with ``alpha_max < delta``, supply rate
``s = l - l_star - alpha(dist)``, available storage ``lambda`` (longest-path
fixpoint of ``-s``) and the rotated stage cost
``l_rot = l - l_star + lambda(x) - lambda(f(x, u))``.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import GapNotPositiveError, MinUniqueError, PositiveCycleError
from .orbits import (
    Orbit,
    as_orbit_set,
    check_min_unique,
    fmt_real,
    optimal_orbit,
    orbit_distance,
    pair_distances,
    resolve_metric,
)
from .system import TransitionSystem, simulate

EPS = 1e-3
EQ_TOL = 1e-12
INEQ_TOL = 1e-9
GAP_TOL = 1e-9


def suboptimality_gap(sys: TransitionSystem, star: Orbit, orbits=None) -> float:
    """Smallest excess average cost of any minimal orbit that is not optimal.

    Returns ``math.inf`` when every orbit is optimal.  Raises
    :class:`GapNotPositiveError` if the gap is numerically zero.
    """
    orbits = as_orbit_set(sys, orbits)
    ell = star.average_cost
    excess = orbits.average_costs - ell
    scale = np.maximum(1.0, np.maximum(abs(ell), np.abs(orbits.average_costs)))
    worse = excess > EQ_TOL * scale
    if not worse.any():
        return math.inf
    delta = float(excess[worse].min())
    if delta <= GAP_TOL:
        raise GapNotPositiveError(f"suboptimality gap {delta!r} is not positive")
    return delta


def alpha_coefficient(delta: float, d_max: float, eps: float = EPS, default: float = 1.0) -> float:
    """Slope ``c = (1 - eps) delta / d_max`` so that ``c * d_max < delta``."""
    if math.isinf(delta) or d_max <= 0.0:
        return default
    if delta <= 0.0:
        raise GapNotPositiveError(f"delta must be positive, got {delta!r}")
    return (1.0 - eps) * delta / d_max


def build_alpha(
    delta: float,
    sys: TransitionSystem,
    star: Orbit,
    metric: str | None = None,
    eps: float = EPS,
    default: float = 1.0,
) -> float:
    d_max = float(pair_distances(sys, star, metric).max())
    return alpha_coefficient(delta, d_max, eps, default)


def supply_rate(
    sys: TransitionSystem,
    pair,
    star: Orbit,
    ell_star: float,
    alpha_coeff: float,
    metric: str | None = None,
) -> float:
    x, u = pair
    return sys.cost(x, u) - ell_star - alpha_coeff * orbit_distance(sys, pair, star, metric)


def supply_rates(
    sys: TransitionSystem, star: Orbit, ell_star: float, alpha_coeff: float, metric: str | None = None
) -> np.ndarray:
    """Supply rate of every feasible pair, in edge order."""
    return sys.edge_cost - ell_star - alpha_coeff * pair_distances(sys, star, metric)


def available_storage(sys: TransitionSystem, supply: Sequence[float]) -> np.ndarray:
    """Available storage ``sup_N sup_u sum(-s)`` by value iteration from zero.

    ``lambda <- max(0, max_u [-s(x, u) + lambda(f(x, u))])`` until no entry
    grows by more than 1e-12 (relative).  If values keep growing after
    ``N_X * |edges|`` sweeps some cycle has positive ``-s`` sum and
    :class:`PositiveCycleError` is raised (its ``last_iterate`` holds the
    truncated table).
    """
    neg_s = -np.asarray(supply, dtype=np.float64)
    starts = sys.offsets[:-1]
    lam = np.zeros(sys.n_states)
    for _ in range(sys.n_states * sys.n_edges):
        new = np.maximum(0.0, np.maximum.reduceat(neg_s + lam[sys.edge_succ], starts))
        grow = new > lam + 1e-12 * np.maximum(1.0, np.abs(lam))
        if not grow.any():
            return lam
        lam = np.where(grow, new, lam)
    err = PositiveCycleError("available storage is unbounded: some cycle has positive -s sum")
    err.last_iterate = lam
    raise err


def rotated_cost_table(sys: TransitionSystem, storage: Sequence[float], ell_star: float) -> np.ndarray:
    """``l - l_star + lambda(x) - lambda(f(x, u))`` for every pair, in edge order."""
    lam = np.asarray(storage, dtype=np.float64)
    return sys.edge_cost - ell_star + lam[sys.edge_state] - lam[sys.edge_succ]


@dataclass(frozen=True)
class CertificateVerdict:
    holds: bool
    pair: tuple[int, int] | None = None
    margin: float = 0.0
    violations: tuple[tuple[int, int], ...] = ()

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True, eq=False)
class DissipativityCertificate:
    """Per-edge arrays follow the edge order of ``sys``."""

    sys: TransitionSystem
    orbit: Orbit
    ell_star: float
    delta: float
    alpha_coeff: float
    metric: str
    storage: np.ndarray
    distances: np.ndarray
    rotated_cost: np.ndarray
    verdict: CertificateVerdict = field(default=CertificateVerdict(False))

    @property
    def lambda_bar(self) -> float:
        return float(np.max(np.abs(self.storage)))

    def alpha(self, r):
        return self.alpha_coeff * r

    def rotated(self, x, u) -> float:
        return float(self.rotated_cost[self.sys.edge_index(self.sys.state_index(x), self.sys.input_index(u))])

    def with_verdict(self, verdict: CertificateVerdict) -> "DissipativityCertificate":
        return dataclasses.replace(self, verdict=verdict)

    def to_csv(self) -> str:
        sys = self.sys
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([
            "header",
            f"delta={fmt_real(self.delta)}",
            f"alpha_coeff={self.alpha_coeff!r}",
            f"ell_star={self.ell_star!r}",
            f"verdict={'holds' if self.verdict.holds else 'violated'}",
            f"metric={self.metric}",
            f"lambda_bar={self.lambda_bar!r}",
        ])
        for s, v in zip(sys.states, self.storage):
            w.writerow(["lambda", s.name, repr(float(v))])
        for x, u, v in zip(sys.edge_state, sys.edge_input, self.rotated_cost):
            w.writerow(["rotcost", sys.states[x].name, sys.inputs[u].name, repr(float(v))])
        return buf.getvalue()


def verify_certificate(sys: TransitionSystem, cert: DissipativityCertificate) -> CertificateVerdict:
    """Check ``l_rot >= alpha(dist) - 1e-9`` everywhere and ``l_rot = 0`` on the orbit."""
    margin = cert.rotated_cost - cert.alpha_coeff * cert.distances
    on_orbit = np.zeros(sys.n_edges, dtype=bool)
    for x, u in cert.orbit.pairs:
        on_orbit[sys.edge_index(x, u)] = True
    margin = np.where(on_orbit, -np.abs(cert.rotated_cost), margin)
    bad = np.flatnonzero(margin < -INEQ_TOL)
    if not len(bad):
        return CertificateVerdict(True, margin=float(margin.min()))
    pairs = sys.pairs()
    worst = int(bad[np.argmin(margin[bad])])
    return CertificateVerdict(
        False, pairs[worst], float(margin[worst]), tuple(pairs[int(e)] for e in bad)
    )


def build_certificate(
    sys: TransitionSystem,
    metric: str | None = None,
    orbits=None,
    force: bool = False,
    eps: float = EPS,
    default_alpha: float = 1.0,
) -> DissipativityCertificate:
    """Run the whole construction and verify the result.

    Raises :class:`MinUniqueError`, :class:`GapNotPositiveError` or
    :class:`PositiveCycleError` when an assumption fails.  With
    ``force=True`` those failures are tolerated where possible and reflected
    in the returned verdict instead (a diverging storage is truncated at the
    iteration cap).
    """
    metric = resolve_metric(sys, metric)
    orbits = as_orbit_set(sys, orbits)
    star, ell_star = optimal_orbit(sys, orbits)
    check = check_min_unique(sys, star, orbits, metric)
    if not check.holds and not force:
        raise MinUniqueError(f"optimal orbit is not minimal and unique: {check.reason}", check.witness)
    delta = suboptimality_gap(sys, star, orbits)
    dist = pair_distances(sys, star, metric)
    d_max = float(dist.max())
    c = alpha_coefficient(delta, d_max, eps, default_alpha)
    supply = sys.edge_cost - ell_star - c * dist
    try:
        lam = available_storage(sys, supply)
    except PositiveCycleError as exc:
        if not force:
            raise
        lam = exc.last_iterate
    cert = DissipativityCertificate(
        sys, star, ell_star, delta, c, metric, lam, dist, rotated_cost_table(sys, lam, ell_star)
    )
    return cert.with_verdict(verify_certificate(sys, cert))


def rotated_cost_identity_check(
    sys: TransitionSystem,
    beta: Callable[[float], float],
    N: int,
    x,
    u_seq,
    storage: Sequence[float],
    ell_star: float,
) -> float:
    """Defect of the rotated discounted-cost identity along one trajectory.

    Compares ``sum_k beta(k/N) l_rot_k`` with
    ``sum_k beta(k/N) l_bar_k + lambda(x) - sum_{k=1}^{N} (beta((k-1)/N) - beta(k/N)) lambda(x_k)``.
    """
    traj = simulate(sys, x, u_seq)
    if len(traj) != N:
        raise ValueError(f"expected {N} inputs, got {len(traj)}")
    lam = np.asarray(storage, dtype=np.float64)
    xs = traj.states
    lhs = 0.0
    shifted = 0.0
    for k, (xk, uk) in enumerate(traj.pairs()):
        bar = sys.cost(xk, uk) - ell_star
        lhs += beta(k / N) * (bar + lam[xk] - lam[xs[k + 1]])
        shifted += beta(k / N) * bar
    tail = 0.0
    for k in range(1, N + 1):
        tail += (beta((k - 1) / N) - beta(k / N)) * lam[xs[k]]
    rhs = shifted + lam[xs[0]] - tail
    return abs(lhs - rhs)
