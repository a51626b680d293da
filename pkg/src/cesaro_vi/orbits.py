"""Periodic orbits of finite deterministic systems.

A minimal orbit is a simple cycle of the directed multigraph whose edges are
the feasible pairs ``(x, u) -> f(x, u)``.  Orbits are stored in canonical
rotation (lexicographically smallest rotation of the ``(state, input)``
tuple, which for a minimal orbit starts at its smallest state index).
"""
from __future__ import annotations

import itertools
import math
from collections import Counter, abc, deque
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _backend
from .errors import ExplosionError, MissingCoordinatesError
from .system import TransitionSystem, Trajectory

DEFAULT_CAP = 10**6
METRICS = ("euclidean", "discrete")

Pair = tuple[int, int]


def _tied(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def _canonical(pairs: Sequence[Pair]) -> tuple[Pair, ...]:
    pairs = tuple(pairs)
    return min(pairs[k:] + pairs[:k] for k in range(len(pairs)))


class Orbit(NamedTuple):
    """Feasible periodic orbit: ``pairs[k]`` leads to the state of ``pairs[k+1 mod p]``."""

    pairs: tuple[Pair, ...]
    average_cost: float

    @classmethod
    def from_pairs(cls, sys: TransitionSystem, pairs: Sequence[Pair]) -> "Orbit":
        """Canonicalise ``pairs`` and compute the average cost (sum, then divide)."""
        pairs = _canonical(pairs)
        if not pairs:
            raise ValueError("an orbit needs at least one pair")
        for k, (x, u) in enumerate(pairs):
            if sys.successor(x, u) != pairs[(k + 1) % len(pairs)][0]:
                raise ValueError(f"pairs do not close: {sys.pair_label((x, u))}")
        total = 0.0
        for x, u in pairs:
            total += sys.cost(x, u)
        return cls(pairs, total / len(pairs))

    @property
    def period(self) -> int:
        return len(self.pairs)

    @property
    def states(self) -> tuple[int, ...]:
        return tuple(x for x, _ in self.pairs)

    @property
    def inputs(self) -> tuple[int, ...]:
        return tuple(u for _, u in self.pairs)

    @property
    def minimal(self) -> bool:
        return len(set(self.states)) == len(self.pairs)

    def sort_key(self):
        return (self.period, self.pairs)

    def format(self, sys: TransitionSystem) -> str:
        body = " ".join(sys.pair_label(p) for p in self.pairs)
        return f"orbit p={self.period} lavg={fmt_real(self.average_cost)} {body}"


def fmt_real(v: float) -> str:
    """Short, stable text for a float (``0`` rather than ``0.0`` or ``-0``)."""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    s = f"{v + 0.0:.15g}"
    return "0" if s == "-0" else s


# -- enumeration ------------------------------------------------------------------

class OrbitSet(abc.Sequence):
    """Sorted, immutable collection of minimal orbits backed by flat arrays.

    Orbit ``i`` consists of the edges ``edges[ptr[i]:ptr[i+1]]`` of the system;
    :class:`Orbit` objects are materialised on access.  Ordering is by period,
    then lexicographically by the canonical pair tuple.
    """

    def __init__(self, sys: TransitionSystem, ptr: np.ndarray, edges: np.ndarray, totals: np.ndarray):
        periods = np.diff(ptr)
        order = _canonical_order(sys, ptr, edges, periods)
        self._sys = sys
        self.periods = periods[order]
        self.ptr = np.zeros(len(order) + 1, dtype=np.int64)
        np.cumsum(self.periods, out=self.ptr[1:])
        self.edges = edges[_gather(ptr, order, periods)]
        self.average_costs = totals[order] / self.periods
        for a in (self.periods, self.ptr, self.edges, self.average_costs):
            a.setflags(write=False)

    @classmethod
    def from_orbits(cls, sys: TransitionSystem, orbits: Sequence[Orbit]) -> "OrbitSet":
        ptr = [0]
        edges: list[int] = []
        totals = []
        for o in orbits:
            total = 0.0
            for x, u in o.pairs:
                e = sys.edge_index(x, u)
                edges.append(e)
                total += float(sys.edge_cost[e])
            ptr.append(len(edges))
            totals.append(total)
        return cls(sys, np.array(ptr, dtype=np.int64), np.array(edges, dtype=np.int64),
                   np.array(totals, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.periods)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        es = self.edges[self.ptr[i]:self.ptr[i + 1]]
        pairs = tuple(zip(self._sys.edge_state[es].tolist(), self._sys.edge_input[es].tolist()))
        return Orbit(pairs, float(self.average_costs[i]))

    def orbit_sums(self, per_edge: np.ndarray) -> np.ndarray:
        """Sum of a per-edge quantity around every orbit."""
        if not len(self):
            return np.zeros(0)
        return np.add.reduceat(np.asarray(per_edge)[self.edges], self.ptr[:-1])

    def __repr__(self) -> str:
        return f"OrbitSet({len(self)} orbits)"


def _gather(ptr, order, periods):
    """Flat edge positions of the cycles ``order`` (concatenated)."""
    if not len(order):
        return np.zeros(0, dtype=np.int64)
    lens = periods[order]
    starts = ptr[:-1][order]
    offs = np.repeat(starts - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
    return np.arange(int(lens.sum())) + offs


def _canonical_order(sys, ptr, edges, periods) -> np.ndarray:
    """Indices sorting cycles by (period, pair tuple)."""
    order = []
    for p in np.unique(periods):
        idx = np.flatnonzero(periods == p)
        block = edges[_gather(ptr, idx, periods)].reshape(len(idx), p)
        keys = np.empty((len(idx), 2 * p), dtype=np.int64)
        keys[:, 0::2] = sys.edge_state[block]
        keys[:, 1::2] = sys.edge_input[block]
        order.append(idx[np.lexsort(keys.T[::-1])])
    return np.concatenate(order) if order else np.zeros(0, dtype=np.int64)


def _reverse_csr(n: int, src: np.ndarray, dst: np.ndarray):
    order = np.argsort(dst, kind="stable")
    roffsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(dst, minlength=n), out=roffsets[1:])
    return roffsets, np.ascontiguousarray(src[order], dtype=np.int64)


def _cycles(sys: TransitionSystem, mask: np.ndarray | None, p_max: int, cap: int) -> OrbitSet:
    src, dst, cost = sys.edge_state, sys.edge_succ, sys.edge_cost
    keep = np.arange(sys.n_edges) if mask is None else np.flatnonzero(mask)
    src, dst, cost = src[keep], dst[keep], cost[keep]
    offsets = np.zeros(sys.n_states + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=sys.n_states), out=offsets[1:])
    roffsets, rsrc = _reverse_csr(sys.n_states, src, dst)
    ptr, edges, totals, overflow = _backend.kernels.enumerate_cycles(
        offsets, np.ascontiguousarray(dst), roffsets, rsrc, np.ascontiguousarray(cost), p_max, cap
    )
    if overflow:
        raise ExplosionError(f"more than {cap} minimal orbits; raise the cap or use min_mean_cycle")
    return OrbitSet(sys, ptr, keep[edges], totals)


def enumerate_minimal_orbits(
    sys: TransitionSystem, p_max: int | None = None, cap: int = DEFAULT_CAP
) -> OrbitSet:
    """All minimal orbits of length ``<= p_max`` (default ``N_X``), each once up to rotation.

    Parallel edges between the same two states yield distinct orbits.  Raises
    :class:`ExplosionError` when more than ``cap`` orbits exist.
    """
    p_max = sys.n_states if p_max is None else p_max
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    return _cycles(sys, None, p_max, cap)


def as_orbit_set(sys: TransitionSystem, orbits) -> OrbitSet:
    if orbits is None:
        return enumerate_minimal_orbits(sys)
    if isinstance(orbits, OrbitSet):
        return orbits
    return OrbitSet.from_orbits(sys, orbits)


def min_mean_cycle(sys: TransitionSystem) -> float:
    """Minimum average edge cost over all cycles (Karp's algorithm)."""
    n = sys.n_states
    src, dst, w = sys.edge_state, sys.edge_succ, sys.edge_cost
    D = np.full((n + 1, n), np.inf)
    D[0] = 0.0  # implicit super-source with zero-weight edges to every state
    for k in range(1, n + 1):
        np.minimum.at(D[k], dst, D[k - 1][src] + w)
    best = math.inf
    for v in range(n):
        if not math.isfinite(D[n, v]):
            continue
        worst = max((D[n, v] - D[k, v]) / (n - k) for k in range(n) if math.isfinite(D[k, v]))
        best = min(best, worst)
    return float(best)


def _tight_edges(sys: TransitionSystem, ell: float) -> np.ndarray:
    """Edges with zero reduced cost under Bellman-Ford potentials for ``cost - ell``."""
    red = sys.edge_cost - ell
    h = np.zeros(sys.n_states)
    for _ in range(sys.n_states):
        cand = np.full(sys.n_states, np.inf)
        np.minimum.at(cand, sys.edge_succ, h[sys.edge_state] + red)
        h = np.minimum(h, cand)
    slack = h[sys.edge_state] + red - h[sys.edge_succ]
    scale = max(1.0, float(np.max(np.abs(sys.edge_cost))))
    return slack <= 1e-9 * scale * sys.n_states


def _pick_optimal(orbits: OrbitSet) -> tuple[Orbit, float]:
    if not len(orbits):
        raise ValueError("system has no cycles")
    avg = orbits.average_costs
    low = float(avg.min())
    tied = np.abs(avg - low) <= 1e-12 * np.maximum(1.0, np.maximum(abs(low), np.abs(avg)))
    star = orbits[int(np.flatnonzero(tied)[0])]  # already in (period, pairs) order
    return star, star.average_cost


def optimal_orbit(sys: TransitionSystem, orbits=None, cap: int = DEFAULT_CAP) -> tuple[Orbit, float]:
    """Minimal orbit of least average cost, and that cost (``ell_star``).

    Ties (equal averages up to 1e-12 relative) go to the shorter orbit, then to
    the lexicographically smaller canonical pair tuple.  If enumeration exceeds
    ``cap`` the optimum is located with Karp's value and a search restricted to
    tight edges.
    """
    if orbits is None:
        try:
            orbits = enumerate_minimal_orbits(sys, cap=cap)
        except ExplosionError:
            tight = _tight_edges(sys, min_mean_cycle(sys))
            return _pick_optimal(_cycles(sys, tight, sys.n_states, cap))
    return _pick_optimal(as_orbit_set(sys, orbits))


# -- distances ----------------------------------------------------------------------

def resolve_metric(sys: TransitionSystem, metric: str | None) -> str:
    if metric in (None, "auto"):
        return "euclidean" if sys.has_coordinates() else "discrete"
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    if metric == "euclidean" and not sys.has_coordinates():
        raise MissingCoordinatesError("euclidean metric needs coordinates on every state and input")
    return metric


def _stacked(sys: TransitionSystem, pair: Pair) -> tuple[float, ...]:
    return sys.states[pair[0]].coord + sys.inputs[pair[1]].coord


def orbit_distance(
    sys: TransitionSystem, pair: Pair, orbit: Orbit, metric: str | None = None
) -> float:
    """``min_k ||(x, u) - orbit[k]||`` under the euclidean or discrete (0/1) metric."""
    metric = resolve_metric(sys, metric)
    pair = (sys.state_index(pair[0]), sys.input_index(pair[1]))
    if metric == "discrete":
        return 0.0 if pair in orbit.pairs else 1.0
    here = _stacked(sys, pair)
    return min(math.dist(here, _stacked(sys, q)) for q in orbit.pairs)


def pair_distances(sys: TransitionSystem, orbit: Orbit, metric: str | None = None) -> np.ndarray:
    """Distance of every feasible pair to ``orbit``, in edge order."""
    metric = resolve_metric(sys, metric)
    return np.array([orbit_distance(sys, p, orbit, metric) for p in sys.pairs()])


# -- Assumption checks -----------------------------------------------------------------

@dataclass(frozen=True)
class MinUniqueVerdict:
    holds: bool
    witness: Orbit | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds


def check_min_unique(
    sys: TransitionSystem, star: Orbit, orbits=None, metric: str | None = None
) -> MinUniqueVerdict:
    """Is ``star`` minimal, and does every orbit of equal average cost lie on it?

    It suffices to inspect minimal orbits: a non-minimal orbit with the optimal
    average splits into minimal orbits that are all optimal.
    """
    if not star.minimal:
        return MinUniqueVerdict(False, star, "optimal orbit is not minimal")
    orbits = as_orbit_set(sys, orbits)
    metric = resolve_metric(sys, metric)
    avg, ref = orbits.average_costs, star.average_cost
    tied = np.abs(avg - ref) <= 1e-12 * np.maximum(1.0, np.maximum(abs(ref), np.abs(avg)))
    for i in np.flatnonzero(tied):
        o = orbits[int(i)]
        if o.pairs == star.pairs:
            continue
        if any(orbit_distance(sys, p, star, metric) != 0.0 for p in o.pairs):
            return MinUniqueVerdict(False, o, "another orbit attains the optimal average cost")
    return MinUniqueVerdict(True)


@dataclass(frozen=True)
class Unreachable:
    states: frozenset[int]


def reachability_horizon(sys: TransitionSystem, star: Orbit) -> int | Unreachable:
    """Smallest ``M >= 1`` such that every state reaches ``star`` within ``M`` steps.

    Returns :class:`Unreachable` listing the states that never reach the orbit.
    """
    radj: list[list[int]] = [[] for _ in range(sys.n_states)]
    for x, y in zip(sys.edge_state.tolist(), sys.edge_succ.tolist()):
        radj[y].append(x)
    dist = [-1] * sys.n_states
    queue = deque()
    for x in set(star.states):
        dist[x] = 0
        queue.append(x)
    while queue:
        y = queue.popleft()
        for x in radj[y]:
            if dist[x] < 0:
                dist[x] = dist[y] + 1
                queue.append(x)
    missing = frozenset(i for i, d in enumerate(dist) if d < 0)
    if missing:
        return Unreachable(missing)
    return max(1, max(dist))


# -- trajectory decomposition ----------------------------------------------------------

@dataclass(frozen=True)
class Decomposition:
    source: Trajectory
    orbits: tuple[Orbit, ...]
    orbit_indices: tuple[tuple[int, ...], ...]
    residual_indices: tuple[int, ...] = field(default=())

    def sides(self, sys: TransitionSystem, g: Callable[[int, int], float] | None = None):
        """Both sides of the decomposition identity for a per-pair function ``g``.

        Returns ``(trajectory_sum, orbit_sum + residual_sum)``; ``g`` defaults to
        the stage cost.
        """
        g = g or sys.cost
        pairs = self.source.pairs()
        lhs = 0.0
        for x, u in pairs:
            lhs += g(x, u)
        rhs = 0.0
        for o in self.orbits:
            for x, u in o.pairs:
                rhs += g(x, u)
        for k in self.residual_indices:
            rhs += g(*pairs[k])
        return lhs, rhs


def decompose_trajectory(sys: TransitionSystem, traj: Trajectory) -> Decomposition:
    """Split a trajectory into minimal orbits plus fewer than ``N_X`` residual steps.

    Repeatedly finds the earliest repeated state in what remains, excises the
    cycle between the two visits and records it.
    """
    idx = list(range(len(traj)))
    states = list(traj.states)
    orbits, times = [], []
    while True:
        seen: dict[int, int] = {}
        hit = None
        for j, s in enumerate(states):
            if s in seen:
                hit = (seen[s], j)
                break
            seen[s] = j
        if hit is None:
            break
        i, j = hit
        cyc = [(states[t], traj.inputs[idx[t]]) for t in range(i, j)]
        orbits.append(Orbit.from_pairs(sys, cyc))
        times.append(tuple(idx[i:j]))
        del idx[i:j]
        del states[i:j]
    dec = Decomposition(traj, tuple(orbits), tuple(times), tuple(idx))

    used = Counter(itertools.chain(idx, *times))
    if used != Counter(range(len(traj))) or len(idx) >= sys.n_states:
        raise AssertionError("decomposition does not partition the trajectory")
    lhs, rhs = dec.sides(sys)
    if abs(lhs - rhs) > 1e-9 * max(1.0, abs(lhs)):
        raise AssertionError(f"decomposition cost mismatch: {lhs} != {rhs}")
    return dec
