"""Finite deterministic constrained systems ``x(k+1) = f(x(k), u(k))``.

States and inputs carry symbolic names in files and dense integer indices
internally (index = order of first appearance).  A :class:`TransitionSystem`
also exposes a CSR layout of its transitions (edges grouped by state, sorted
by input index) which the DP kernels consume directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DeadStateError,
    DeterminismError,
    InfeasibleInputError,
    InvalidSystemError,
    ParseError,
    UnknownStateError,
)


@dataclass(frozen=True)
class StateId:
    index: int
    name: str
    coord: tuple[float, ...] | None = None


@dataclass(frozen=True)
class InputId:
    index: int
    name: str
    coord: tuple[float, ...] | None = None


@dataclass(frozen=True)
class Trajectory:
    """State/input sequence with ``len(states) == len(inputs) + 1``."""

    states: tuple[int, ...]
    inputs: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.inputs)

    @property
    def initial(self) -> int:
        return self.states[0]

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.states[:-1], self.inputs))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class TransitionSystem:
    """Immutable finite deterministic transition system.

    Parameters
    ----------
    states, inputs
        Declared states and inputs; ``index`` fields must be ``0..n-1`` in order.
    transitions
        Map ``(state_index, input_index) -> (successor_index, cost)``.
    """

    def __init__(
        self,
        states: Sequence[StateId],
        inputs: Sequence[InputId],
        transitions: Mapping[tuple[int, int], tuple[int, float]],
    ):
        self._states = tuple(states)
        self._inputs = tuple(inputs)
        for kind, items in (("state", self._states), ("input", self._inputs)):
            for i, item in enumerate(items):
                if item.index != i:
                    raise InvalidSystemError(f"{kind} indices must be contiguous from 0")
            if len({it.name for it in items}) != len(items):
                raise InvalidSystemError(f"duplicate {kind} names")
        self._state_by_name = {s.name: s.index for s in self._states}
        self._input_by_name = {u.name: u.index for u in self._inputs}

        nx, nu = len(self._states), len(self._inputs)
        trans: dict[tuple[int, int], tuple[int, float]] = {}
        for (x, u), (y, c) in transitions.items():
            if not (0 <= x < nx and 0 <= y < nx):
                raise UnknownStateError(f"transition ({x}, {u}) -> {y} references an unknown state")
            if not 0 <= u < nu:
                raise InvalidSystemError(f"transition ({x}, {u}) references an unknown input")
            c = float(c)
            if not math.isfinite(c):
                raise InvalidSystemError(f"cost of ({x}, {u}) is not finite")
            trans[(int(x), int(u))] = (int(y), c)
        self._trans = trans

        keys = sorted(trans)
        counts = np.zeros(nx, dtype=np.int64)
        for x, _ in keys:
            counts[x] += 1
        dead = [self._states[i].name for i in range(nx) if counts[i] == 0]
        if dead:
            raise DeadStateError(f"states without feasible input: {', '.join(dead)}")
        offsets = np.zeros(nx + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        self.offsets = _readonly(offsets)
        self.edge_state = _readonly(np.array([k[0] for k in keys], dtype=np.int64))
        self.edge_input = _readonly(np.array([k[1] for k in keys], dtype=np.int64))
        self.edge_succ = _readonly(np.array([trans[k][0] for k in keys], dtype=np.int64))
        self.edge_cost = _readonly(np.array([trans[k][1] for k in keys], dtype=np.float64))
        self._edge_of = {k: e for e, k in enumerate(keys)}

    # -- construction helpers -------------------------------------------------
    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[str, str, str, float]],
        state_coords: Mapping[str, Sequence[float]] | None = None,
        input_coords: Mapping[str, Sequence[float]] | None = None,
        states: Sequence[str] = (),
        inputs: Sequence[str] = (),
    ) -> "TransitionSystem":
        """Build from ``(state, input, successor, cost)`` name tuples.

        ``states``/``inputs`` fix the index order up front; any other names are
        indexed by first appearance.
        """
        state_coords = state_coords or {}
        input_coords = input_coords or {}
        snames: dict[str, int] = {}
        unames: dict[str, int] = {}
        for s in states:
            snames.setdefault(s, len(snames))
        for u in inputs:
            unames.setdefault(u, len(unames))
        trans = {}
        for x, u, y, c in edges:
            xi = snames.setdefault(x, len(snames))
            ui = unames.setdefault(u, len(unames))
            yi = snames.setdefault(y, len(snames))
            if (xi, ui) in trans:
                raise DeterminismError(f"duplicate transition for ({x}, {u})")
            trans[(xi, ui)] = (yi, c)

        def coord(table, name):
            c = table.get(name)
            return None if c is None else tuple(float(v) for v in c)

        st = [StateId(i, n, coord(state_coords, n)) for n, i in snames.items()]
        us = [InputId(i, n, coord(input_coords, n)) for n, i in unames.items()]
        return cls(st, us, trans)

    # -- basic accessors ------------------------------------------------------
    @property
    def states(self) -> tuple[StateId, ...]:
        return self._states

    @property
    def inputs(self) -> tuple[InputId, ...]:
        return self._inputs

    @property
    def n_states(self) -> int:
        return len(self._states)

    @property
    def n_inputs(self) -> int:
        return len(self._inputs)

    @property
    def n_edges(self) -> int:
        return len(self.edge_cost)

    @property
    def transitions(self) -> Mapping[tuple[int, int], tuple[int, float]]:
        return dict(self._trans)

    def has_coordinates(self) -> bool:
        return all(s.coord is not None for s in self._states) and all(
            u.coord is not None for u in self._inputs
        )

    def state_index(self, x) -> int:
        if isinstance(x, StateId):
            x = x.index
        if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
            if 0 <= x < self.n_states:
                return int(x)
            raise InvalidSystemError(f"state index {x} out of range")
        if isinstance(x, str):
            try:
                return self._state_by_name[x]
            except KeyError:
                raise InvalidSystemError(f"unknown state {x!r}") from None
        raise TypeError(f"cannot interpret {x!r} as a state")

    def input_index(self, u) -> int:
        if isinstance(u, InputId):
            u = u.index
        if isinstance(u, (int, np.integer)) and not isinstance(u, bool):
            if 0 <= u < self.n_inputs:
                return int(u)
            raise InvalidSystemError(f"input index {u} out of range")
        if isinstance(u, str):
            try:
                return self._input_by_name[u]
            except KeyError:
                raise InvalidSystemError(f"unknown input {u!r}") from None
        raise TypeError(f"cannot interpret {u!r} as an input")

    def state(self, x) -> StateId:
        return self._states[self.state_index(x)]

    def input(self, u) -> InputId:
        return self._inputs[self.input_index(u)]

    def is_feasible(self, x, u) -> bool:
        return (self.state_index(x), self.input_index(u)) in self._trans

    def edge_index(self, x: int, u: int) -> int:
        return self._edge_of[(x, u)]

    def successor(self, x, u) -> int:
        return self._trans[(self.state_index(x), self.input_index(u))][0]

    def cost(self, x, u) -> float:
        return self._trans[(self.state_index(x), self.input_index(u))][1]

    def edges_of(self, x: int) -> range:
        return range(int(self.offsets[x]), int(self.offsets[x + 1]))

    def pairs(self) -> list[tuple[int, int]]:
        """All feasible (state, input) pairs in edge order."""
        return list(zip(self.edge_state.tolist(), self.edge_input.tolist()))

    def pair_label(self, pair: tuple[int, int]) -> str:
        return f"({self._states[pair[0]].name},{self._inputs[pair[1]].name})"

    def with_costs(self, edge_costs: Sequence[float]) -> "TransitionSystem":
        """Same graph, new per-edge costs (given in edge order)."""
        trans = {
            (int(x), int(u)): (int(y), float(c))
            for x, u, y, c in zip(self.edge_state, self.edge_input, self.edge_succ, edge_costs)
        }
        return TransitionSystem(self._states, self._inputs, trans)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransitionSystem):
            return NotImplemented
        return (
            self._states == other._states
            and self._inputs == other._inputs
            and self._trans == other._trans
        )

    def __hash__(self):
        return hash((self._states, self._inputs, tuple(sorted(self._trans.items()))))

    def __repr__(self) -> str:
        return f"TransitionSystem(n_states={self.n_states}, n_inputs={self.n_inputs}, n_edges={self.n_edges})"


# -- file format ----------------------------------------------------------------

def _parse_real(tok: str, lineno: int, what: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"bad {what} {tok!r}", lineno) from None
    if not math.isfinite(v):
        raise ParseError(f"{what} must be finite, got {tok!r}", lineno)
    return v


def parse_system(text: str) -> TransitionSystem:
    """Parse the line-oriented ``.tsys`` format.

    ::

        state <name> [<c1> <c2> ...]
        input <name> [<c1> <c2> ...]
        trans <state> <input> <successor> <cost>

    ``#`` starts a comment.  States and inputs referenced in a ``trans`` line
    source/input position are declared implicitly; a successor must be declared
    somewhere in the document (``state`` line or as a transition source).
    """
    snames: dict[str, int] = {}
    unames: dict[str, int] = {}
    declared: set[str] = set()
    scoords: dict[str, tuple[float, ...]] = {}
    ucoords: dict[str, tuple[float, ...]] = {}
    explicit_s: set[str] = set()
    explicit_u: set[str] = set()
    trans: dict[tuple[int, int], tuple[int, float]] = {}
    first_use: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        kw = toks[0]
        if kw in ("state", "input"):
            if len(toks) < 2:
                raise ParseError(f"'{kw}' needs a name", lineno)
            name = toks[1]
            coords = tuple(_parse_real(t, lineno, "coordinate") for t in toks[2:])
            if kw == "state":
                if name in explicit_s:
                    raise ParseError(f"state {name!r} declared twice", lineno)
                explicit_s.add(name)
                declared.add(name)
                snames.setdefault(name, len(snames))
                if coords:
                    scoords[name] = coords
            else:
                if name in explicit_u:
                    raise ParseError(f"input {name!r} declared twice", lineno)
                explicit_u.add(name)
                unames.setdefault(name, len(unames))
                if coords:
                    ucoords[name] = coords
        elif kw == "trans":
            if len(toks) != 5:
                raise ParseError("expected 'trans <state> <input> <successor> <cost>'", lineno)
            _, x, u, y, ctok = toks
            cost = _parse_real(ctok, lineno, "cost")
            xi = snames.setdefault(x, len(snames))
            declared.add(x)
            ui = unames.setdefault(u, len(unames))
            yi = snames.setdefault(y, len(snames))
            first_use.setdefault(y, lineno)
            if (xi, ui) in trans:
                raise DeterminismError(f"duplicate transition for ({x}, {u})", lineno)
            trans[(xi, ui)] = (yi, cost)
        else:
            raise ParseError(f"unknown keyword {kw!r}", lineno)

    for name in snames:
        if name not in declared:
            raise UnknownStateError(f"successor {name!r} is never declared", first_use[name])

    states = [StateId(i, n, scoords.get(n)) for n, i in snames.items()]
    inputs = [InputId(i, n, ucoords.get(n)) for n, i in unames.items()]
    return TransitionSystem(states, inputs, trans)


def load_system(path: str | Path) -> TransitionSystem:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read system file {str(path)!r}: {exc.strerror}") from None
    return parse_system(text)


def serialize_system(sys: TransitionSystem) -> str:
    """Inverse of :func:`parse_system` (indices and costs round-trip exactly)."""

    def fmt(coord):
        return "" if coord is None else " " + " ".join(repr(float(c)) for c in coord)

    lines = [f"state {s.name}{fmt(s.coord)}" for s in sys.states]
    lines += [f"input {u.name}{fmt(u.coord)}" for u in sys.inputs]
    for x, u, y, c in zip(sys.edge_state, sys.edge_input, sys.edge_succ, sys.edge_cost):
        lines.append(
            f"trans {sys.states[x].name} {sys.inputs[u].name} {sys.states[y].name} {float(c)!r}"
        )
    return "\n".join(lines) + "\n"


def save_system(sys: TransitionSystem, path: str | Path) -> None:
    Path(path).write_text(serialize_system(sys), encoding="utf-8")


# -- operations -------------------------------------------------------------------

def feasible_inputs(sys: TransitionSystem, x) -> list[InputId]:
    """Inputs with a transition from ``x``, ascending by index (the tie-break order)."""
    xi = sys.state_index(x)
    return [sys.inputs[int(sys.edge_input[e])] for e in sys.edges_of(xi)]


def simulate(sys: TransitionSystem, x0, inputs: Iterable) -> Trajectory:
    x = sys.state_index(x0)
    states = [x]
    us = []
    for k, u in enumerate(inputs):
        ui = sys.input_index(u)
        nxt = sys._trans.get((x, ui))
        if nxt is None:
            raise InfeasibleInputError(k, sys.states[x].name, sys.inputs[ui].name)
        x = nxt[0]
        states.append(x)
        us.append(ui)
    return Trajectory(tuple(states), tuple(us))


def total_cost(sys: TransitionSystem, traj: Trajectory, shift: float = 0.0) -> float:
    """Sum of ``cost - shift`` along the trajectory, accumulated left to right."""
    total = 0.0
    for x, u in traj.pairs():
        total += sys.cost(x, u) - shift
    return total
