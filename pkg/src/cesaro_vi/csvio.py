"""Deterministic CSV writers.

Every file starts with a ``#`` metadata line followed by a column header.
Reals are written with ``repr`` so they round-trip exactly.
"""
from __future__ import annotations

import csv
import io
from typing import Iterable, Sequence

from .vi import TIE_BREAK, VIResult


def _meta(**fields) -> str:
    return "# " + ",".join(f"{k}={v}" for k, v in fields.items() if v is not None and v != "")


def table_csv(meta: dict, columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(_meta(**meta) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def vi_csv(result: VIResult, window: int | None = None, stride: int = 1, extra: dict | None = None) -> str:
    """Rows ``N,state,value,policy_input`` for every ``stride``-th horizon and the last one.

    ``policy_input`` is empty at ``N = 0``.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    sys = result.sys
    horizons = list(range(0, result.n_max + 1, stride))
    if horizons[-1] != result.n_max:
        horizons.append(result.n_max)
    names = [s.name for s in sys.states]
    inputs = [u.name for u in sys.inputs]
    values = result.values.tolist()
    choices = result.choices.tolist()

    def rows():
        for N in horizons:
            for x, name in enumerate(names):
                pol = inputs[choices[N - 1][x]] if N else ""
                yield N, name, values[N][x], pol

    meta = dict(
        family=result.family.name,
        params=result.family.params,
        variant=result.variant.value,
        tie_break=TIE_BREAK,
        window=window,
    )
    meta.update(extra or {})
    return table_csv(meta, ("N", "state", "value", "policy_input"), rows())
