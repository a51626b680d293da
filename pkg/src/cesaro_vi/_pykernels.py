"""Pure-Python (numpy) fallback for the compiled kernels in ``_kernels.pyx``.

``value_iteration`` runs ``n`` Bellman steps

    V[i+1](x) = min_e  weights[i] * cost[e] + factors[i] * V[i](succ[e])

over the edges ``e`` of ``x`` (CSR ``offsets``), recording ``inp[e]`` of the
first minimiser.  Operation order matches ``_kernels.pyx`` so both backends
produce bit-identical tables.
"""
import numpy as np


def value_iteration(offsets, succ, inp, cost, weights, factors, init):
    offsets = np.asarray(offsets, dtype=np.int64)
    succ = np.asarray(succ, dtype=np.int64)
    inp = np.asarray(inp, dtype=np.int64)
    cost = np.asarray(cost, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    factors = np.asarray(factors, dtype=np.float64)
    nx = len(offsets) - 1
    n = len(weights)
    if len(factors) != n:
        raise ValueError("weights and factors must have equal length")
    if len(init) != nx:
        raise ValueError("init has wrong length")
    starts = offsets[:-1]
    counts = np.diff(offsets)
    values = np.empty((n + 1, nx), dtype=np.float64)
    choices = np.empty((n, nx), dtype=np.int64)
    values[0] = init
    for i in range(n):
        cand = weights[i] * cost + factors[i] * values[i][succ]
        best = np.minimum.reduceat(cand, starts)
        hits = np.flatnonzero(cand == np.repeat(best, counts))
        first = hits[np.searchsorted(hits, starts)]
        values[i + 1] = best
        choices[i] = inp[first]
    return values, choices


def enumerate_cycles(offsets, succ, roffsets, rsrc, cost, p_max, cap):
    """Simple cycles of the edge multigraph, each rooted at its smallest state.

    Returns ``(ptr, edges, totals, overflow)``: cycle ``i`` is
    ``edges[ptr[i]:ptr[i+1]]`` with left-to-right cost sum ``totals[i]``.
    """
    offsets = np.asarray(offsets).tolist()
    succ = np.asarray(succ).tolist()
    roffsets = np.asarray(roffsets).tolist()
    rsrc = np.asarray(rsrc).tolist()
    cost = np.asarray(cost, dtype=np.float64).tolist()
    nx = len(offsets) - 1
    ptr, out, totals = [0], [], []

    def reach(s, offs, nbr):
        seen = [False] * nx
        seen[s] = True
        todo = [s]
        while todo:
            v = todo.pop()
            for e in range(offs[v], offs[v + 1]):
                w = nbr[e]
                if w >= s and not seen[w]:
                    seen[w] = True
                    todo.append(w)
        return seen

    for s in range(nx):
        fwd, bwd = reach(s, offsets, succ), reach(s, roffsets, rsrc)
        on_path = [False] * nx
        on_path[s] = True
        path: list[int] = []
        stack = [iter(range(offsets[s], offsets[s + 1]))]
        while stack:
            for e in stack[-1]:
                w = succ[e]
                if w == s:
                    total = 0.0
                    for f in path:
                        total += cost[f]
                    total += cost[e]
                    out.extend(path)
                    out.append(e)
                    ptr.append(len(out))
                    totals.append(total)
                    if len(totals) > cap:
                        return (np.array(ptr, dtype=np.int64), np.array(out, dtype=np.int64),
                                np.array(totals), True)
                elif fwd[w] and bwd[w] and not on_path[w] and len(path) + 1 < p_max:
                    path.append(e)
                    on_path[w] = True
                    stack.append(iter(range(offsets[w], offsets[w + 1])))
                    break
            else:
                stack.pop()
                if path:
                    on_path[succ[path.pop()]] = False
    return (np.array(ptr, dtype=np.int64), np.array(out, dtype=np.int64),
            np.array(totals, dtype=np.float64), False)
