# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled hot loops; ``_pykernels`` holds the reference semantics."""
import numpy as np
from libc.stdint cimport int64_t
from libc.stdlib cimport calloc, free, malloc, realloc


def value_iteration(const int64_t[::1] offsets, const int64_t[::1] succ,
                    const int64_t[::1] inp, const double[::1] cost,
                    const double[::1] weights, const double[::1] factors,
                    const double[::1] init):
    cdef Py_ssize_t nx = offsets.shape[0] - 1
    cdef Py_ssize_t n = weights.shape[0]
    if factors.shape[0] != n:
        raise ValueError("weights and factors must have equal length")
    if init.shape[0] != nx:
        raise ValueError("init has wrong length")
    values = np.empty((n + 1, nx), dtype=np.float64)
    choices = np.empty((n, nx), dtype=np.int64)
    cdef double[:, ::1] V = values
    cdef int64_t[:, ::1] C = choices
    cdef Py_ssize_t i, x, e, arg
    cdef double w, f, best, cand
    with nogil:
        for x in range(nx):
            V[0, x] = init[x]
        for i in range(n):
            w = weights[i]
            f = factors[i]
            for x in range(nx):
                e = offsets[x]
                best = w * cost[e] + f * V[i, succ[e]]
                arg = e
                for e in range(offsets[x] + 1, offsets[x + 1]):
                    cand = w * cost[e] + f * V[i, succ[e]]
                    if cand < best:
                        best = cand
                        arg = e
                V[i + 1, x] = best
                C[i, x] = inp[arg]
    return values, choices


cdef int _grow(int64_t** buf, Py_ssize_t* cap, Py_ssize_t need) noexcept nogil:
    cdef Py_ssize_t newcap
    cdef int64_t* tmp
    if need <= cap[0]:
        return 0
    newcap = cap[0] * 2
    while newcap < need:
        newcap *= 2
    tmp = <int64_t*> realloc(buf[0], newcap * sizeof(int64_t))
    if tmp == NULL:
        return -1
    buf[0] = tmp
    cap[0] = newcap
    return 0


def enumerate_cycles(const int64_t[::1] offsets, const int64_t[::1] succ,
                     const int64_t[::1] roffsets, const int64_t[::1] rsrc,
                     const double[::1] cost, Py_ssize_t p_max, Py_ssize_t cap):
    """Simple cycles of the edge multigraph, each rooted at its smallest state.

    Returns ``(ptr, edges, totals, overflow)``: cycle ``i`` is
    ``edges[ptr[i]:ptr[i+1]]`` with left-to-right cost sum ``totals[i]``.
    """
    cdef Py_ssize_t nx = offsets.shape[0] - 1
    cdef Py_ssize_t s, v, w, e, k, depth, head, tail, n_cyc = 0, n_edges = 0
    cdef Py_ssize_t cap_ptr = 1024, cap_edges = 4096
    cdef bint overflow = False
    cdef double total
    cdef int64_t* ptr = <int64_t*> malloc(cap_ptr * sizeof(int64_t))
    cdef int64_t* out = <int64_t*> malloc(cap_edges * sizeof(int64_t))
    cdef int64_t* fwd = <int64_t*> calloc(nx + 1, sizeof(int64_t))
    cdef int64_t* bwd = <int64_t*> calloc(nx + 1, sizeof(int64_t))
    cdef int64_t* on_path = <int64_t*> calloc(nx + 1, sizeof(int64_t))
    cdef int64_t* queue = <int64_t*> malloc((nx + 1) * sizeof(int64_t))
    cdef int64_t* path = <int64_t*> malloc((nx + 1) * sizeof(int64_t))
    cdef int64_t* nxt = <int64_t*> malloc((nx + 1) * sizeof(int64_t))
    if (ptr == NULL or out == NULL or fwd == NULL or bwd == NULL or on_path == NULL
            or queue == NULL or path == NULL or nxt == NULL):
        free(ptr); free(out); free(fwd); free(bwd); free(on_path)
        free(queue); free(path); free(nxt)
        raise MemoryError()
    cdef int64_t[::1] pv, ev
    totals_list = []
    try:
        ptr[0] = 0
        for s in range(nx):
            # strong component of s among vertices >= s
            for v in range(nx):
                fwd[v] = 0
                bwd[v] = 0
            fwd[s] = 1
            head = 0
            tail = 0
            queue[tail] = s
            tail += 1
            while head < tail:
                v = queue[head]
                head += 1
                for e in range(offsets[v], offsets[v + 1]):
                    w = succ[e]
                    if w >= s and not fwd[w]:
                        fwd[w] = 1
                        queue[tail] = w
                        tail += 1
            bwd[s] = 1
            head = 0
            tail = 0
            queue[tail] = s
            tail += 1
            while head < tail:
                v = queue[head]
                head += 1
                for e in range(roffsets[v], roffsets[v + 1]):
                    w = rsrc[e]
                    if w >= s and not bwd[w]:
                        bwd[w] = 1
                        queue[tail] = w
                        tail += 1
            # depth-first search over edge sequences rooted at s
            on_path[s] = 1
            depth = 0
            nxt[0] = offsets[s]
            while depth >= 0:
                v = s if depth == 0 else succ[path[depth - 1]]
                if nxt[depth] < offsets[v + 1]:
                    e = nxt[depth]
                    nxt[depth] += 1
                    w = succ[e]
                    if w == s:
                        if n_cyc + 2 > cap_ptr and _grow(&ptr, &cap_ptr, n_cyc + 2) < 0:
                            raise MemoryError()
                        if _grow(&out, &cap_edges, n_edges + depth + 1) < 0:
                            raise MemoryError()
                        total = 0.0
                        for k in range(depth):
                            out[n_edges] = path[k]
                            n_edges += 1
                            total = total + cost[path[k]]
                        out[n_edges] = e
                        n_edges += 1
                        total = total + cost[e]
                        n_cyc += 1
                        ptr[n_cyc] = n_edges
                        totals_list.append(total)
                        if n_cyc > cap:
                            overflow = True
                            break
                    elif fwd[w] and bwd[w] and not on_path[w] and depth + 1 < p_max:
                        path[depth] = e
                        on_path[w] = 1
                        depth += 1
                        nxt[depth] = offsets[w]
                else:
                    depth -= 1
                    if depth >= 0:
                        on_path[succ[path[depth]]] = 0
            on_path[s] = 0
            if overflow:
                break
        ptr_arr = np.empty(n_cyc + 1, dtype=np.int64)
        edges_arr = np.empty(n_edges, dtype=np.int64)
        pv = ptr_arr
        ev = edges_arr
        for k in range(n_cyc + 1):
            pv[k] = ptr[k]
        for k in range(n_edges):
            ev[k] = out[k]
    finally:
        free(ptr); free(out); free(fwd); free(bwd); free(on_path)
        free(queue); free(path); free(nxt)
    return ptr_arr, edges_arr, np.array(totals_list, dtype=np.float64), overflow
