"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each case is timed on both backends (best of ``--repeat`` runs) and the
outputs are checked for bit-identity.
"""
import argparse
import timeit

import numpy as np

from cesaro_vi import _pykernels, fig1, linear
from cesaro_vi.orbits import _reverse_csr
from cesaro_vi.vi import cesaro_factors

try:
    from cesaro_vi import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def vi_case(sys, n):
    args = (sys.offsets, sys.edge_succ, sys.edge_input, np.ascontiguousarray(sys.edge_cost),
            np.ones(n), cesaro_factors(n), np.zeros(sys.n_states))
    return lambda k: k.value_iteration(*args)


def cycles_case(sys):
    roff, rsrc = _reverse_csr(sys.n_states, sys.edge_state, sys.edge_succ)
    args = (sys.offsets, sys.edge_succ, roff, rsrc, np.ascontiguousarray(sys.edge_cost), sys.n_states, 10**6)
    return lambda k: k.enumerate_cycles(*args)


CASES = {
    "cvi fig1 N=1e5": vi_case(fig1(), 10**5),
    "cvi linear N=5000": vi_case(linear(), 5000),
    "cycles linear (125673)": cycles_case(linear()),
}


def same(a, b):
    return all(np.asarray(x).tobytes() == np.asarray(y).tobytes() for x, y in zip(a, b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        raise SystemExit("compiled extension not built; run pip install -e . --no-build-isolation")
    print(f"{'case':28s} {'cython [ms]':>12s} {'numpy [ms]':>12s} {'speedup':>8s}  identical")
    for name, run in CASES.items():
        t_c = min(timeit.repeat(lambda: run(_kernels), number=1, repeat=args.repeat))
        t_p = min(timeit.repeat(lambda: run(_pykernels), number=1, repeat=args.repeat))
        ok = same(run(_kernels), run(_pykernels))
        print(f"{name:28s} {t_c * 1e3:12.3f} {t_p * 1e3:12.3f} {t_p / t_c:8.1f}  {ok}")


if __name__ == "__main__":
    main()
