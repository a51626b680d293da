"""Command-line interface: ``cesaro-vi {vi,orbit,decompose,reproduce}``.

Exit codes: 0 success, 1 input or parse error, 2 assumption violated.
"""
from __future__ import annotations

import argparse
import sys as _sys
from pathlib import Path

import numpy as np

from . import builtin_systems
from .csvio import table_csv, vi_csv
from .discount import discount
from .dissipativity import build_certificate, suboptimality_gap
from .errors import AssumptionViolation, CesaroError, MinUniqueError, NotConverged, ParseError
from .orbits import (
    check_min_unique,
    decompose_trajectory,
    enumerate_minimal_orbits,
    fmt_real,
    optimal_orbit,
    reachability_horizon,
    resolve_metric,
)
from .system import TransitionSystem, load_system, save_system, simulate
from .vi import (
    CostVariant,
    Family,
    beta_value,
    classic_vi,
    cvi,
    gamma_vi,
    policy_convergence_N,
    TIE_BREAK,
    run_family,
)

GAMMA_SWEEP = tuple(round(0.55 + 0.01 * i, 2) for i in range(45))


def _add_system(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--system", metavar="PATH", help="system file (.tsys)")
    src.add_argument("--builtin", choices=builtin_systems.BUILTINS, help="built-in example system")
    p.add_argument("--emit-system", metavar="PATH", help="also write the system in .tsys format")
    p.add_argument("--metric", choices=("euclidean", "discrete"), help="distance to the optimal orbit")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cesaro-vi", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vi", help="run a value iteration and write values/policies as CSV")
    _add_system(p)
    p.add_argument("--family", choices=("classic", "gamma", "cesaro", "beta"), default="cesaro")
    p.add_argument("--gamma", type=float, help="discount factor for --family gamma")
    p.add_argument("--beta", choices=("linear", "quad"), default="linear", help="profile for --family beta")
    p.add_argument("--variant", choices=[v.value for v in CostVariant], default=None)
    p.add_argument("--shift", metavar="auto|VALUE", help="shift costs by the optimal average (auto) or VALUE")
    p.add_argument("-N", dest="n", type=int, default=100, help="horizon")
    p.add_argument("--window", type=int, default=None, help="policy-stability window; reports N*")
    p.add_argument("--stride", type=int, default=1, help="write every STRIDE-th horizon")
    p.add_argument("-o", dest="output", metavar="PATH", help="output CSV (default: stdout)")

    p = sub.add_parser("orbit", help="optimal periodic orbit, assumption checks, certificate")
    _add_system(p)
    p.add_argument("--all", action="store_true", help="list every minimal orbit")
    p.add_argument("--certify", action="store_true", help="build the dissipativity certificate")
    p.add_argument("-o", dest="output", metavar="PATH", help="certificate CSV (default: stdout)")

    p = sub.add_parser("decompose", help="split a trajectory into minimal orbits and a residual")
    _add_system(p)
    p.add_argument("--start", required=True, help="initial state name")
    p.add_argument("--inputs", required=True, metavar="PATH", help="input names, one per line")

    p = sub.add_parser("reproduce", help="write the CSV data for a built-in example")
    p.add_argument("example", choices=builtin_systems.BUILTINS)
    p.add_argument("-o", dest="output", metavar="DIR", default=".", help="output directory")
    p.add_argument("-N", dest="n", type=int, default=None, help="override the main horizon")
    p.add_argument("--window", type=int, default=50)
    p.add_argument("--emit-system", metavar="PATH")
    return ap


def _load(args) -> TransitionSystem:
    sys = load_system(args.system) if args.system else builtin_systems.builtin(args.builtin)
    if getattr(args, "emit_system", None):
        save_system(sys, args.emit_system)
    return sys


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        _sys.stdout.write(text)


def cmd_vi(args) -> int:
    sys = _load(args)
    if args.n < 1:
        raise ValueError("-N must be >= 1")
    ell_star = None
    variant = args.variant
    if args.shift is not None:
        if variant not in (None, "shifted"):
            raise ValueError("--shift only applies to the shifted variant")
        variant = "shifted"
        if args.shift != "auto":
            ell_star = float(args.shift)
    variant = CostVariant(variant or "raw")
    cert = None
    if variant is CostVariant.ROTATED:
        cert = build_certificate(sys, args.metric)
        if not cert.verdict.holds:
            raise AssumptionViolation(f"certificate violated at {sys.pair_label(cert.verdict.pair)}")
    if variant is CostVariant.SHIFTED and ell_star is None:
        ell_star = optimal_orbit(sys)[1]
    extra = {"ell_star": repr(ell_star)} if ell_star is not None else {}

    if args.family == "beta":
        beta = discount(args.beta)
        table, policy = beta_value(sys, beta, variant, args.n, ell_star, cert)
        rows = [
            (args.n, s.name, float(table.values[x]), sys.inputs[policy[x]].name)
            for x, s in enumerate(sys.states)
        ]
        meta = dict(family="beta", params=f"beta={beta.id}", variant=variant.value, tie_break=TIE_BREAK)
        meta.update(extra)
        _emit(table_csv(meta, ("N", "state", "value", "policy_input"), rows), args.output)
        return 0

    if args.family == "gamma" and args.gamma is None:
        raise ValueError("--family gamma needs --gamma")
    family = Family(args.family, gamma=args.gamma if args.family == "gamma" else None)
    result = run_family(sys, family, args.n, variant, ell_star, cert)
    if args.window is not None:
        try:
            conv = policy_convergence_N(sys, family, variant, args.window, args.n, result)
            extra["n_star"] = conv.n_star
        except NotConverged:
            extra["n_star"] = "not-converged"
    _emit(vi_csv(result, args.window, args.stride, extra), args.output)
    return 0


def cmd_orbit(args) -> int:
    sys = _load(args)
    orbits = enumerate_minimal_orbits(sys)
    star, ell = optimal_orbit(sys, orbits)
    out = _sys.stdout
    if args.all:
        for o in orbits:
            print(o.format(sys), file=out)
    print(star.format(sys), file=out)
    print(f"period={star.period}", file=out)
    print(f"ell_star={fmt_real(ell)}", file=out)
    print(f"orbits={len(orbits)}", file=out)
    reach = reachability_horizon(sys, star)
    if isinstance(reach, int):
        print(f"reach_horizon={reach}", file=out)
    else:
        names = " ".join(sys.states[x].name for x in sorted(reach.states))
        print(f"reach_horizon=unreachable {names}", file=out)
    metric = resolve_metric(sys, args.metric)
    check = check_min_unique(sys, star, orbits, metric)
    if not check.holds:
        print("min_unique=violated", file=out)
        print(f"witness={check.witness.format(sys)}", file=out)
        raise MinUniqueError(check.reason, check.witness)
    print("min_unique=holds", file=out)
    print(f"delta={fmt_real(suboptimality_gap(sys, star, orbits))}", file=out)
    if not args.certify:
        return 0
    cert = build_certificate(sys, metric, orbits)
    print(f"alpha_coeff={fmt_real(cert.alpha_coeff)}", file=out)
    print(f"certificate={'holds' if cert.verdict.holds else 'violated'}", file=out)
    if args.output:
        Path(args.output).write_text(cert.to_csv())
    else:
        out.write(cert.to_csv())
    return 0 if cert.verdict.holds else 2


def _read_inputs(path: str) -> list[str]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ParseError(f"cannot read input sequence {path}: {exc.strerror}") from exc
    return [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]


def cmd_decompose(args) -> int:
    sys = _load(args)
    names = _read_inputs(args.inputs)
    traj = simulate(sys, args.start, names)
    dec = decompose_trajectory(sys, traj)
    for orbit, steps in zip(dec.orbits, dec.orbit_indices):
        print(f"{orbit.format(sys)} steps={','.join(map(str, steps))}")
    print(f"residual={','.join(map(str, dec.residual_indices))}")
    lhs, rhs = dec.sides(sys)
    print(f"lhs={fmt_real(lhs)}")
    print(f"rhs={fmt_real(rhs)}")
    return 0


# -- reproduce ----------------------------------------------------------------------

CVI_HORIZON = 10**5


def _write(outdir: Path, name: str, text: str) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / name).write_text(text)
    print(f"wrote {outdir / name}")


def _reproduce_fig1(outdir: Path, n: int | None) -> None:
    sys = builtin_systems.fig1()
    classic = classic_vi(sys, "shifted", 100)
    _write(outdir, "fig1_classic_vi.csv", vi_csv(classic, extra={"ell_star": "0.0"}))
    x3 = sys.state_index("x3")
    print("classic V_N(x3), N=1..10: " + " ".join(fmt_real(v) for v in classic.values[1:11, x3]))
    res = cvi(sys, "shifted", n or CVI_HORIZON)
    N = res.n_max
    p = optimal_orbit(sys)[0].period
    rows = [
        (s.name, float(res.values[N, x]), float(res.richardson(period=p)[x]), res.policy_input(N, x))
        for x, s in enumerate(sys.states)
    ]
    _write(outdir, "fig1_cesaro_limits.csv", table_csv({"N": N, "variant": "shifted"}, ("state", "value", "extrapolated", "policy_input"), rows))
    for name, v, _, pol in rows:
        print(f"cesaro V_{N}({name}) = {v:.6f}  policy {pol}")


def _reproduce_fig2(outdir: Path, n: int | None) -> None:
    sys = builtin_systems.fig2()
    classic = classic_vi(sys, "shifted", 100)
    res = cvi(sys, "shifted", n or CVI_HORIZON)
    p = optimal_orbit(sys)[0].period
    rows = [
        (s.name, float(classic.values[-1, x]), float(res.values[-1, x]), float(res.richardson(period=p)[x]))
        for x, s in enumerate(sys.states)
    ]
    meta = {"classic_N": 100, "cesaro_N": res.n_max, "variant": "shifted"}
    _write(outdir, "fig2_table1.csv", table_csv(meta, ("state", "classic", "cesaro", "cesaro_extrapolated"), rows))
    for name, c, v, _ in rows:
        print(f"{name}: classic {fmt_real(c)}  cesaro {v:.6f}")


def _policy_path(sys, result, N, x, target):
    """Follow ``result``'s horizon-``N`` policy from ``x`` until ``target``; return (states, cost)."""
    path, cost = [x], 0.0
    for _ in range(sys.n_states):
        u = int(result.choices[N - 1, x])
        cost += sys.cost(x, u)
        x = sys.successor(x, u)
        path.append(x)
        if x == target:
            break
    return path, cost


def _reproduce_linear(outdir: Path, n: int | None, window: int) -> None:
    sys = builtin_systems.linear()
    n_cap = n or 5000
    runs = {"cesaro": cvi(sys, "shifted", n_cap)}
    for g in (0.8, 0.6):
        runs[f"gamma_{g}"] = gamma_vi(sys, g, "shifted", n_cap)
    x6 = sys.state_index("6")
    cols = list(runs)
    rows = ([N] + [float(runs[c].values[N, x6]) for c in cols] for N in range(n_cap + 1))
    _write(outdir, "linear_traces_x6.csv", table_csv({"state": "6", "variant": "shifted"}, ["N"] + cols, rows))

    x4, x1 = sys.state_index("4"), sys.state_index("1")
    prow = []
    for c in ("cesaro", "gamma_0.6"):
        path, cost = _policy_path(sys, runs[c], n_cap, x4, x1)
        names = [sys.states[s].name for s in path]
        prow.append((c, runs[c].policy_input(n_cap, x4), " ".join(names), cost))
        print(f"{c}: at x=4 apply u={prow[-1][1]}, path {' -> '.join(names)}, cost {fmt_real(cost)}")
    _write(outdir, "linear_policies_x4.csv", table_csv({"N": n_cap}, ("family", "input", "path", "cost_to_1"), prow))

    cesaro_policy = runs["cesaro"].choices[n_cap - 1]
    sweep = []
    for fam in [Family("cesaro")] + [Family("gamma", gamma=g) for g in GAMMA_SWEEP]:
        try:
            conv = policy_convergence_N(sys, fam, "shifted", window, n_cap)
            n_star, pol = conv.n_star, conv.policy.choice
            same = bool(np.array_equal(pol, cesaro_policy))
            sweep.append((fam.name, "" if fam.gamma is None else fam.gamma, n_star, sys.inputs[int(pol[x4])].name, str(same).lower()))
        except NotConverged:
            sweep.append((fam.name, fam.gamma, "", "", "false"))
    _write(outdir, "linear_nstar.csv", table_csv({"window": window, "n_cap": n_cap, "variant": "shifted"}, ("family", "gamma", "n_star", "input_at_4", "matches_cesaro"), sweep))


def cmd_reproduce(args) -> int:
    outdir = Path(args.output)
    if args.emit_system:
        save_system(builtin_systems.builtin(args.example), args.emit_system)
    if args.example == "fig1":
        _reproduce_fig1(outdir, args.n)
    elif args.example == "fig2":
        _reproduce_fig2(outdir, args.n)
    else:
        _reproduce_linear(outdir, args.n, args.window)
    return 0


COMMANDS = {"vi": cmd_vi, "orbit": cmd_orbit, "decompose": cmd_decompose, "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except AssumptionViolation as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=_sys.stderr)
        return 2
    except (CesaroError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    _sys.exit(main())
