import dataclasses
import math

import numpy as np
import pytest

from cesaro_vi import (
    DiscountFunction,
    GapNotPositiveError,
    MinUniqueError,
    PositiveCycleError,
    alpha_coefficient,
    available_storage,
    build_alpha,
    build_certificate,
    enumerate_minimal_orbits,
    fig1,
    fig2,
    linear,
    optimal_orbit,
    pair_distances,
    parse_system,
    rotated_cost_identity_check,
    rotated_cost_table,
    suboptimality_gap,
    supply_rate,
    supply_rates,
    verify_certificate,
)
from cesaro_vi.builtin_systems import random_system
from cesaro_vi.errors import AssumptionViolation

from oracles import cycle_average, longest_storage, simple_cycles

# two states; the self-loop at A is optimal, but the storage at A is positive
OFFSET_STORAGE = "trans A a A 0\ntrans A b B -10\ntrans B c A 11\n"


def test_gap_examples():
    sys = fig1()
    assert suboptimality_gap(sys, optimal_orbit(sys)[0]) == math.inf
    two = parse_system("trans a s a 0\ntrans b t b 1\n")
    assert suboptimality_gap(two, optimal_orbit(two)[0]) == 1.0


def test_gap_linear_matches_oracle():
    sys = linear()
    star, ell = optimal_orbit(sys)
    delta = suboptimality_gap(sys, star)
    # independent brute force over every cycle of the 9-state graph
    averages = [cycle_average(sys, c) for c in simple_cycles(sys)]
    want = min(a - ell for a in averages if a - ell > 1e-12)
    assert delta == pytest.approx(want, abs=1e-12)
    assert delta == pytest.approx(1.05, abs=1e-12)


def test_gap_not_positive():
    sys = parse_system("trans a s a 0\ntrans b t b 1e-11\n")
    with pytest.raises(GapNotPositiveError):
        suboptimality_gap(sys, optimal_orbit(sys)[0])


def test_alpha_coefficient():
    assert alpha_coefficient(math.inf, 3.0) == 1.0
    assert alpha_coefficient(math.inf, 3.0, default=0.25) == 0.25
    assert alpha_coefficient(1.0, 2.0) == pytest.approx(0.4995, abs=1e-15)
    assert alpha_coefficient(0.5, 1.0) == pytest.approx(0.4995, abs=1e-15)
    with pytest.raises(GapNotPositiveError):
        alpha_coefficient(-1.0, 1.0)
    sys = linear()
    star, _ = optimal_orbit(sys)
    c = build_alpha(1.05, sys, star)
    assert c * pair_distances(sys, star).max() < 1.05


def test_supply_rate_examples():
    sys = fig1()
    star, ell = optimal_orbit(sys)
    assert supply_rate(sys, ("x3", "u32"), star, ell, 1.0) == -1.0
    assert supply_rate(sys, ("x1", "u12"), star, ell, 1.0) == -2.0
    lin = linear()
    lstar, lell = optimal_orbit(lin)
    c = 0.1
    assert supply_rate(lin, ("4", "5"), lstar, lell, c) == pytest.approx(6.2 - c * math.sqrt(18), abs=1e-12)
    rates = supply_rates(lin, lstar, lell, c)
    assert rates[lin.edge_index(3, lin.input_index("5"))] == pytest.approx(6.2 - c * math.sqrt(18), abs=1e-12)


def test_fig1_storage_by_hand():
    sys = fig1()
    cert = build_certificate(sys)
    assert cert.metric == "discrete" and cert.alpha_coeff == 1.0 and cert.delta == math.inf
    assert cert.storage.tolist() == [2.0, 0.0, 2.9]
    assert cert.rotated("x3", "u31") == pytest.approx(1.0, abs=1e-12)
    assert cert.rotated("x3", "u32") == pytest.approx(2.9, abs=1e-12)
    assert cert.rotated("x1", "u12") == 0.0 and cert.rotated("x2", "u21") == 0.0
    assert cert.verdict.holds
    assert (cert.rotated_cost >= 0).all()


def test_positive_cycle_detected():
    sys = fig2()
    star, ell = optimal_orbit(sys)
    with pytest.raises(PositiveCycleError) as exc:
        available_storage(sys, supply_rates(sys, star, ell, 1.0, "discrete"))
    assert exc.value.last_iterate.shape == (4,)


def test_storage_when_every_pair_is_on_the_orbit():
    sys = parse_system("trans a u a 3\n")
    assert build_certificate(sys).storage.tolist() == [0.0]
    # the cost -1 of b -> a is stored at b
    sys = parse_system("trans a u b 1\ntrans b v a -1\n")
    assert build_certificate(sys).storage.tolist() == [0.0, 1.0]


def test_storage_can_be_positive_on_the_optimal_orbit():
    sys = parse_system(OFFSET_STORAGE)
    cert = build_certificate(sys)
    assert cert.verdict.holds
    assert cert.orbit.pairs == ((0, 0),)
    assert cert.storage[0] == pytest.approx(10.4995, abs=1e-12)
    assert cert.storage[1] == 0.0


def test_rotated_cost_table():
    sys = fig1()
    assert np.array_equal(rotated_cost_table(sys, np.zeros(3), 0.0), sys.edge_cost)
    table = rotated_cost_table(sys, [2.0, 0.0, 2.9], 0.0)
    assert table.tolist() == pytest.approx([0.0, 0.0, 1.0, 2.9], abs=1e-12)


def test_verify_reports_worst_pair():
    sys = fig1()
    cert = build_certificate(sys)
    broken = dataclasses.replace(cert, rotated_cost=np.array([0.0, 0.0, 1.0, -0.5]))
    verdict = verify_certificate(sys, broken)
    assert not verdict
    assert verdict.pair == (2, 3)
    assert verdict.margin == pytest.approx(-1.5)


def test_linear_certificate():
    sys = linear()
    cert = build_certificate(sys)
    assert cert.verdict.holds
    assert cert.metric == "euclidean"
    assert cert.delta == pytest.approx(1.05, abs=1e-12)
    for x, u in cert.orbit.pairs:
        assert abs(cert.rotated(x, u)) <= 1e-9
    assert (cert.rotated_cost >= cert.alpha_coeff * cert.distances - 1e-9).all()
    identity = sys.edge_cost - cert.ell_star + cert.storage[sys.edge_state] - cert.storage[sys.edge_succ]
    assert np.max(np.abs(identity - cert.rotated_cost)) <= 1e-12


def test_fig2_certificate():
    sys = fig2()
    with pytest.raises(MinUniqueError) as exc:
        build_certificate(sys)
    assert exc.value.witness.pairs == ((2, 4),)
    forced = build_certificate(sys, force=True)
    assert not forced.verdict
    assert (2, 4) in forced.verdict.violations


def _random_certified(rng, max_states=6):
    while True:
        sys = random_system(rng, max_states=max_states, max_inputs=3)
        try:
            return sys, build_certificate(sys)
        except AssumptionViolation:
            continue


def test_random_certificates_properties():
    rng = np.random.default_rng(7)
    for _ in range(60):
        sys, cert = _random_certified(rng)
        assert cert.verdict.holds
        nx = sys.n_states
        # storage matches an explicit longest-path computation
        neg = {p: -float(s) for p, s in zip(sys.pairs(), sys.edge_cost - cert.ell_star - cert.alpha_coeff * cert.distances)}
        assert cert.storage.tolist() == pytest.approx(longest_storage(sys, neg, nx), abs=1e-9)
        # storage bounds
        lmax, lmin = sys.edge_cost.max(), sys.edge_cost.min()
        amax = cert.alpha_coeff * cert.distances.max()
        assert (cert.storage >= 0).all()
        assert (cert.storage >= -nx * (lmax - cert.ell_star) - 1e-9).all()
        assert (cert.storage <= nx * (amax - lmin + cert.ell_star) + 1e-9).all()
        # every orbit has nonnegative supply sum
        orbits = enumerate_minimal_orbits(sys)
        supply = sys.edge_cost - cert.ell_star - cert.alpha_coeff * cert.distances
        assert (orbits.orbit_sums(supply) >= -1e-9).all()
        assert cert.lambda_bar >= np.abs(cert.storage).max()


def test_identity_check_examples():
    lin = DiscountFunction.linear()
    quad = DiscountFunction.quad()
    sys = fig1()
    cert = build_certificate(sys)
    assert rotated_cost_identity_check(sys, lin, 3, "x3", ["u31", "u12", "u21"], np.zeros(3), 0.0) == 0.0
    rng = np.random.default_rng(1)
    x, us = "x3", []
    cur = sys.state_index(x)
    for _ in range(5):
        e = int(rng.integers(sys.offsets[cur], sys.offsets[cur + 1]))
        us.append(int(sys.edge_input[e]))
        cur = int(sys.edge_succ[e])
    assert rotated_cost_identity_check(sys, lin, 5, x, us, cert.storage, 0.0) < 1e-12
    lsys = linear()
    lcert = build_certificate(lsys)
    us = ["8", "-8"] * 10
    assert rotated_cost_identity_check(lsys, quad, 20, "1", us, lcert.storage, 0.0) < 1e-12
    with pytest.raises(ValueError):
        rotated_cost_identity_check(lsys, quad, 21, "1", us, lcert.storage, 0.0)


def test_certificate_csv():
    text = build_certificate(fig1()).to_csv().splitlines()
    assert text[0] == "header,delta=inf,alpha_coeff=1.0,ell_star=0.0,verdict=holds,metric=discrete,lambda_bar=2.9"
    assert text[1:4] == ["lambda,x1,2.0", "lambda,x2,0.0", "lambda,x3,2.9"]
    assert text[4] == "rotcost,x1,u12,0.0"
    assert len(text) == 1 + 3 + 4
