import numpy as np
import pytest

from cesaro_vi import (
    AssumptionViolation,
    CostVariant,
    DiscountFunction,
    ExplosionError,
    Family,
    InvalidDiscountError,
    NotConverged,
    bellman_residual,
    beta_value,
    brute_force_value,
    brute_force_values,
    build_certificate,
    cesaro_cost_direct,
    cesaro_weights,
    classic_vi,
    cvi,
    difference_sequence,
    fig1,
    fig2,
    gamma_vi,
    linear,
    parse_system,
    policy_convergence_N,
    stage_costs,
)
from cesaro_vi.builtin_systems import random_system

from oracles import best_weighted


def test_horizon_zero_is_zero():
    for fn in (classic_vi, cvi):
        r = fn(fig2(), "raw", 0)
        assert r.values.shape == (1, 4) and not r.values.any()
    assert not gamma_vi(fig2(), 0.5, "raw", 0).values.any()


def test_classic_fig1_oscillates():
    r = classic_vi(fig1(), "shifted", 100)
    x3 = 2
    for N in range(2, 101):
        assert abs(r.values[N, x3] - (-1.9 if N % 2 == 0 else 0.0)) <= 1e-12


def test_classic_fig2_table():
    r = classic_vi(fig2(), "shifted", 100)
    assert r.values[100].tolist() == [-1.0, -3.0, -1.0, 4.0]


def test_gamma_one_step_is_min_cost():
    sys = linear()
    for g in (0.2, 0.9):
        r = gamma_vi(sys, g, "raw", 1)
        assert r.values[1].tolist() == np.minimum.reduceat(sys.edge_cost, sys.offsets[:-1]).tolist()


def test_gamma_validation():
    for g in (0.0, 1.0, -0.3, None):
        with pytest.raises(InvalidDiscountError):
            Family("gamma", gamma=g)
    with pytest.raises(ValueError):
        Family("harmonic")
    with pytest.raises(ValueError):
        Family("beta")


def test_cvi_fig1_small_horizons():
    r = cvi(fig1(), "shifted", 2)
    assert r.values[1, 2] == 0.0
    assert r.values[2, 2] == pytest.approx(-0.9, abs=1e-15)
    assert brute_force_value(fig1(), "x3", 2, [1.0, 0.5]) == pytest.approx(-0.9, abs=1e-15)


def test_cvi_fig1_limits_and_policy():
    r = cvi(fig1(), "shifted", 10**5)
    assert r.values[-1].tolist() == pytest.approx([-1.0, 1.0, -0.9], abs=1e-4)
    assert r.policy_input(10**5, "x3") == "u31"
    assert r.richardson(period=2).tolist() == pytest.approx([-1.0, 1.0, -0.9], abs=1e-9)


def test_cvi_fig2_first_state():
    r = cvi(fig2(), "shifted", 1000)
    for N in range(2, 1001):
        assert abs(r.values[N, 0] - (1 - 1 / N)) <= 1e-12


def test_policy_accessors():
    r = cvi(fig1(), "shifted", 5)
    assert r.n_max == 5
    assert len(r.tables()) == 6 and len(r.policies()) == 5
    assert r.table(0).values.tolist() == [0.0, 0.0, 0.0]
    assert r.policy(5)[2] == fig1().input_index("u31")
    assert r.value(2, "x3") == r.values[2, 2]
    with pytest.raises(ValueError):
        r.policy(0)
    with pytest.raises(ValueError):
        cvi(fig1(), "shifted", -1)


def test_beta_linear_equals_cvi():
    rng = np.random.default_rng(0)
    lin = DiscountFunction.linear()
    for sys in [fig1(), fig2(), linear()] + [random_system(rng) for _ in range(10)]:
        r = cvi(sys, "raw", 40)
        for N in (1, 2, 7, 40):
            table, _ = beta_value(sys, lin, "raw", N)
            assert np.max(np.abs(table.values - r.values[N])) <= 1e-12


def test_beta_single_stage():
    sys = linear()
    table, policy = beta_value(sys, "quad", "raw", 1)
    assert table.values.tolist() == np.minimum.reduceat(sys.edge_cost, sys.offsets[:-1]).tolist()
    assert table.family == "beta(quad)"


def test_beta_quad_fig1_near_cesaro_limit():
    table, policy = beta_value(fig1(), "quad", "shifted", 50)
    # O(1/N) with the profile's Lipschitz constant as the factor
    assert abs(table.values[2] - (-0.9)) <= DiscountFunction.quad().lipschitz / 50
    assert policy[2] == fig1().input_index("u31")


def test_beta_matches_brute_force():
    rng = np.random.default_rng(4)
    quad = DiscountFunction.quad()
    for _ in range(20):
        sys = random_system(rng)
        for N in (1, 3, 6):
            table, _ = beta_value(sys, quad, "raw", N)
            want = brute_force_values(sys, N, quad.weights(N))
            assert np.max(np.abs(table.values - want)) <= 1e-12


def test_brute_force_examples():
    sys = linear()
    r = cvi(sys, "raw", 3)
    assert brute_force_value(sys, "4", 3, [1, 2 / 3, 1 / 3]) == pytest.approx(r.value(3, "4"), abs=1e-12)
    assert brute_force_value(sys, "4", 1, [1.0]) == min(sys.cost(3, u) for u in sys.edge_input[sys.offsets[3]:sys.offsets[4]])
    with pytest.raises(ExplosionError):
        brute_force_values(sys, 8, np.ones(8), cap=10**5)
    with pytest.raises(ValueError):
        brute_force_values(sys, 3, [1.0])


def test_brute_force_agrees_with_recursive_oracle():
    rng = np.random.default_rng(9)
    for _ in range(15):
        sys = random_system(rng, max_states=4)
        N = 4
        w = cesaro_weights(N)
        got = brute_force_values(sys, N, w)
        for x in range(sys.n_states):
            assert got[x] == pytest.approx(best_weighted(sys, x, list(w)), abs=1e-12)


def test_cesaro_cost_direct_examples():
    sys = fig1()
    assert cesaro_cost_direct(sys, "x3", ["u31", "u12"], "shifted") == pytest.approx((-0.9, -0.9), abs=1e-15)
    assert cesaro_cost_direct(sys, "x3", ["u32"], "raw") == (0.0, 0.0)
    assert cesaro_cost_direct(sys, "x3", [], "raw") == (0.0, 0.0)
    f2 = fig2()
    N = 12
    d, w = cesaro_cost_direct(f2, "x0", ["u02"] + ["u22"] * (N - 1), "shifted")
    assert d == pytest.approx(1.0, abs=1e-15) and w == pytest.approx(1.0, abs=1e-15)


def test_bellman_residual_examples():
    assert bellman_residual(fig1(), [-1.0, 1.0, -0.9], "shifted") < 1e-9
    assert bellman_residual(fig2(), [1.0, 0.0, 0.0, 6.0], "shifted") < 1e-9
    sys = linear()
    mins = np.minimum.reduceat(sys.edge_cost, sys.offsets[:-1])
    assert bellman_residual(sys, np.zeros(9), "raw") == np.max(np.abs(mins))


@pytest.mark.parametrize("make", [fig1, fig2, linear])
def test_bellman_residual_of_converged_cesaro(make):
    sys = make()
    r = cvi(sys, "shifted", 10**5)
    assert bellman_residual(sys, r.table(10**5), "shifted") < 1e-4


def test_policies_shift_invariant():
    rng = np.random.default_rng(12)
    for sys in [fig1(), fig2(), linear()] + [random_system(rng) for _ in range(10)]:
        raw = cvi(sys, "raw", 200)
        shifted = cvi(sys, "shifted", 200)
        assert np.array_equal(raw.choices, shifted.choices)


def test_stage_costs_variants():
    sys = linear(offset=2.0)
    assert np.array_equal(stage_costs(sys, "raw"), sys.edge_cost)
    assert stage_costs(sys, "shifted") == pytest.approx(sys.edge_cost - 2.0, abs=1e-12)
    assert np.array_equal(stage_costs(sys, "shifted", ell_star=1.0), sys.edge_cost - 1.0)
    cert = build_certificate(sys)
    assert np.array_equal(stage_costs(sys, CostVariant.ROTATED, certificate=cert), cert.rotated_cost)
    with pytest.raises(AssumptionViolation):
        stage_costs(fig2(), "rotated", certificate=build_certificate(fig2(), force=True))
    with pytest.raises(ValueError):
        stage_costs(sys, "shifted", ell_star=float("inf"))
    with pytest.raises(ValueError):
        stage_costs(sys, "tilted")


def test_rotated_values_monotone():
    for sys in (fig1(), linear()):
        cert = build_certificate(sys)
        for fn in (cvi, classic_vi):
            r = fn(sys, "rotated", 2000, certificate=cert)
            assert np.diff(r.values, axis=0).min() >= -1e-9


def test_policy_convergence():
    single = parse_system("trans a u a 1\n")
    conv = policy_convergence_N(single, Family("cesaro"), "raw", window=50, n_cap=100)
    assert conv.n_star == 1
    assert "50" in conv.rule
    sys = linear()
    conv = policy_convergence_N(sys, Family("cesaro"), "shifted", 50, 5000)
    assert sys.inputs[conv.policy[3]].name == "5"
    conv = policy_convergence_N(sys, Family("gamma", gamma=0.6), "shifted", 50, 5000)
    assert sys.inputs[conv.policy[3]].name == "-3"
    with pytest.raises(NotConverged):
        policy_convergence_N(sys, Family("gamma", gamma=0.75), "shifted", 50, 2000)
    with pytest.raises(NotConverged):
        policy_convergence_N(fig1(), Family("classic"), "shifted", 5, 100)
    with pytest.raises(ValueError):
        policy_convergence_N(sys, Family("cesaro"), "raw", 60, 50)


def test_difference_sequence():
    c = 3.0
    single = parse_system(f"trans a u a {c}\n")
    d = difference_sequence(single, "a", 50)
    # V_N = c (N + 1) / 2 for N >= 1 and V_0 = 0
    assert d[0] == c
    assert d[1:] == pytest.approx(np.full(49, c / 2), abs=1e-12)
    lin = difference_sequence(linear(), None, 4000)
    assert lin.shape == (4000, 9)
    assert np.max(np.abs(lin[-1])) < 5e-3
    shifted = difference_sequence(linear(offset=2.0), None, 10**4)
    assert np.max(np.abs(shifted[-1] - 1.0)) < 2e-3


def test_classic_fig1_policy_alternates():
    r = classic_vi(fig1(), "shifted", 40)
    for N in range(1, 41):
        assert r.policy_input(N, "x3") == ("u31" if N % 2 == 0 else "u32")
