"""Cesàro value iteration, periodic-orbit analysis and dissipativity certificates
for finite deterministic systems ``x(k+1) = f(x(k), u(k))``."""
from ._backend import BACKEND
from .builtin_systems import builtin, fig1, fig2, linear, random_system
from .discount import DiscountFunction, discount, validate_discount
from .dissipativity import (
    CertificateVerdict,
    DissipativityCertificate,
    alpha_coefficient,
    available_storage,
    build_alpha,
    build_certificate,
    rotated_cost_identity_check,
    rotated_cost_table,
    suboptimality_gap,
    supply_rate,
    supply_rates,
    verify_certificate,
)
from .errors import *  # noqa: F401,F403
from .orbits import (
    Decomposition,
    MinUniqueVerdict,
    Orbit,
    OrbitSet,
    Unreachable,
    check_min_unique,
    decompose_trajectory,
    enumerate_minimal_orbits,
    min_mean_cycle,
    optimal_orbit,
    orbit_distance,
    pair_distances,
    reachability_horizon,
)
from .system import (
    InputId,
    StateId,
    Trajectory,
    TransitionSystem,
    feasible_inputs,
    load_system,
    parse_system,
    save_system,
    serialize_system,
    simulate,
    total_cost,
)
from .vi import (
    CostVariant,
    Family,
    Policy,
    PolicyConvergence,
    ValueTable,
    VIResult,
    bellman_residual,
    beta_value,
    brute_force_value,
    brute_force_values,
    cesaro_cost_direct,
    cesaro_weights,
    classic_vi,
    cvi,
    difference_sequence,
    gamma_vi,
    policy_convergence_N,
    run_family,
    stage_costs,
)

__version__ = "0.1.0"
