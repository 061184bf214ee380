import numpy as np
import pytest

from symphom.dynamics import FlowConfig, HamiltonianSpec, Integrator, Profile, negated
from symphom.exceptions import GridBudgetExceeded, NoGeneratingFunction, OutOfBox, UnsupportedCoercive
from symphom.genfunc import (
    GridConfig,
    LandscapeCache,
    Reduction,
    build_landscape,
    compose_landscape,
    endpoint_actions,
    fiber_critical_orbits,
    generating_values,
    grad_residual,
    graph_landscape,
    landscape_key,
    step_genfun,
    twist_check,
)
from symphom.genfunc.cache import decode, encode

KINETIC = HamiltonianSpec.integrable(Profile("quadratic"))
COARSE = GridConfig(resolution=32)


@pytest.mark.parametrize("method", ["newton", "fixed_point"])
def test_integrable_generating_function_is_time_times_energy(method):
    cfg = FlowConfig.init(KINETIC)
    q = np.linspace(0.0, 1.0, 7, endpoint=False)[:, None]
    P = np.linspace(-1.0, 1.0, 7)[:, None]
    solution = generating_values(KINETIC, 0.0, 0.5, q, P, cfg, method=method)
    assert solution.values == pytest.approx(0.25 * P[:, 0] ** 2, abs=1e-10)
    assert solution.p == pytest.approx(P, abs=1e-10)
    assert solution.residual <= 1e-9


def test_zero_hamiltonian_generates_nothing():
    H = HamiltonianSpec.zero()
    solution = generating_values(H, 0.0, 3.0, [[0.2], [0.7]], [[0.4], [-0.1]], FlowConfig())
    assert np.all(solution.values == 0.0)
    assert solution.residual == 0.0


def test_twist_holds_for_convex_kinetic_energy():
    assert twist_check(KINETIC, 0.0, 4.0, FlowConfig.init(KINETIC))


def test_step_table_for_short_segment():
    cfg = FlowConfig.init(KINETIC)
    table = step_genfun(KINETIC, 0.0, 0.125, cfg, q_nodes=8, P_nodes=9)
    expected = 0.125 * 0.5 * table.P_axis**2
    assert table.table == pytest.approx(np.broadcast_to(expected, table.table.shape), abs=1e-10)
    assert table.iteration_residual <= 1e-9


def test_step_table_is_one_dimensional():
    H = HamiltonianSpec.zero(n=2)
    with pytest.raises(ValueError):
        step_genfun(H, 0.0, 0.1, FlowConfig())


def test_zero_landscape_is_flat_with_chain_index():
    L = build_landscape(HamiltonianSpec.zero(), 3, 0.2, COARSE)
    assert np.all(L.values == 0.0)
    assert L.kept_index == 0
    assert L.negative_index == 2
    assert L.eliminated_index == 2
    assert L.periodic == (True,)


def test_integrable_landscape_is_constant_energy():
    L = build_landscape(KINETIC, 2, 0.5, COARSE)
    assert L.values == pytest.approx(np.full(L.values.shape, 2 * 0.125), abs=1e-10)
    assert grad_residual(L, [0.3]) == pytest.approx(0.0, abs=1e-8)


def test_kept_pair_has_three_variables():
    L = build_landscape(KINETIC, 1, 0.3, COARSE, reduction="kept_pair")
    assert L.values.shape == (32, 32, 32)
    assert L.labels == ("x", "u", "P")
    assert L.periodic == (True, False, False)
    assert L.kept_index == 1
    assert L.values.min() < L.negative_level < 0.0


def test_grad_residual_rejects_box_edges():
    L = build_landscape(KINETIC, 1, 0.3, COARSE, reduction="kept_pair")
    with pytest.raises(OutOfBox):
        grad_residual(L, [0.0, L.axes[1][0], 0.3])


def test_composition_multiplies_time():
    L = build_landscape(KINETIC, 2, 0.5, COARSE)
    G = compose_landscape(L, 2)
    assert G.total_time == 4
    assert G.values == pytest.approx(np.full(G.values.shape, 4 * 0.125), abs=1e-10)
    assert compose_landscape(L, 1) is L


def test_landscape_budget_is_enforced():
    with pytest.raises(GridBudgetExceeded):
        build_landscape(KINETIC, 1, 0.0, GridConfig(resolution=64, budget=10))


def test_graph_landscape_of_identity_is_zero():
    L = graph_landscape(HamiltonianSpec.zero(), 2, COARSE)
    assert L.graph_mode
    assert L.values.shape == (32, 32)
    assert np.all(L.values == 0.0)
    assert L.negative_index == 1


def test_graph_landscape_needs_compact_support():
    with pytest.raises(UnsupportedCoercive):
        graph_landscape(KINETIC, 1, COARSE)


def test_pendulum_fiber_orbits_are_the_equilibria():
    a = 0.01
    orbits = fiber_critical_orbits(HamiltonianSpec.pendulum(a), 1, 0.0)
    assert [o.value for o in orbits] == pytest.approx([a, -a], abs=1e-9)
    assert orbits[0].x == pytest.approx([0.0], abs=1e-9)
    assert orbits[1].x == pytest.approx([0.5], abs=1e-9)
    assert not any(o.degenerate for o in orbits)


def test_integrable_fiber_is_degenerate():
    (orbit,) = fiber_critical_orbits(KINETIC, 4, 0.5)
    assert orbit.degenerate
    assert orbit.value == pytest.approx(0.125)
    assert orbit.rotation == pytest.approx([0.5])


def test_cache_round_trip(tmp_path):
    cache = LandscapeCache.init(tmp_path / "landscapes")
    built = cache.build(KINETIC, 2, 0.25, COARSE)
    assert len(list((tmp_path / "landscapes").glob("*.landscape"))) == 1
    loaded = cache.build(KINETIC, 2, 0.25, COARSE)
    assert np.array_equal(built.values, loaded.values)
    assert loaded.negative_index == built.negative_index


def test_container_keeps_the_negative_end():
    L = build_landscape(KINETIC, 1, 0.3, COARSE, reduction="kept_pair")
    decoded = decode(encode(L), KINETIC, COARSE)
    assert decoded.negative_level == L.negative_level
    assert decoded.boundary_tag == L.boundary_tag
    assert decoded.durations == L.durations


def test_key_depends_on_integrator():
    splitting = FlowConfig.init(KINETIC)
    midpoint = FlowConfig()
    assert landscape_key(KINETIC, 1, 1, np.zeros(1), COARSE, splitting) != landscape_key(
        KINETIC, 1, 1, np.zeros(1), COARSE, midpoint
    )


def test_step_table_fails_where_the_segment_stops_contracting():
    H = HamiltonianSpec.pendulum(1.0)
    cfg = FlowConfig.init(H)
    step_genfun(H, 0.0, 0.01, cfg, q_nodes=8, P_nodes=9)
    with pytest.raises(NoGeneratingFunction):
        step_genfun(H, 0.0, 1.0, cfg, q_nodes=8, P_nodes=9)


def test_endpoint_action_of_free_motion():
    cfg = FlowConfig.init(KINETIC)
    solution = endpoint_actions(KINETIC, 0.0, 0.5, [[0.1], [0.4]], [[0.3], [-0.2]], cfg)
    assert solution.p[:, 0] == pytest.approx([0.6, -0.4], abs=1e-9)
    assert solution.action == pytest.approx([0.09, 0.04], abs=1e-9)
    assert solution.values == pytest.approx([0.09, 0.04], abs=1e-9)


@pytest.mark.parametrize(
    "H, expected",
    [
        (KINETIC, True),
        (HamiltonianSpec.pendulum(0.1), True),
        (HamiltonianSpec.integrable(Profile("quadratic", (-1.0,))), False),
        (negated(KINETIC), False),
        (HamiltonianSpec.integrable(Profile("polynomial", (0.0, 0.0, 0.5, 0.0, 1.0))), False),
        (HamiltonianSpec.localized_bump(0.1), False),
        (HamiltonianSpec.zero(), False),
    ],
)
def test_tonelli_families(H, expected):
    assert H.is_tonelli is expected


def test_folded_pendulum_is_chained_from_short_segments():
    a = 0.1
    L = build_landscape(HamiltonianSpec.pendulum(a), 1, 0.0, COARSE)
    assert L.reduction is Reduction.BROKEN_ORBIT
    assert L.kept_index == 0
    assert len(L.durations) > 1
    assert sum(L.durations) == pytest.approx(1.0)
    assert L.negative_index == len(L.durations) - 1
    # the top equilibrium q = 0 is a node and its constant orbit maximizes the chain
    assert L.values.max() == pytest.approx(a, abs=1e-6)
    assert L.values.argmax() == 0


@pytest.mark.parametrize("y", [0.0, 0.2, -0.35])
def test_broken_orbit_agrees_with_elimination_on_a_twisting_segment(y):
    H = HamiltonianSpec.pendulum(0.003)
    eliminated = build_landscape(H, 1, y, COARSE, reduction="eliminated")
    broken = build_landscape(H, 1, y, COARSE, reduction="broken_orbit")
    assert eliminated.reduction is Reduction.ELIMINATED
    assert broken.values.max() <= eliminated.values.max() + 1e-6
    assert broken.values.max() == pytest.approx(eliminated.values.max(), abs=3e-3)


def test_broken_orbit_needs_a_convex_coercive_hamiltonian():
    with pytest.raises(UnsupportedCoercive):
        build_landscape(HamiltonianSpec.localized_bump(0.1), 1, 0.0, COARSE, reduction="broken_orbit")


def test_kept_pair_of_a_coercive_hamiltonian_runs_on_the_truncation():
    H = HamiltonianSpec.pendulum(0.003)
    assert FlowConfig.init(H).integrator is Integrator.SPLITTING_SEPARABLE
    L = build_landscape(H, 1, 0.0, COARSE, reduction="kept_pair")
    assert L.reduction is Reduction.KEPT_PAIR
    assert L.hamiltonian.support_radius is not None
    assert not L.hamiltonian.is_separable
    assert L.flow.integrator is Integrator.IMPLICIT_MIDPOINT


@pytest.mark.parametrize(
    "H",
    [HamiltonianSpec.localized_bump(0.05), HamiltonianSpec.pendulum(0.003)],
    ids=["bump", "truncated-pendulum"],
)
def test_quadratic_leakage_stays_under_its_bound(H):
    L = build_landscape(H, 1, 0.1, COARSE, reduction="kept_pair")
    tolerance = L.leakage_tolerance()
    assert tolerance > 0.0
    assert L.quadratic_leakage() <= tolerance


def test_eliminated_landscape_has_no_leakage():
    L = build_landscape(KINETIC, 1, 0.3, COARSE)
    assert L.quadratic_leakage() == 0.0
    assert L.leakage_tolerance() == 0.0


def test_key_depends_on_reduction():
    cfg = FlowConfig.init(KINETIC)
    keys = {landscape_key(KINETIC, 1, 1, np.zeros(1), COARSE, cfg, reduction=r) for r in Reduction}
    assert len(keys) == len(Reduction)
