import numpy as np
import pytest

from symphom._data_structures import SampledFunction
from symphom.dynamics import (
    FlowConfig,
    HamiltonianSpec,
    Integrator,
    PhasePoint,
    Profile,
    calabi,
    conjugate_by_shear,
    iterate_lift,
)
from symphom.exceptions import EmptyInput, InfeasibleAlpha
from symphom.genfunc import GridConfig
from symphom.measures import (
    LiouvilleMeasure,
    MeasureConfig,
    average_action,
    build_mu_alpha,
    caratheodory,
    emit_R_set,
    observables,
    orbit_measure,
    r_set_from_table,
    rotation_of_measure,
    support_checks,
    support_distance,
)
from symphom.oracle import pendulum_plateau, pendulum_table

KINETIC = HamiltonianSpec.integrable(Profile("quadratic"))
PENDULUM = HamiltonianSpec.pendulum(0.1)


def lifted(H, q, p, k, cfg=None):
    return iterate_lift(H, PhasePoint(q, p), k, cfg or FlowConfig.init(H), lookahead=True)


def line_table(axis, values):
    return SampledFunction((np.asarray(axis, dtype=float),), np.asarray(values, dtype=float), (False,))


def test_dirac_at_a_fixed_point():
    μ = orbit_measure([lifted(PENDULUM, 0.0, 0.0, 8)])
    assert μ.rotation == pytest.approx([0.0])
    assert μ.invariance_defect == pytest.approx(0.0, abs=1e-12)
    assert μ.avg_action == pytest.approx(-0.1)
    assert average_action(μ, PENDULUM) == pytest.approx(-0.1)
    assert rotation_of_measure(μ, PENDULUM) == pytest.approx([0.0])


def test_integrable_orbit_measure():
    μ = orbit_measure([lifted(KINETIC, 0.1, 0.3, 8)])
    assert μ.rotation == pytest.approx([0.3])
    assert rotation_of_measure(μ, KINETIC) == pytest.approx([0.3])
    assert μ.invariance_defect <= 2.0 / 8
    assert average_action(μ, KINETIC) == pytest.approx(0.3 * 0.3 - 0.045)
    assert μ.avg_action == pytest.approx(0.045)


def test_rotation_is_linear_in_the_weights():
    μ = orbit_measure([lifted(KINETIC, 0.0, 0.2, 4), lifted(KINETIC, 0.5, 0.6, 4)], [0.5, 0.5])
    assert μ.rotation == pytest.approx([0.4])
    assert len(μ.to_dict()["pieces"]) == 2


@pytest.mark.parametrize("k", [2, 4, 16])
def test_invariance_defect_is_bounded_by_two_over_k(k):
    μ = orbit_measure([lifted(PENDULUM, 0.3, 0.45, k)])
    assert μ.invariance_defect <= 2.0 / k


def test_orbit_measure_contract():
    with pytest.raises(EmptyInput):
        orbit_measure([])
    orbit = lifted(KINETIC, 0.0, 0.2, 2)
    with pytest.raises(ValueError):
        orbit_measure([orbit, orbit], [0.7, 0.7])
    bare = iterate_lift(KINETIC, PhasePoint(0.0, 0.2), 2, FlowConfig.init(KINETIC))
    with pytest.raises(ValueError):
        orbit_measure([bare])


def test_observables_are_fixed_and_bounded():
    q, p = np.random.default_rng(5).normal(size=(2, 50, 2))
    values = observables(2)(0.0, q, p)
    assert values.shape == (50, 32)
    assert np.abs(values).max() <= 1.0
    assert np.array_equal(values, observables(2)(0.0, q, p))


@pytest.mark.parametrize(
    "H",
    [
        HamiltonianSpec.localized_bump(1.0),
        HamiltonianSpec.localized_bump(-0.5, radius=0.3, time_dependent=True),
        HamiltonianSpec.integrable(Profile("quadratic"), support_radius=2.0),
    ],
)
def test_liouville_identities(H):
    μ = LiouvilleMeasure(H)
    assert np.abs(rotation_of_measure(μ, H)).max() <= 1e-3
    assert average_action(μ, H) == pytest.approx(-(H.n + 1) * calabi(H), abs=1e-3)


def test_dirac_outside_the_support():
    H = HamiltonianSpec.localized_bump(1.0)
    μ = orbit_measure([lifted(H, 0.5, 1.0, 4)])
    assert average_action(μ, H) == 0.0
    report = support_checks(μ, H)
    assert report.mass_inside == 0.0
    assert report.level_spread == 0.0


def test_rotating_measure_lives_inside_the_support():
    H = HamiltonianSpec.integrable(Profile("quadratic"), support_radius=2.0)
    μ = orbit_measure([lifted(H, 0.0, 0.5, 8)])
    report = support_checks(μ, H, p=0.5)
    assert report.mass_inside == pytest.approx(1.0)
    assert report.level_spread <= 1e-12
    assert report.identity_gap == pytest.approx(0.0, abs=1e-9)


def test_pendulum_measure_lies_on_a_level_set():
    μ = orbit_measure([lifted(PENDULUM, 0.2, 0.5, 4, FlowConfig.init(PENDULUM, substeps=64))])
    report = support_checks(μ, PENDULUM)
    assert report.level_spread <= 1e-2
    assert report.level == pytest.approx(0.125 + 0.1 * np.cos(0.4 * np.pi), abs=1e-2)


def test_shear_conjugation_pulls_supports_back():
    s = 0.1
    cfg = FlowConfig(Integrator.IMPLICIT_MIDPOINT, substeps=128)
    orbit = lifted(PENDULUM, 0.2, 0.5, 2, cfg)
    image = lifted(conjugate_by_shear(PENDULUM, s), 0.2, 0.5 - s * np.sin(0.4 * np.pi), 2, cfg)
    pulled = np.column_stack([orbit.qs, orbit.ps - s * np.sin(2.0 * np.pi * orbit.qs)])
    assert support_distance(pulled, np.column_stack([image.qs, image.ps])) <= 1e-2


def test_caratheodory_picks_the_smallest_simplex():
    indices, weights = caratheodory(np.array([[0.0], [1.0], [3.0]]), np.array([0.5]))
    assert indices == (0, 1)
    assert weights == pytest.approx([0.5, 0.5])

    points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
    indices, weights = caratheodory(points, np.array([0.2, 0.3]))
    assert indices == (0, 1, 2)
    assert weights == pytest.approx([0.5, 0.2, 0.3])

    assert caratheodory(np.array([[0.0], [1.0]]), np.array([2.0])) is None


def kinetic_table():
    axis = np.linspace(0.0, 0.8, 9)
    return line_table(axis, 0.5 * axis**2)


@pytest.mark.parametrize("k", [8, 16, 32])
def test_mu_alpha_of_an_integrable_hamiltonian(k):
    μ = build_mu_alpha(KINETIC, 0.4, 0.4, k, table=kinetic_table())
    assert len(μ.pieces) == 1
    assert μ.rotation == pytest.approx([0.4])
    assert μ.avg_action == pytest.approx(0.4 * 0.4 - 0.08, abs=1e-9)


def test_mu_alpha_outside_the_clarke_differential():
    with pytest.raises(InfeasibleAlpha):
        build_mu_alpha(KINETIC, 1.0, 0.4, 8, table=kinetic_table())


def test_mu_alpha_on_the_pendulum_plateau():
    grid = np.linspace(-0.2, 0.4, 7)
    table = line_table(grid, pendulum_table(0.1, grid).values)
    μ = build_mu_alpha(PENDULUM, 0.0, 0.1, 8, table=table)
    assert μ.rotation == pytest.approx([0.0], abs=1e-9)
    assert μ.avg_action == pytest.approx(-0.1, abs=1e-9)
    assert support_checks(μ, PENDULUM, p=0.1).identity_gap == pytest.approx(0.0, abs=1e-9)


@pytest.mark.slow
def test_mu_alpha_off_the_plateau():
    grid = np.linspace(0.6, 1.0, 5)
    table = line_table(grid, pendulum_table(0.1, grid).values)
    (lo, hi) = np.sort([(table.values[2] - table.values[1]) / 0.1, (table.values[3] - table.values[2]) / 0.1])
    α = 0.5 * (lo + hi)
    μ = build_mu_alpha(PENDULUM, α, 0.8, 32, table=table)
    assert μ.rotation == pytest.approx([α], abs=1e-5)
    assert abs(μ.avg_action - (0.8 * α - table.values[2])) <= 0.05


def test_R_set_of_zero_is_the_origin():
    rset = r_set_from_table(line_table(np.linspace(-1.0, 1.0, 5), np.zeros(5)))
    assert rset.points().tolist() == [[0.0, 0.0]]
    assert rset.extremal.all()


def test_R_set_of_an_integrable_hamiltonian_is_its_legendre_graph():
    axis = np.linspace(-1.0, 1.0, 21)
    rset = r_set_from_table(line_table(axis, 0.5 * axis**2))
    assert np.abs(rset.action - 0.5 * rset.α[:, 0] ** 2).max() <= 2e-3
    assert rset.extremal.any()
    assert len(rset.to_rows()) == len(rset.action)


def test_R_set_collapses_on_the_pendulum_plateau():
    a = 0.1
    axis = np.linspace(-0.3, 0.3, 7)
    assert axis.max() < pendulum_plateau(a)[1]
    rset = r_set_from_table(line_table(axis, pendulum_table(a, axis).values))
    assert rset.points().tolist() == [[0.0, -a]]


def test_R_set_from_the_selector_of_an_integrable_hamiltonian():
    axis = np.linspace(-1.0, 1.0, 11)
    cfg = MeasureConfig(table_k=1, grids=GridConfig(resolution=16))
    rset = emit_R_set(KINETIC, axis, samples=3, cfg=cfg)
    assert set(np.round(rset.p[:, 0], 12)) == set(np.round(axis[1:-1], 12))
    assert np.abs(rset.action - 0.5 * rset.α[:, 0] ** 2).max() <= 1e-2


def test_R_set_table_must_match_the_dimension():
    with pytest.raises(ValueError):
        emit_R_set(HamiltonianSpec.zero(n=2), [[0.0], [0.0]], table=line_table([-1.0, 0.0, 1.0], np.zeros(3)))
