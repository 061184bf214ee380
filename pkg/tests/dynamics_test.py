import numpy as np
import pytest

from symphom.dynamics import (
    Family,
    FlowConfig,
    GridSamples,
    HamiltonianSpec,
    Integrator,
    PhasePoint,
    Profile,
    calabi,
    conjugate_by_shear,
    find_translated_orbit,
    iterate_lift,
    negated,
    rotation_vector,
    time_one_map,
    truncate_coercive,
)
from symphom.dynamics.flow import flow_map, jacobian_determinant
from symphom.dynamics.orbits import continue_translation, shoot, translation_seeds
from symphom.exceptions import IncompatibleIntegrator, NoOrbitFound, UnsupportedCoercive

KINETIC = HamiltonianSpec.integrable(Profile("quadratic"))


def test_zero_hamiltonian_is_the_identity():
    H = HamiltonianSpec.zero()
    z = PhasePoint(0.3, 0.7)
    assert time_one_map(H, z, FlowConfig()) == z
    assert time_one_map(H, z, FlowConfig.init(H)) == z


def test_integrable_flow_translates_q():
    z = time_one_map(KINETIC, PhasePoint(0.0, 0.5), FlowConfig.init(KINETIC))
    assert z.q == pytest.approx([0.5])
    assert z.p == pytest.approx([0.5])


def test_pendulum_equilibrium_is_fixed():
    H = HamiltonianSpec.pendulum(0.1)
    z = PhasePoint(0.0, 0.0)
    assert time_one_map(H, z, FlowConfig.init(H)) == z
    assert time_one_map(H, z, FlowConfig()) == z


def test_iterate_lift_accumulates_action():
    orbit = iterate_lift(KINETIC, PhasePoint(0.0, 1.0), 2, FlowConfig.init(KINETIC))
    assert orbit.end.q == pytest.approx([2.0])
    assert orbit.end.p == pytest.approx([1.0])
    assert orbit.average_action == pytest.approx(0.5)
    assert np.all(np.diff(orbit.times) > 0)


def test_zero_lift_stays_put():
    z = PhasePoint(0.25, -0.4)
    orbit = iterate_lift(HamiltonianSpec.zero(), z, 5, FlowConfig())
    assert orbit.end == z
    assert orbit.average_action == 0.0


def test_outside_support_is_fixed_bit_for_bit():
    H = HamiltonianSpec.localized_bump(-1.0, radius=0.2, time_dependent=True)
    z = PhasePoint(0.1, 0.7)
    orbit = iterate_lift(H, z, 3, FlowConfig())
    assert orbit.end == z
    assert orbit.action == 0.0


def test_rotation_vectors():
    orbit = iterate_lift(KINETIC, PhasePoint(0.0, 0.5), 4, FlowConfig.init(KINETIC))
    assert rotation_vector(orbit) == pytest.approx([0.5])

    H = HamiltonianSpec.pendulum(0.1)
    libration = iterate_lift(H, PhasePoint(0.5, 0.1), 8, FlowConfig.init(H))
    assert np.abs(rotation_vector(libration)).max() < 1.0 / 8


def test_splitting_refuses_non_separable():
    H = HamiltonianSpec.localized_bump(0.5)
    with pytest.raises(IncompatibleIntegrator):
        time_one_map(H, PhasePoint(0.0, 0.0), FlowConfig(Integrator.SPLITTING_SEPARABLE))


def test_time_one_map_preserves_area():
    rng = np.random.default_rng(0)
    points = [PhasePoint(q, p) for q, p in rng.uniform(-0.5, 0.5, size=(6, 2))]

    pendulum = HamiltonianSpec.pendulum(0.05)
    det = jacobian_determinant(pendulum, points, FlowConfig.init(pendulum))
    assert np.abs(det - 1.0).max() <= 1e-6

    bump = HamiltonianSpec.localized_bump(0.3, radius=0.4)
    det = jacobian_determinant(bump, points, FlowConfig())
    assert np.abs(det - 1.0).max() <= 1e-4


def test_autonomous_energy_is_conserved():
    H = HamiltonianSpec.pendulum(0.05)
    q, p = np.array([[0.3]]), np.array([[0.2]])
    q1, p1, _ = flow_map(H, q, p, FlowConfig.init(H), duration=64.0)
    assert abs(H(0.0, q1, p1) - H(0.0, q, p)).max() <= 1e-3


def test_lift_equivariance():
    H = HamiltonianSpec.localized_bump(0.3, radius=0.4, time_dependent=True)
    cfg = FlowConfig()
    z = time_one_map(H, PhasePoint(0.1, 0.05), cfg)
    shifted = time_one_map(H, PhasePoint(1.1, 0.05), cfg)
    assert shifted.q - 1.0 == pytest.approx(z.q, abs=1e-9)
    assert shifted.p == pytest.approx(z.p, abs=1e-9)


def test_translated_orbit_for_integrable_shooting():
    cfg = FlowConfig.init(KINETIC)
    z, residual = find_translated_orbit(KINETIC, 4, 0.5, PhasePoint(0.0, 0.0), cfg)
    assert residual <= cfg.newton_tol
    assert z.p == pytest.approx([0.5], abs=1e-9)


def test_translated_orbit_degenerate_cases():
    H = HamiltonianSpec.zero()
    cfg = FlowConfig()
    seed = PhasePoint(0.2, 0.4)
    z, residual = find_translated_orbit(H, 3, 0.0, seed, cfg)
    assert z == seed
    assert residual == 0.0
    with pytest.raises(NoOrbitFound):
        find_translated_orbit(H, 3, 0.3, seed, cfg)


def test_truncation_agrees_inside_and_vanishes_outside():
    T = truncate_coercive(KINETIC, 2.0)
    p = np.linspace(-2.0, 2.0, 41)[:, None]
    q = np.zeros_like(p)
    assert np.array_equal(T(0.0, q, p), KINETIC(0.0, q, p))
    far = np.array([[3.0], [-3.5], [10.0]])
    assert np.all(T(0.0, np.zeros_like(far), far) == 0.0)

    twice = truncate_coercive(truncate_coercive(KINETIC, 3.0), 2.0)
    assert np.array_equal(twice(0.0, q, p), T(0.0, q, p))


def test_truncated_flow_matches_on_bounded_orbits():
    H = HamiltonianSpec.pendulum(0.05)
    T = truncate_coercive(H, 2.0)
    cfg = FlowConfig()
    z = PhasePoint(0.5, 0.2)
    assert np.allclose(iterate_lift(H, z, 4, cfg).qs, iterate_lift(T, z, 4, cfg).qs, atol=1e-12)


def test_calabi():
    assert calabi(HamiltonianSpec.zero()) == 0.0

    H = HamiltonianSpec.localized_bump(1.0, radius=0.3)
    normalised = HamiltonianSpec.localized_bump(1.0 / calabi(H), radius=0.3)
    assert calabi(normalised) == pytest.approx(1.0, abs=1e-8)
    assert calabi(negated(H)) == pytest.approx(-calabi(H), abs=1e-12)

    with pytest.raises(UnsupportedCoercive):
        calabi(KINETIC)


def test_shear_conjugation_maps_orbits():
    H = truncate_coercive(HamiltonianSpec.pendulum(0.05), 2.0)
    s = 0.05
    K = conjugate_by_shear(H, s)
    cfg = FlowConfig()

    def ψ_inverse(z: PhasePoint) -> PhasePoint:
        return PhasePoint(z.q, z.p - s * np.sin(2 * np.pi * z.q))

    z = PhasePoint(0.3, 0.2)
    image = time_one_map(K, ψ_inverse(z), cfg)
    expected = ψ_inverse(time_one_map(H, z, cfg))
    assert image.q == pytest.approx(expected.q, abs=1e-3)
    assert image.p == pytest.approx(expected.p, abs=1e-3)


def test_spec_round_trips_through_a_mapping():
    H = HamiltonianSpec(
        Family.SEPARABLE_NONCONVEX,
        p_profile=Profile("polynomial", (0.0, 0.0, 1.0, 0.0, -0.2)),
        q_profile=Profile("cosine", (0.1, 0.02)),
        support_radius=2.5,
        time_dependent=True,
    )
    G = HamiltonianSpec.from_dict(H.to_dict())
    rng = np.random.default_rng(1)
    q, p = rng.uniform(-2, 2, size=(2, 50, 1))
    assert np.array_equal(G(0.3, q, p), H(0.3, q, p))


def test_support_flag_is_exclusive():
    with pytest.raises(ValueError):
        HamiltonianSpec(Family.ZERO)
    with pytest.raises(ValueError):
        HamiltonianSpec(Family.ZERO, support_radius=1.0, coercive=True)


def test_custom_grid_from_csv(tmp_path):
    t = np.array([0.0, 0.5])
    q = np.arange(8) / 8
    p = np.linspace(-1.0, 1.0, 9)
    T, Q, P = np.meshgrid(t, q, p, indexing="ij")
    values = 0.5 * P**2 + 0.1 * np.cos(2 * np.pi * Q)
    path = tmp_path / "h.csv"
    rows = np.column_stack([T.ravel(), Q.ravel(), P.ravel(), values.ravel()])
    np.savetxt(path, rows, delimiter=",", header="t,q,p,H", comments="")

    grid = GridSamples.from_csv(path)
    H = HamiltonianSpec(Family.CUSTOM_GRID, grid=grid, support_radius=1.0, margin=0.5)
    assert H(0.0, np.array([[0.25]]), np.array([[0.25]])) == pytest.approx(0.5 * 0.25**2, abs=1e-9)


def test_translated_orbit_beyond_the_shooting_box_needs_continuation():
    slow = HamiltonianSpec.integrable(Profile("quadratic", (0.01,)))
    cfg = FlowConfig.init(slow)
    target = np.array([2.0])
    q0, p0 = translation_seeds(slow, PhasePoint(0.0, 0.0), np.array([0.5]))
    _, residual = shoot(slow, 4, target, q0, p0, cfg)
    assert np.all(residual > cfg.newton_tol)

    z, residual = find_translated_orbit(slow, 4, 0.5, PhasePoint(0.0, 0.0), cfg)
    assert residual <= cfg.newton_tol
    assert z.p == pytest.approx([50.0], abs=1e-6)


def test_continuation_passes_a_turning_point():
    # D(p) = 4·(p³/3 − p) folds at p = ±1; the curve from p = 0 must turn back in λ
    H = HamiltonianSpec.integrable(Profile("polynomial", (0.0, 0.0, -0.5, 0.0, 1.0 / 12.0)))
    cfg = FlowConfig.init(H)
    found = continue_translation(H, 4, np.array([8.0]), np.zeros(1), np.array([-1.5]), cfg)
    assert found is not None
    p, residual = found
    assert residual <= cfg.newton_tol
    assert 4.0 * (p[0] ** 3 / 3.0 - p[0]) == pytest.approx(8.0, abs=1e-8)
