import numpy as np
import pytest

from symphom.dynamics import HamiltonianSpec, Profile
from symphom.exceptions import NonConvexInput, TooLarge
from symphom.genfunc import GeneratingLandscape, GridConfig
from symphom.oracle import (
    Method,
    brute_force_minimax,
    lax_oleinik_effham,
    lax_oleinik_table,
    pendulum_effham,
    pendulum_plateau,
    pendulum_table,
)
from symphom.selector import CohomologyClass, homogenize, minimax

KINETIC = HamiltonianSpec.integrable(Profile("quadratic"))


def torus_landscape(values, periodic, negative_index=0, kept_index=0, level=-np.inf, durations=(1.0,)):
    values = np.asarray(values, dtype=float)
    tags = tuple("periodic" if w else "negative-end" for w in periodic)
    return GeneratingLandscape(
        k=1,
        ell=1,
        y=0.0,
        axes=tuple(np.arange(s) / s for s in values.shape),
        periodic=tuple(periodic),
        values=values,
        negative_index=negative_index,
        kept_index=kept_index,
        negative_level=level,
        boundary_tag=tags,
        labels=tuple(f"x{i}" for i in range(values.ndim)),
        durations=durations,
    )


@pytest.mark.parametrize("P", [0.0, 0.5, 1.0])
def test_lax_oleinik_of_kinetic_energy(P):
    value, residual = lax_oleinik_effham(KINETIC, P)
    assert value == pytest.approx(0.5 * P * P, abs=1e-3)
    assert residual <= 1e-8


def test_lax_oleinik_pendulum_at_zero_is_the_top_of_the_potential():
    value, _ = lax_oleinik_effham(HamiltonianSpec.pendulum(0.1), 0.0)
    assert value == pytest.approx(0.1, abs=1e-2)


def test_lax_oleinik_refuses_nonconvex_profiles():
    double_well = HamiltonianSpec.integrable(Profile("polynomial", (0.0, 0.0, -1.0, 0.0, 0.25)))
    with pytest.raises(NonConvexInput):
        lax_oleinik_effham(double_well, 0.0)


def test_lax_oleinik_refuses_compact_support():
    with pytest.raises(NonConvexInput):
        lax_oleinik_effham(HamiltonianSpec.zero(), 0.0)


def test_pendulum_plateau():
    level, critical = pendulum_plateau(0.1)
    assert level == 0.1
    assert critical == pytest.approx(4 * np.sqrt(0.1) / np.pi)
    assert pendulum_effham(0.1, 0.0) == 0.1
    assert pendulum_effham(0.1, 0.99 * critical) == 0.1
    assert pendulum_effham(0.1, 1.01 * critical) > 0.1


def test_pendulum_tends_to_free_motion():
    for P in [0.5, 1.0, 2.0]:
        assert pendulum_effham(1e-8, P) == pytest.approx(0.5 * P * P, abs=1e-6)
    assert pendulum_effham(0.0, 1.5) == pytest.approx(1.125)


def test_pendulum_sums_over_degrees_of_freedom():
    assert pendulum_effham(0.05, [1.0, 0.0]) == pytest.approx(pendulum_effham(0.05, 1.0) + 0.05)


def test_pendulum_table_is_convex():
    table = pendulum_table(0.1, np.linspace(-2.0, 2.0, 41))
    assert table.method is Method.ACTION_INTEGRAL
    assert table.convexity_violations() == 0
    assert len(table.to_rows()) == 41


@pytest.mark.slow
def test_oracles_agree_on_the_pendulum():
    H = HamiltonianSpec.pendulum(0.1)
    grid = np.linspace(-2.0, 2.0, 9)
    numeric = lax_oleinik_table(H, grid)
    exact = pendulum_table(0.1, grid)
    assert np.abs(numeric.values - exact.values).max() <= 1e-2
    assert numeric.convexity_violations(tol=1e-3) == 0


def test_exhaustive_minimax_on_a_circle():
    values = np.cos(2 * np.pi * np.arange(12) / 12)
    L = torus_landscape(values, (True,))
    assert brute_force_minimax(L, CohomologyClass.FUNDAMENTAL) == values.max()
    assert brute_force_minimax(L, CohomologyClass.UNIT) == values.min()


def test_exhaustive_minimax_of_a_saddle_is_zero():
    s = np.linspace(-1.0, 1.0, 7)
    values = np.broadcast_to(-(s[:, None] * s[None, :]), (3, 7, 7)).copy()
    L = torus_landscape(values, (True, False, False), negative_index=1, kept_index=1, level=-0.5)
    assert brute_force_minimax(L, CohomologyClass.FUNDAMENTAL) == 0.0
    assert brute_force_minimax(L, CohomologyClass.FUNDAMENTAL) == minimax(L, CohomologyClass.FUNDAMENTAL)


@pytest.mark.parametrize("cls", list(CohomologyClass))
@pytest.mark.parametrize("periodic", [(True, True), (True, False), (False, False)])
def test_exhaustive_minimax_matches_persistence(cls, periodic):
    rng = np.random.default_rng(2024)
    for _ in range(50):
        shape = tuple(int(s) for s in rng.integers(3, 7, size=2))
        L = torus_landscape(rng.normal(size=shape), periodic)
        assert brute_force_minimax(L, cls) == minimax(L, cls)


@pytest.mark.parametrize("cls", list(CohomologyClass))
@pytest.mark.parametrize("seed", range(10))
def test_exhaustive_minimax_matches_persistence_on_kept_pairs(cls, seed):
    rng = np.random.default_rng(seed)
    s = np.linspace(-1.0, 1.0, 5)
    saddle = np.broadcast_to(-(s[:, None] * s[None, :]), (3, 5, 5))
    values = saddle + 0.05 * rng.normal(size=saddle.shape)
    L = torus_landscape(values, (True, False, False), negative_index=1, kept_index=1, level=-0.7)
    assert brute_force_minimax(L, cls) == minimax(L, cls)


def test_exhaustive_minimax_refuses_large_grids():
    L = torus_landscape(np.zeros((13, 13, 13)), (True, True, True))
    with pytest.raises(TooLarge):
        brute_force_minimax(L, CohomologyClass.UNIT)


@pytest.mark.slow
@pytest.mark.parametrize("a", [0.1, 0.3])
def test_selector_approaches_the_pendulum_oracle(a):
    H = HamiltonianSpec.pendulum(a)
    momenta = np.array([0.0, 0.2, 0.6, 1.0])
    exact = pendulum_table(a, momenta).values
    tables, _ = homogenize(H, [1, 2, 4, 8], momenta, GridConfig(resolution=32))
    errors = [np.abs(t.values - exact).max() for t in tables]
    for table in tables:
        assert table.values[0] == pytest.approx(a, abs=1e-6)
        assert np.all(table.values >= exact - 5e-3)
    assert errors[-1] <= 0.25 * a
    assert errors[-1] <= errors[0]
