import attrs
import numpy as np
import pytest

from symphom._data_structures import SampledFunction
from symphom.dynamics import HamiltonianSpec, Profile, negated, shifted, truncate_coercive
from symphom.exceptions import ClassNotFound
from symphom.genfunc import GeneratingLandscape, GridConfig, Reduction, build_landscape, graph_landscape
from symphom.oracle import pendulum_plateau, pendulum_table
from symphom.selector import (
    CohomologyClass,
    PersistenceDiagram,
    SelectorTable,
    barcode_distances,
    bottleneck_distance,
    capacities,
    homogenize,
    minimax,
    relative_bars,
    strong_critical_values,
    sublevel_persistence,
)

KINETIC = HamiltonianSpec.integrable(Profile("quadratic"))
COARSE = GridConfig(resolution=32)
MOMENTA = np.linspace(-1.0, 1.0, 9)


def circle_landscape(values, negative_index=0):
    return GeneratingLandscape(
        k=1,
        ell=1,
        y=0.0,
        axes=(np.arange(len(values)) / len(values),),
        periodic=(True,),
        values=np.asarray(values, dtype=float),
        negative_index=negative_index,
        kept_index=0,
        negative_level=-np.inf,
        boundary_tag=("periodic",),
        labels=("x",),
        durations=(1.0,),
    )


def saddle_landscape(nodes=21):
    """−P·u over T¹ × [−1, 1]², relative to its two negative quadrants."""
    x = np.arange(8) / 8
    s = np.linspace(-1.0, 1.0, nodes)
    values = np.broadcast_to(-(s[:, None] * s[None, :]), (8, nodes, nodes)).copy()
    return GeneratingLandscape(
        k=2,
        ell=1,
        y=0.0,
        axes=(x, s, s),
        periodic=(True, False, False),
        values=values,
        negative_index=1,
        kept_index=1,
        negative_level=-0.5,
        boundary_tag=("periodic", "negative-end", "negative-end"),
        labels=("x", "u", "P"),
        durations=(1.0, 1.0),
    )


def test_minimax_on_a_circle_is_max_and_min():
    x = np.arange(48) / 48
    L = circle_landscape(np.cos(2 * np.pi * x) + 0.3 * np.sin(6 * np.pi * x))
    assert minimax(L, CohomologyClass.FUNDAMENTAL) == L.values.max()
    assert minimax(L, "1") == L.values.min()


def test_unit_never_exceeds_fundamental():
    rng = np.random.default_rng(3)
    for _ in range(10):
        L = circle_landscape(rng.normal(size=16))
        assert minimax(L, CohomologyClass.UNIT) <= minimax(L, CohomologyClass.FUNDAMENTAL)


def test_pure_saddle_has_zero_minimax():
    L = saddle_landscape()
    assert minimax(L, CohomologyClass.FUNDAMENTAL) == 0.0
    assert minimax(L, CohomologyClass.UNIT) == 0.0


def test_wrong_index_has_no_class():
    L = circle_landscape(np.zeros(8), negative_index=3)
    with pytest.raises(ClassNotFound):
        minimax(L, CohomologyClass.FUNDAMENTAL)


def test_relative_bars_lift_dying_classes():
    bars = [(0, -2.0, np.inf), (0, -1.5, 0.5), (1, 1.0, 2.0)]
    assert relative_bars(bars, -1.0) == [(1, 0.5, np.inf), (1, 1.0, 2.0)]
    assert relative_bars(bars, -np.inf) == bars


def test_diagram_degrees_follow_the_shift():
    diagram = sublevel_persistence(saddle_landscape())
    assert diagram.degree_shift == 0
    assert diagram.essential(1) == pytest.approx([0.0])
    assert diagram.essential(2) == pytest.approx([0.0])
    rows = diagram.to_rows()
    assert all(b < δ for b, δ, _ in rows)


def test_bottleneck_distance_of_shifted_diagrams():
    L = circle_landscape(np.sin(2 * np.pi * np.arange(32) / 32))
    diagram = sublevel_persistence(L)
    moved = PersistenceDiagram(diagram.pairs + np.array([0.1, 0.1, 0.0]), diagram.relative_to)
    assert bottleneck_distance(diagram, diagram) == 0.0
    assert bottleneck_distance(diagram, moved) == pytest.approx(0.1)


def test_integrable_barcodes_agree_across_k():
    distances = barcode_distances(KINETIC, 0.5, [1, 2, 4], COARSE)
    assert len(distances) == 2
    assert max(distances) <= 1e-3


def test_integrable_selector_is_the_hamiltonian():
    tables, report = homogenize(KINETIC, [1, 2, 4], MOMENTA, COARSE)
    for table in tables:
        assert np.abs(table.values - 0.5 * MOMENTA**2).max() <= 1e-3
    assert report.k_list == (1, 2, 4)
    assert max(report.cauchy) <= 1e-3
    assert report.extrapolated.values == pytest.approx(0.5 * MOMENTA**2, abs=1e-3)


def test_zero_hamiltonian_gives_zero_tables():
    tables, report = homogenize(HamiltonianSpec.zero(), [1, 2], [-0.5, 0.0, 0.5], COARSE)
    assert all(np.all(table.values == 0.0) for table in tables)
    assert report.extrapolation_residual == 0.0


def test_selector_is_shift_equivariant():
    (base,), _ = homogenize(KINETIC, [2], MOMENTA, COARSE)
    (moved,), _ = homogenize(shifted(KINETIC, 0.3), [2], MOMENTA, COARSE)
    assert moved.values == pytest.approx(base.values + 0.3, abs=1e-12)


@pytest.mark.parametrize(
    "H",
    [
        KINETIC,
        attrs.evolve(KINETIC, scale=0.5),
        HamiltonianSpec.integrable(Profile("polynomial", (0.0, 0.3, 0.5))),
    ],
    ids=["kinetic", "scaled", "tilted"],
)
def test_selector_negates_with_the_hamiltonian(H):
    (base,), _ = homogenize(H, [2], MOMENTA, COARSE)
    (flipped,), _ = homogenize(negated(H), [2], MOMENTA, COARSE)
    assert np.abs(base.values + flipped.values).max() <= 2e-3


def random_pair(seed):
    """H ≤ G for a nonnegative integrable H and G a steeper, raised copy."""
    rng = np.random.default_rng(seed)
    H = HamiltonianSpec.integrable(Profile("quadratic", (rng.uniform(0.5, 1.5),)))
    G = attrs.evolve(H, scale=rng.uniform(1.0, 2.0), offset=rng.uniform(0.0, 0.2))
    return H, G


@pytest.mark.parametrize("k", [1, 2, 4])
@pytest.mark.parametrize("seed", range(10))
def test_selector_is_monotone(seed, k):
    H, G = random_pair(seed)
    (low,), _ = homogenize(H, [k], MOMENTA, COARSE)
    (high,), _ = homogenize(G, [k], MOMENTA, COARSE)
    assert np.all(low.values <= high.values + 1e-9)


def test_table_rows():
    (table,), _ = homogenize(KINETIC, [1], [0.0, 1.0], COARSE)
    rows = table.to_rows()
    assert len(rows) == 2
    assert rows[1][0] == 1.0
    assert rows[1][1] == pytest.approx(0.5, abs=1e-3)


def test_k_list_must_increase():
    with pytest.raises(ValueError):
        homogenize(KINETIC, [2, 1], MOMENTA, COARSE)


def test_identity_has_trivial_capacities():
    assert capacities(HamiltonianSpec.zero(), 1, COARSE) == (0.0, 0.0)


def test_nonpositive_bump_has_positive_upper_capacity():
    H = HamiltonianSpec.localized_bump(-1e-4)
    c_plus, c_minus = capacities(H, 1, COARSE)
    assert c_minus <= 0.0 < c_plus
    assert c_plus == pytest.approx(1e-4, rel=0.05)


@pytest.mark.slow
def test_kept_pair_agrees_with_elimination():
    eliminated = build_landscape(KINETIC, 1, 0.3, COARSE)
    kept = build_landscape(KINETIC, 1, 0.3, COARSE, reduction="kept_pair")
    tolerance = kept.as_sampled().modulus()
    assert minimax(kept, CohomologyClass.FUNDAMENTAL) == pytest.approx(
        minimax(eliminated, CohomologyClass.FUNDAMENTAL), abs=tolerance
    )


def test_cubic_inflection_is_not_strong():
    x = np.linspace(-1.0, 1.0, 201)
    assert strong_critical_values(SampledFunction((x,), x**3, (False,))) == []


def test_plateau_is_not_strong():
    x = np.linspace(-2.0, 2.0, 201)
    f = np.where(x < -1.0, x + 1.0, np.where(x > 1.0, x - 1.0, 0.0))
    assert strong_critical_values(SampledFunction((x,), f, (False,))) == []


def test_morse_function_on_the_circle():
    x = np.arange(384) / 384
    f = SampledFunction((x,), np.cos(2 * np.pi * x) + 0.5 * np.cos(4 * np.pi * x), (True,))
    found = strong_critical_values(f)
    assert [c.value for c in found] == pytest.approx([-0.75, -0.5, 1.5], abs=1e-12)
    top = found[-1]
    assert top.isolated
    assert top.witnesses.tolist() == [[0]]
    assert 1 in top.degrees


def test_pendulum_homogenizes_with_the_default_configuration():
    a = 0.1
    momenta = [0.0, 0.2, 0.6, 1.0]
    H = HamiltonianSpec.pendulum(a)
    assert build_landscape(H, 1, 0.0, COARSE).reduction is Reduction.BROKEN_ORBIT
    tables, report = homogenize(H, [1, 2, 4], momenta, COARSE)
    assert [t.values[0] for t in tables] == pytest.approx([a] * 3, abs=1e-6)
    assert all(np.isfinite(t.values).all() for t in tables)
    assert np.isfinite(report.extrapolation_residual)


@pytest.mark.slow
def test_pendulum_barcodes_settle_as_k_grows():
    a = 0.1
    distances = barcode_distances(HamiltonianSpec.pendulum(a), 0.0, [1, 2, 4, 8], COARSE)
    assert len(distances) == 3
    # per-unit-time values of F_k lie in [−a, a]
    assert max(distances) <= 2.0 * a
    assert distances[-1] <= distances[0] + 2e-3


@pytest.mark.parametrize("k", [1, 2, 4])
def test_truncated_pendulum_capacity_is_bounded_by_its_depth(k):
    a = 1e-4
    H = truncate_coercive(HamiltonianSpec.pendulum(a), 1.0)
    c_plus, c_minus = capacities(H, k, COARSE)
    tolerance = 0.5 * graph_landscape(H, k, COARSE).as_sampled().modulus()
    assert c_minus <= 0.0 <= c_plus
    assert c_plus <= k * a + tolerance


def test_plateau_width_of_the_pendulum_table():
    a = 0.1
    axis = np.linspace(-1.0, 1.0, 41)
    table = SelectorTable((axis,), pendulum_table(a, axis).values, 4, np.zeros_like(axis))
    _, critical = pendulum_plateau(a)
    assert table.plateau_width(a, atol=1e-9) == pytest.approx(2.0 * np.floor(critical / 0.05) * 0.05)
    assert table.plateau_width(-a, atol=1e-9) == 0.0
