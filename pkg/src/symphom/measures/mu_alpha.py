"""
Measures realizing a subgradient of the homogenized Hamiltonian.

For α in the Clarke differential of H̄ at p, the orbits whose critical value
⟨p, ν⟩ − 𝒜 sits at the level H̄(p) are combined, at most n + 1 of them, so that
the rotation vectors average to α. Their average action then equals
⟨p, α⟩ − H̄(p) up to the level tolerance.
"""

import logging
from itertools import combinations, product
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from attrs import define, field
from cytoolz import unique
from scipy.optimize import root

from .._data_structures import SampledFunction
from ..dynamics import FlowConfig, HamiltonianSpec, LiftedOrbit, PhasePoint, find_translated_orbit, iterate_lift
from ..dynamics.orbits import momentum_box
from ..exceptions import InfeasibleAlpha, NoOrbitFound, UnsupportedCoercive
from ..genfunc import GridConfig, fiber_critical_orbits
from ..selector import selector_table
from ..subdiff import SubdiffPolytope, clarke_pl, hull_vertices
from .measure import OrbitMeasure, orbit_measure

logger = logging.getLogger(__name__)


@define(frozen=True)
class MeasureConfig:
    flow: Optional[FlowConfig] = None
    level_tolerance: Optional[float] = None  # 1/k when unset
    hull_tol: float = 1e-6
    max_candidates: int = 24
    table_k: int = 4
    table_spacing: float = 0.05
    grids: GridConfig = field(factory=lambda: GridConfig(resolution=32))

    def tolerance(self, k: int) -> float:
        return self.level_tolerance if self.level_tolerance is not None else 1.0 / k


@define(frozen=True, eq=False)
class Candidate:
    orbit: LiftedOrbit
    rotation: np.ndarray
    value: float  # ⟨p, ν⟩ − 𝒜
    source: str

    def to_row(self) -> Tuple[Any, ...]:
        return (self.source, *self.orbit.qs[0], *self.orbit.ps[0], *self.rotation, self.value)


def _candidate(orbit: LiftedOrbit, p: np.ndarray, source: str) -> Candidate:
    ν = (orbit.qs[-1] - orbit.qs[0]) / orbit.horizon
    return Candidate(orbit, ν, float(p @ ν) - orbit.average_action, source)


def equilibria(H: HamiltonianSpec, per_axis: int = 4, tol: float = 1e-10) -> List[PhasePoint]:
    """Rest points of an autonomous flow, by root finding on ∇H from a (q, p) grid."""
    if not H.is_autonomous:
        return []
    n = H.n
    try:
        width = H.outer_radius
    except UnsupportedCoercive:
        width = momentum_box(H)
    q_nodes = np.arange(per_axis) / per_axis
    p_nodes = np.linspace(-width, width, per_axis + 1)

    def gradient(z: np.ndarray) -> np.ndarray:
        hq, hp = H.gradient(0.0, z[None, :n], z[None, n:])
        return np.concatenate([hq[0], hp[0]])

    found = []
    for q, p in product(product(q_nodes, repeat=n), product(p_nodes, repeat=n)):
        solution = root(gradient, np.array(q + p), tol=1e-13)
        if np.abs(gradient(solution.x)).max() <= tol:
            z = solution.x.copy()
            z[:n] %= 1.0
            found.append(tuple(np.round(z, 8)))
    return [PhasePoint(z[:n], z[n:]) for z in unique(found)]


def alpha_candidates(
    H: HamiltonianSpec,
    p: np.ndarray,
    k: int,
    level: float,
    cfg: MeasureConfig,
    vertices: Sequence[np.ndarray] = (),
) -> List[Candidate]:
    """
    Orbits of horizon k whose critical value at p is within the level tolerance
    of `level`, closest first: critical orbits of F_{k,p}, rest points, and
    translated orbits aimed at the given rotation vertices.
    """
    flow = cfg.flow or FlowConfig.init(H)
    tol = cfg.tolerance(k)
    pool = [
        _candidate(iterate_lift(H, o.start, k, flow, lookahead=True), p, "critical")
        for o in fiber_critical_orbits(H, k, p, flow)
    ]
    pool += [_candidate(iterate_lift(H, z, k, flow, lookahead=True), p, "equilibrium") for z in equilibria(H)]

    seeds = sorted(pool, key=lambda c: abs(c.value - level))
    seed = seeds[0].orbit.start if seeds else PhasePoint(np.zeros(H.n), p)
    for α in vertices:
        try:
            z, _ = find_translated_orbit(H, k, α, seed, flow)
        except NoOrbitFound:
            logger.warning("no translated orbit with rotation %s at k=%d", α, k)
            continue
        pool.append(_candidate(iterate_lift(H, z, k, flow, lookahead=True), p, "translated"))

    kept = sorted((c for c in pool if abs(c.value - level) <= tol), key=lambda c: abs(c.value - level))
    logger.debug("%d of %d candidate orbits within %.3g of level %.6g", len(kept), len(pool), tol, level)
    return kept[: cfg.max_candidates]


def caratheodory(points: np.ndarray, α: np.ndarray, tol: float = 1e-6) -> Optional[Tuple[Tuple[int, ...], np.ndarray]]:
    """
    The smallest simplex of `points` containing α: fewest vertices first, then
    smallest diameter. Returns the vertex indices and barycentric weights.
    """
    n = len(α)
    best: Optional[Tuple[float, Tuple[int, ...], np.ndarray]] = None
    for size in range(1, n + 2):
        for chosen in combinations(range(len(points)), size):
            simplex = points[list(chosen)]
            system = np.vstack([simplex.T, np.ones(size)])
            w, *_ = np.linalg.lstsq(system, np.append(α, 1.0), rcond=None)
            if np.abs(system @ w - np.append(α, 1.0)).max() > tol or w.min() < -tol:
                continue
            diameter = max((np.linalg.norm(a - b) for a, b in combinations(simplex, 2)), default=0.0)
            if best is None or diameter < best[0]:
                w = np.clip(w, 0.0, None)
                best = (diameter, chosen, w / w.sum())
        if best is not None:
            return best[1], best[2]
    return None


def _local_table(H: HamiltonianSpec, p: np.ndarray, cfg: MeasureConfig) -> SampledFunction:
    h = cfg.table_spacing
    axes = [np.array([c - h, c, c + h]) for c in p]
    return selector_table(H, cfg.table_k, axes if H.n > 1 else axes[0], cfg.grids, cfg.flow).as_sampled()


def build_mu_alpha(
    H: HamiltonianSpec,
    α: Any,
    p: Any,
    k: int,
    cfg: Optional[MeasureConfig] = None,
    table: Optional[SampledFunction] = None,
) -> OrbitMeasure:
    """
    An orbit measure with rotation α whose average action is ⟨p, α⟩ − H̄(p).

    `table` samples H̄ around p; without one, a three-node selector table of
    h_{table_k} is built.
    """
    cfg = cfg or MeasureConfig()
    α = np.atleast_1d(np.asarray(α, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    table = table if table is not None else _local_table(H, p, cfg)

    clarke = clarke_pl(table, p)
    if not clarke.contains(α, tol=cfg.hull_tol):
        raise InfeasibleAlpha(f"α={α} lies {clarke.distance(α):.3g} outside the Clarke differential at p={p}")
    node = clarke.at
    level = float(table.values[table.node_index(node)])

    candidates = alpha_candidates(H, node, k, level, cfg)
    picked = caratheodory(np.array([c.rotation for c in candidates]), α, cfg.hull_tol) if candidates else None
    if picked is None:
        candidates = alpha_candidates(H, node, k, level, cfg, vertices=list(clarke.vertices))
        picked = caratheodory(np.array([c.rotation for c in candidates]), α, cfg.hull_tol) if candidates else None
    if picked is None:
        raise NoOrbitFound(f"no orbits at level {level:.6g} enclose α={α} at k={k}")

    indices, weights = picked
    μ = orbit_measure([candidates[i].orbit for i in indices], weights)
    logger.info(
        "μ_α at p=%s, α=%s, k=%d: %d pieces (%s), action %.6g",
        node,
        α,
        k,
        len(indices),
        ",".join(candidates[i].source for i in indices),
        μ.avg_action,
    )
    return μ


@define(frozen=True)
class SupportReport:
    mass_inside: float  # μ-mass in the interior of supp H
    level_spread: Optional[float]  # max oscillation of H along a piece; autonomous H only
    level: Optional[float]
    identity_gap: Optional[float]  # |𝒜(μ) − (⟨p, ρ⟩ − level)|

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mass_inside": self.mass_inside,
            "level_spread": self.level_spread,
            "level": self.level,
            "identity_gap": self.identity_gap,
        }


def support_checks(μ: OrbitMeasure, H: HamiltonianSpec, p: Any = None, tol: float = 1e-12) -> SupportReport:
    """
    Where μ lives: the time fraction its pieces spend where H or ∇H is nonzero,
    and for autonomous H the energy spread along each piece together with the
    gap in 𝒜(μ) = ⟨p, α⟩ − c at the common level c.
    """

    def inside(t: np.ndarray, q: np.ndarray, p_: np.ndarray) -> np.ndarray:
        h, hq, hp = H.evaluate(t, q, p_)
        return ((np.abs(h - H.offset) > tol) | (np.abs(hq).max(axis=-1) > tol) | (np.abs(hp).max(axis=-1) > tol)).astype(
            float
        )

    mass = float(μ.integrate(inside))
    if not H.is_autonomous:
        return SupportReport(mass, None, None, None)

    energies = [H(0.0, o.qs, o.ps) for o in μ.pieces]
    spread = max(float(np.ptp(e)) for e in energies)
    level = float(sum(w * e.mean() for w, e in zip(μ.weights, energies)))
    gap = None
    if p is not None:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        gap = abs(μ.avg_action - (float(p @ μ.rotation) - level))
    return SupportReport(mass, spread, level, gap)


@define(frozen=True, eq=False)
class RSet:
    """Sampled points (α, ⟨p, α⟩ − H̄(p)) of R̄(H) with their momentum of origin."""

    p: np.ndarray
    α: np.ndarray
    action: np.ndarray
    extremal: np.ndarray

    def points(self) -> np.ndarray:
        """Distinct (α, action) pairs."""
        return np.unique(np.round(np.column_stack([self.α, self.action]), 12), axis=0)

    def to_rows(self) -> List[Tuple[Any, ...]]:
        return [
            (*map(float, p), *map(float, a), float(s), int(e))
            for p, a, s, e in zip(self.p, self.α, self.action, self.extremal)
        ]


def _hull_samples(polytope: SubdiffPolytope, samples: int) -> np.ndarray:
    vertices = polytope.vertices
    if len(vertices) == 1:
        return vertices
    t = np.linspace(0.0, 1.0, samples)[1:-1, None]
    edges = [a + t * (b - a) for a, b in zip(vertices, np.roll(vertices, -1, axis=0))]
    if len(vertices) == 2:
        edges = edges[:1]
    return np.concatenate([vertices, *edges, vertices.mean(axis=0, keepdims=True)])


def r_set_from_table(table: SampledFunction, samples: int = 5) -> RSet:
    """
    Samples R̄(H) = {(α, ⟨p, α⟩ − H̄(p)) : α ∈ ∂_C H̄(p)} at every interior node
    of an H̄ table, `samples` covectors per hull edge, flagging the samples that
    are extreme points of the hull of the cloud.
    """
    rows_p, rows_α, rows_s = [], [], []
    for index in product(*(range(1, s - 1) for s in table.shape)):
        node = table.point(index)
        level = float(table.values[index])
        for α in _hull_samples(clarke_pl(table, node), samples):
            rows_p.append(node)
            rows_α.append(α)
            rows_s.append(float(node @ α) - level)
    if not rows_p:
        raise ValueError(f"a table of shape {table.shape} has no interior nodes")

    α_array, action = np.array(rows_α), np.array(rows_s)
    cloud = np.column_stack([α_array, action])
    extreme = {tuple(v) for v in hull_vertices(cloud)}
    extremal = np.array([tuple(c) in extreme for c in cloud])
    logger.info("R̄(H): %d samples from %d nodes, %d extremal", len(cloud), len(set(map(tuple, rows_p))), extremal.sum())
    return RSet(np.array(rows_p), α_array, action, extremal)


def emit_R_set(
    H: HamiltonianSpec,
    p_grid: Any,
    samples: int = 5,
    cfg: Optional[MeasureConfig] = None,
    table: Optional[SampledFunction] = None,
) -> RSet:
    """
    R̄(H) over `p_grid` from the selector table h_k at k = cfg.table_k, or from a
    precomputed H̄ `table` on that grid (an oracle, or a cached run).
    """
    cfg = cfg or MeasureConfig()
    if table is None:
        axes = p_grid if H.n > 1 else np.asarray(p_grid, dtype=float)
        table = selector_table(H, cfg.table_k, axes, cfg.grids, cfg.flow).as_sampled()
    elif table.n != H.n:
        raise ValueError(f"a table over {table.n} momenta for n={H.n}")
    return r_set_from_table(table, samples)
