import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from attrs import define
from cytoolz import sliding_window

from .._data_structures import SampledFunction
from ..dynamics import FlowConfig, HamiltonianSpec
from ..genfunc import GridConfig, LandscapeCache, build_landscape, graph_landscape
from .minimax import CohomologyClass, minimax
from .persistence import bottleneck_distance, sublevel_persistence

logger = logging.getLogger(__name__)

Axes = Tuple[np.ndarray, ...]
RICHARDSON_KS = (2, 4, 8)


@define(frozen=True, eq=False)
class SelectorTable:
    """h_k on a tensor grid of momenta; `uncertainty` is per node."""

    axes: Axes
    values: np.ndarray
    k: int
    uncertainty: np.ndarray

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def p_grid(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1).reshape(-1, self.n)

    def as_sampled(self) -> SampledFunction:
        return SampledFunction(self.axes, self.values, (False,) * self.n)

    def distance(self, other: "SelectorTable") -> float:
        return float(np.abs(self.values - other.values).max())

    def plateau_width(self, level: float, atol: float = 1e-3) -> float:
        """Spread of the momenta whose value matches `level` within the table uncertainty plus atol."""
        if self.n != 1:
            raise ValueError(f"plateau widths are measured on one momentum axis, got n={self.n}")
        flat = self.axes[0][np.isclose(self.values, level, atol=float(self.uncertainty.max()) + atol)]
        return float(np.ptp(flat)) if flat.size else 0.0

    def to_rows(self) -> List[Tuple[float, ...]]:
        return [
            (*map(float, p), float(v), float(u))
            for p, v, u in zip(self.p_grid, self.values.ravel(), self.uncertainty.ravel())
        ]


@define(frozen=True, eq=False)
class ConvergenceReport:
    k_list: Tuple[int, ...]
    cauchy: Tuple[float, ...]  # sup-norm differences of consecutive tables
    extrapolated: SelectorTable
    extrapolation_residual: float


def as_axes(p_grid: Union[np.ndarray, Sequence[np.ndarray]], n: int) -> Axes:
    if n == 1 and np.ndim(p_grid) == 1:
        return (np.asarray(p_grid, dtype=float),)
    axes = tuple(np.asarray(axis, dtype=float) for axis in p_grid)  # type: ignore[union-attr]
    if len(axes) != n:
        raise ValueError(f"{len(axes)} momentum axes for n={n}")
    return axes


def selector_value(
    H: HamiltonianSpec,
    k: int,
    y: np.ndarray,
    grids: GridConfig,
    cfg: FlowConfig,
    cache: Optional[LandscapeCache] = None,
) -> Tuple[float, float]:
    """h_k(y) and half the landscape's grid modulus, both per unit time."""
    L = cache.build(H, k, y, grids, cfg) if cache is not None else build_landscape(H, k, y, grids, cfg)
    value = minimax(L, CohomologyClass.FUNDAMENTAL) / L.total_time
    return value, 0.5 * L.as_sampled().modulus() / L.total_time


def selector_table(
    H: HamiltonianSpec,
    k: int,
    p_grid: Union[np.ndarray, Sequence[np.ndarray]],
    grids: GridConfig = GridConfig(),
    cfg: Optional[FlowConfig] = None,
    cache: Optional[LandscapeCache] = None,
) -> SelectorTable:
    cfg = cfg or FlowConfig.init(H)
    axes = as_axes(p_grid, H.n)
    shape = tuple(axis.size for axis in axes)
    points = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, H.n)
    logger.info("selector table k=%d over %d momenta", k, len(points))
    results = np.array([selector_value(H, k, y, grids, cfg, cache) for y in points])
    return SelectorTable(axes, results[:, 0].reshape(shape), k, results[:, 1].reshape(shape))


def _richardson(coarse: SelectorTable, fine: SelectorTable) -> SelectorTable:
    return SelectorTable(
        fine.axes,
        2.0 * fine.values - coarse.values,
        fine.k,
        2.0 * fine.uncertainty + coarse.uncertainty,
    )


def homogenize(
    H: HamiltonianSpec,
    k_list: Sequence[int],
    p_grid: Union[np.ndarray, Sequence[np.ndarray]],
    grids: GridConfig = GridConfig(),
    cfg: Optional[FlowConfig] = None,
    cache: Optional[LandscapeCache] = None,
) -> Tuple[List[SelectorTable], ConvergenceReport]:
    """
    Tables h_k for each k and a convergence report.

    The extrapolated table is Richardson's 2·h_{2k} − h_k on the finest doubling
    pair among k = 2, 4, 8; its residual is the gap to the next coarser
    extrapolation, or to h_{2k} when only one pair exists.
    """
    ks = tuple(int(k) for k in k_list)
    if not ks or any(b <= a for a, b in sliding_window(2, ks)):
        raise ValueError(f"k_list must be non-empty and increasing, got {ks}")
    tables = [selector_table(H, k, p_grid, grids, cfg, cache) for k in ks]
    by_k = {table.k: table for table in tables}
    cauchy = tuple(b.distance(a) for a, b in sliding_window(2, tables))

    pairs = [(k, 2 * k) for k in RICHARDSON_KS if k in by_k and 2 * k in by_k and 2 * k in RICHARDSON_KS]
    if pairs:
        extrapolations = [_richardson(by_k[a], by_k[b]) for a, b in pairs]
        extrapolated = extrapolations[-1]
        reference = extrapolations[-2] if len(extrapolations) > 1 else by_k[pairs[-1][1]]
        residual = extrapolated.distance(reference)
    else:
        extrapolated = tables[-1]
        residual = cauchy[-1] if cauchy else np.inf
    logger.info("homogenized k=%s: Cauchy gaps %s", ks, ["%.2e" % c for c in cauchy])
    return tables, ConvergenceReport(ks, cauchy, extrapolated, residual)


def capacities(
    H: HamiltonianSpec, k: int, grids: GridConfig = GridConfig(), cfg: Optional[FlowConfig] = None
) -> Tuple[float, float]:
    """(c₊, c₋) of Φᵏ from its graph landscape; c₋ ≤ 0 ≤ c₊."""
    L = graph_landscape(H, k, grids, cfg)
    diagram = sublevel_persistence(L)
    c_plus = minimax(L, CohomologyClass.FUNDAMENTAL, diagram)
    c_minus = minimax(L, CohomologyClass.UNIT, diagram)
    logger.debug("capacities at k=%d: c+=%.3e, c-=%.3e", k, c_plus, c_minus)
    return c_plus, c_minus


def barcode_distances(
    H: HamiltonianSpec,
    y: object,
    k_list: Sequence[int],
    grids: GridConfig = GridConfig(),
    cfg: Optional[FlowConfig] = None,
) -> List[float]:
    """
    Bottleneck distances between the per-unit-time barcodes of F_{k,y} at consecutive k,
    degrees counted from the negative index of each landscape.
    """
    cfg = cfg or FlowConfig.init(H)
    diagrams = []
    for k in k_list:
        L = build_landscape(H, k, y, grids, cfg)
        diagrams.append(sublevel_persistence(L).scaled(1.0 / L.total_time).lowered(L.negative_index))
    return [bottleneck_distance(a, b) for a, b in sliding_window(2, diagrams)]
