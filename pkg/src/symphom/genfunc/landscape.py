import logging
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple, Union

import attrs
import numpy as np
from attrs import define, field
from scipy.interpolate import RegularGridInterpolator

from .._data_structures import SampledFunction
from ..dynamics import FlowConfig, HamiltonianSpec, Integrator, truncate_coercive
from ..dynamics.orbits import momentum_box
from ..exceptions import GridBudgetExceeded, NoGeneratingFunction, OutOfBox, UnsupportedCoercive
from .step import endpoint_actions, generating_values, twist_check

logger = logging.getLogger(__name__)

PERIODIC = "periodic"
NEGATIVE_END = "negative-end"


class Reduction(str, Enum):
    """How the fibers of the chain are handled; AUTO picks the first that applies."""

    AUTO = "auto"
    ELIMINATED = "eliminated"  # time-k segment twists, S_k(x, y) alone
    BROKEN_ORBIT = "broken_orbit"  # short twisting segments, fibers maximized out
    KEPT_PAIR = "kept_pair"  # two halves, one (u, P) pair left free


@define(frozen=True)
class GridConfig:
    resolution: int = 64  # nodes per free variable
    inflation: float = 1.25
    budget: int = 64**3  # cells
    fiber_half_width: Optional[float] = None
    momentum_half_width: Optional[float] = None


def _as_vector(y: object) -> Optional[np.ndarray]:
    return None if y is None else np.atleast_1d(np.asarray(y, dtype=float))


@define(frozen=True, eq=False)
class GeneratingLandscape:
    """
    Sampled generating function of the time-(k·ℓ) map, reduced by fiber elimination.

    Free variables are x ∈ Tⁿ, then, when a fiber pair is kept, u = q₁ − x and the
    intermediate momentum P. `y` is the fixed final momentum, or None in graph mode
    where y is a further periodized variable and the values are −S (displacement
    sign). `negative_index` counts the negative directions of the coupling form of
    the unreduced chain; `kept_index` those still present in `values`.

    A broken-orbit landscape chains `len(durations)` short segments and keeps the
    fiberwise maximum over the intermediate positions: its maximum is the minimax
    of the fundamental class, its minimum bounds the point class from above.
    """

    k: int
    ell: int
    y: Optional[np.ndarray] = field(converter=_as_vector)
    axes: Tuple[np.ndarray, ...]
    periodic: Tuple[bool, ...]
    values: np.ndarray
    negative_index: int
    kept_index: int
    negative_level: float
    boundary_tag: Tuple[str, ...]
    labels: Tuple[str, ...]
    durations: Tuple[float, ...]
    reduction: Reduction = field(default=Reduction.ELIMINATED, converter=Reduction)
    hamiltonian: Optional[HamiltonianSpec] = None
    grids: GridConfig = GridConfig()
    flow: Optional[FlowConfig] = None

    @property
    def graph_mode(self) -> bool:
        return self.y is None

    @property
    def total_time(self) -> int:
        return self.k * self.ell

    @property
    def free_dimension(self) -> int:
        return len(self.axes)

    @property
    def eliminated_index(self) -> int:
        return self.negative_index - self.kept_index

    @property
    def spacing(self) -> np.ndarray:
        return np.array([axis[1] - axis[0] for axis in self.axes])

    def as_sampled(self) -> SampledFunction:
        return SampledFunction(self.axes, self.values, self.periodic)

    def coupling(self) -> np.ndarray:
        """The quadratic part Σ⟨y − P, u⟩ on the grid (zero without fibers)."""
        if self.kept_index == 0 or self.y is None:
            return np.zeros_like(self.values)
        grids = np.meshgrid(*self.axes, indexing="ij")
        u, P = grids[1], grids[2]
        return (self.y[0] - P) * u

    def quadratic_leakage(self) -> float:
        """max |F − B| over the faces tagged as the negative end."""
        if self.kept_index == 0:
            return 0.0
        deviation = np.abs(self.values - self.coupling())
        faces = [
            np.take(deviation, [0, -1], axis=axis)
            for axis, tag in enumerate(self.boundary_tag)
            if tag == NEGATIVE_END
        ]
        return float(max(face.max() for face in faces))

    def leakage_tolerance(self) -> float:
        """
        Σ d·(sup|H| + d·sup|∂H/∂q|·sup|∂H/∂p|) over the kept segments of durations d,
        which bounds every |S| of the chain and so |F − B|.
        """
        if self.kept_index == 0:
            return 0.0
        if self.hamiltonian is None:
            raise ValueError("landscape carries no Hamiltonian to bound")
        h, hq, hp = _sup_norms(self.hamiltonian, self.hamiltonian.outer_radius)
        return float(sum(d * (h + d * hq * hp) for d in self.durations))

    def shifted(self, c: float) -> "GeneratingLandscape":
        return attrs.evolve(self, values=self.values + c)


def _check_budget(shape: Sequence[int], grids: GridConfig) -> None:
    cells = int(np.prod(shape))
    if cells > grids.budget:
        raise GridBudgetExceeded(f"{len(shape)} free variables × {max(shape)} nodes = {cells} cells > {grids.budget}")


def _torus_axis(resolution: int) -> np.ndarray:
    return np.arange(resolution) / resolution


def _eliminated(
    H: HamiltonianSpec, duration: float, y: np.ndarray, grids: GridConfig, cfg: FlowConfig
) -> Tuple[Tuple[np.ndarray, ...], np.ndarray]:
    n = H.n
    axes = (_torus_axis(grids.resolution),) * n
    _check_budget([grids.resolution] * n, grids)
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    P = np.broadcast_to(y, X.shape)
    solution = generating_values(H, 0.0, duration, X, P, cfg)
    return axes, solution.values.reshape((grids.resolution,) * n)


def _phase_samples(H: HamiltonianSpec, width: float) -> Tuple[np.ndarray, np.ndarray]:
    n = H.n
    q_side, p_side = (32, 65) if n == 1 else (8, 17)
    qs = np.stack(np.meshgrid(*[_torus_axis(q_side)] * n, indexing="ij"), axis=-1).reshape(-1, n)
    ps = np.stack(np.meshgrid(*[np.linspace(-width, width, p_side)] * n, indexing="ij"), axis=-1).reshape(-1, n)
    return np.repeat(qs, len(ps), axis=0), np.tile(ps, (len(qs), 1))


def _sample_times(H: HamiltonianSpec) -> Tuple[float, ...]:
    return (0.0,) if H.is_autonomous else (0.0, 0.25, 0.5, 0.75)


def _sup_norms(H: HamiltonianSpec, width: float) -> Tuple[float, float, float]:
    """Sampled sup |H|, sup |∂H/∂q| and sup |∂H/∂p| over Tⁿ × [−width, width]ⁿ."""
    q, p = _phase_samples(H, width)
    h = hq = hp = 0.0
    for t in _sample_times(H):
        value, dq, dp = H.evaluate(t, q, p)
        h = max(h, float(np.abs(value).max()))
        hq = max(hq, float(np.linalg.norm(dq, axis=-1).max()))
        hp = max(hp, float(np.linalg.norm(dp, axis=-1).max()))
    return h, hq, hp


def _velocity_bound(H: HamiltonianSpec, width: float) -> float:
    return _sup_norms(H, width)[2]


def _steps_per_unit(H: HamiltonianSpec, width: float) -> int:
    """Segments per unit time with 2ωδ ≤ 1, where ω² = n²·sup|∂²H/∂q²|·sup|∂²H/∂p²|."""
    q, p = _phase_samples(H, width)
    ε = 1e-5
    qq = pp = 0.0
    for t in _sample_times(H):
        for e in np.eye(H.n):
            dq_plus, _ = H.gradient(t, q + ε * e, p)
            dq_minus, _ = H.gradient(t, q - ε * e, p)
            _, dp_plus = H.gradient(t, q, p + ε * e)
            _, dp_minus = H.gradient(t, q, p - ε * e)
            qq = max(qq, float(np.abs(dq_plus - dq_minus).max()) / (2.0 * ε))
            pp = max(pp, float(np.abs(dp_plus - dp_minus).max()) / (2.0 * ε))
    ω = H.n * np.sqrt(qq * pp)
    return max(2, int(np.ceil(2.0 * ω)))


def _broken_orbit(
    H: HamiltonianSpec, total: float, y: np.ndarray, grids: GridConfig, cfg: FlowConfig
) -> Tuple[Tuple[np.ndarray, ...], np.ndarray, Tuple[float, ...]]:
    """
    Chains short segments of length δ through nodes of the x grid.

    Each intermediate momentum block is eliminated by the endpoint Newton, leaving
    y·v minus the action of the segment that travels v. The intermediate positions
    are then maximized out backwards, U ← max_v [y·v − A(q, v) + U(q + v)], starting
    from S(q, y) of the last segment.
    """
    n, res = H.n, grids.resolution
    box = momentum_box(H, y)
    per_unit = _steps_per_unit(H, box)
    δ = 1.0 / per_unit
    segments = int(round(total * per_unit))
    reach = int(np.ceil(grids.inflation * δ * _velocity_bound(H, box) * res))
    offsets = np.stack(np.meshgrid(*[np.arange(-reach, reach + 1)] * n, indexing="ij"), axis=-1).reshape(-1, n)
    cells = res**n * len(offsets)
    if cells > grids.budget:
        raise GridBudgetExceeded(f"{res**n} nodes × {len(offsets)} displacements = {cells} cells > {grids.budget}")

    nodes = np.stack(np.meshgrid(*[np.arange(res)] * n, indexing="ij"), axis=-1).reshape(-1, n)
    X = nodes / res
    targets = np.ravel_multi_index(tuple(np.moveaxis((nodes[:, None] + offsets[None]) % res, -1, 0)), (res,) * n)
    v = offsets / res
    q, u = np.repeat(X, len(v), axis=0), np.tile(v, (len(X), 1))
    gains: Dict[int, np.ndarray] = {}

    def gain(j: int) -> np.ndarray:
        phase = 0 if H.is_autonomous else j % per_unit
        if phase not in gains:
            action = endpoint_actions(H, phase * δ, δ, q, u, cfg).action
            gains[phase] = (v @ y)[None, :] - action.reshape(len(X), len(v))
        return gains[phase]

    last = segments - 1
    t_last = 0.0 if H.is_autonomous else (last % per_unit) * δ
    U = generating_values(H, t_last, δ, X, np.broadcast_to(y, X.shape), cfg).values
    for j in range(last - 1, -1, -1):
        U = np.max(gain(j) + U[targets], axis=1)
    logger.debug("broken orbit of %d segments, %d displacements per node, at y=%s", segments, len(v), y)
    return (_torus_axis(res),) * n, U.reshape((res,) * n), (δ,) * segments


def _kept_pair(
    H: HamiltonianSpec,
    first: float,
    second: float,
    y: np.ndarray,
    grids: GridConfig,
    cfg: FlowConfig,
) -> Tuple[Tuple[np.ndarray, ...], np.ndarray, float, HamiltonianSpec, FlowConfig]:
    if H.n != 1:
        raise GridBudgetExceeded(f"keeping a fiber pair at n={H.n} needs {3 * H.n} free variables")
    res = grids.resolution
    _check_budget([res] * 3, grids)
    if H.coercive:
        H = truncate_coercive(H, momentum_box(H, y))
        if cfg.integrator is Integrator.SPLITTING_SEPARABLE and not H.is_separable:
            cfg = attrs.evolve(cfg, integrator=Integrator.IMPLICIT_MIDPOINT)
    for t0, duration in ((0.0, first), (first, second)):
        if not twist_check(H, t0, duration, cfg):
            raise NoGeneratingFunction(f"segment [{t0}, {t0 + duration}] folds; refine the chain")

    box = momentum_box(H, y)
    B = grids.inflation * (box + abs(float(y[0])))
    U = grids.fiber_half_width or grids.inflation * (max(first, second) * _velocity_bound(H, box) + 1.0)
    x = _torus_axis(res)
    u = np.linspace(-U, U, res)
    P = y[0] + np.linspace(-B, B, res)

    X, PP = np.meshgrid(x, P, indexing="ij")
    S_a = generating_values(H, 0.0, first, X.reshape(-1, 1), PP.reshape(-1, 1), cfg).values.reshape(res, res)
    XU = (x[:, None] + u[None, :]).reshape(-1, 1)
    S_b = generating_values(H, first, second, XU, np.full_like(XU, y[0]), cfg).values.reshape(res, res)

    values = S_a[:, None, :] + S_b[:, :, None] + (y[0] - P)[None, None, :] * u[None, :, None]
    return (x, u, P), values, -0.5 * B * U, H, cfg


def build_landscape(
    H: HamiltonianSpec,
    k: int,
    y: object,
    grids: GridConfig = GridConfig(),
    cfg: Optional[FlowConfig] = None,
    reduction: Union[str, Reduction] = Reduction.AUTO,
) -> GeneratingLandscape:
    """
    F_{k,y}: the chain generating function of Φᵏ at final momentum y.

    Every fiber pair is eliminated when the time-k segment has no fold, leaving
    F_y(x) = S_k(x, y). A folded segment of a Tonelli H is chained from short
    segments with the fibers maximized out; any other folded segment is split in
    two halves whose pair (u, P) stays free.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return _chain(H, k, 1, _as_vector(y), grids, cfg or FlowConfig.init(H), Reduction(reduction))


def _route(H: HamiltonianSpec, total: float, y: np.ndarray, cfg: FlowConfig) -> Reduction:
    if twist_check(H, 0.0, total, cfg):
        return Reduction.ELIMINATED
    if H.is_tonelli:
        logger.debug("time-%g segment folds at y=%s; chaining short segments", total, y)
        return Reduction.BROKEN_ORBIT
    logger.warning("time-%g segment folds at y=%s; keeping one fiber pair", total, y)
    return Reduction.KEPT_PAIR


def _chain(
    H: HamiltonianSpec,
    k: int,
    ell: int,
    y: np.ndarray,
    grids: GridConfig,
    cfg: FlowConfig,
    reduction: Reduction,
) -> GeneratingLandscape:
    n = H.n
    total = float(k * ell)
    if reduction is Reduction.AUTO:
        reduction = _route(H, total, y, cfg)

    if reduction is Reduction.ELIMINATED:
        axes, values = _eliminated(H, total, y, grids, cfg)
        durations: Tuple[float, ...] = (total,)
        segments = k * ell
        logger.debug("eliminated every fiber pair of the time-%g chain at y=%s", total, y)
    elif reduction is Reduction.BROKEN_ORBIT:
        if not H.is_tonelli:
            raise UnsupportedCoercive(f"broken orbits need a convex coercive Hamiltonian, got {H.family.value}")
        axes, values, durations = _broken_orbit(H, total, y, grids, cfg)
        segments = len(durations)

    if reduction is not Reduction.KEPT_PAIR:
        return GeneratingLandscape(
            k=k,
            ell=ell,
            y=y,
            axes=axes,
            periodic=(True,) * n,
            values=values,
            negative_index=n * (segments - 1),
            kept_index=0,
            negative_level=-np.inf,
            boundary_tag=(PERIODIC,) * n,
            labels=tuple(f"x{i}" for i in range(n)),
            durations=durations,
            reduction=reduction,
            hamiltonian=H,
            grids=grids,
            flow=cfg,
        )

    if ell > 2:
        raise GridBudgetExceeded(f"composing {ell} folded segments keeps {2 * n * (ell - 1) + n} free variables")
    first = float(k) if ell == 2 else 0.5 * total
    second = total - first
    axes, values, level, truncated, cfg = _kept_pair(H, first, second, y, grids, cfg)
    L = GeneratingLandscape(
        k=k,
        ell=ell,
        y=y,
        axes=axes,
        periodic=(True, False, False),
        values=values,
        negative_index=n * (k * ell - 1),
        kept_index=n,
        negative_level=level,
        boundary_tag=(PERIODIC, NEGATIVE_END, NEGATIVE_END),
        labels=("x", "u", "P"),
        durations=(first, second),
        reduction=reduction,
        hamiltonian=truncated,
        grids=grids,
        flow=cfg,
    )
    leakage, tolerance = L.quadratic_leakage(), L.leakage_tolerance()
    if leakage > tolerance:
        logger.warning("quadratic leakage %.3e exceeds its bound %.3e at y=%s", leakage, tolerance, y)
    return L


def compose_landscape(L: GeneratingLandscape, ell: int, grids: Optional[GridConfig] = None) -> GeneratingLandscape:
    """G_{ℓ,k}: the ℓ-fold chain of F_k with the same boundary data (y-slice or graph)."""
    if ell < 1:
        raise ValueError(f"ℓ must be >= 1, got {ell}")
    if ell == 1:
        return L
    if L.hamiltonian is None:
        raise ValueError("landscape carries no Hamiltonian to compose")
    grids = grids or L.grids
    cfg = L.flow or FlowConfig.init(L.hamiltonian)
    if L.graph_mode:
        return attrs.evolve(graph_landscape(L.hamiltonian, L.k * ell, grids, cfg), k=L.k, ell=ell)
    assert L.y is not None
    return _chain(L.hamiltonian, L.k, ell, L.y, grids, cfg, Reduction.AUTO)


def graph_landscape(
    H: HamiltonianSpec, k: int, grids: GridConfig = GridConfig(), cfg: Optional[FlowConfig] = None
) -> GeneratingLandscape:
    """
    −S_k(x, y) over x ∈ Tⁿ and y in the momentum box, periodized in y.

    S_k vanishes where |y| exceeds the support, so the box edges glue.
    """
    if H.support_radius is None:
        raise UnsupportedCoercive("the graph landscape needs a compactly supported Hamiltonian")
    cfg = cfg or FlowConfig.init(H)
    n = H.n
    res = grids.resolution
    _check_budget([res] * (2 * n), grids)
    if not twist_check(H, 0.0, float(k), cfg):
        raise NoGeneratingFunction(f"time-{k} map folds; its graph has no fiber-free generating function")
    Y = grids.momentum_half_width or H.outer_radius
    x = _torus_axis(res)
    y = np.linspace(-Y, Y, res, endpoint=False)
    grid = np.stack(np.meshgrid(*([x] * n + [y] * n), indexing="ij"), axis=-1).reshape(-1, 2 * n)
    S = generating_values(H, 0.0, float(k), grid[:, :n], grid[:, n:], cfg).values
    axes = (x,) * n + (y,) * n
    labels = tuple(f"x{i}" for i in range(n)) + tuple(f"y{i}" for i in range(n))
    return GeneratingLandscape(
        k=k,
        ell=1,
        y=None,
        axes=axes,
        periodic=(True,) * (2 * n),
        values=-S.reshape((res,) * (2 * n)),
        negative_index=n * (k - 1),
        kept_index=0,
        negative_level=-np.inf,
        boundary_tag=(PERIODIC,) * (2 * n),
        labels=labels,
        durations=(float(k),),
        hamiltonian=H,
        grids=grids,
        flow=cfg,
    )


def grad_residual(L: GeneratingLandscape, point: Sequence[float]) -> float:
    """Central-difference gradient norm of the interpolated landscape, one grid step per axis."""
    point = np.asarray(point, dtype=float)
    if point.shape != (L.free_dimension,):
        raise ValueError(f"expected {L.free_dimension} coordinates, got {point.shape}")
    axes, values, location = [], L.values, []
    for i, (axis, wrap) in enumerate(zip(L.axes, L.periodic)):
        h = axis[1] - axis[0]
        if wrap:
            period = h * axis.size
            values = np.concatenate([np.take(values, [-1], axis=i), values, np.take(values, [0, 1], axis=i)], axis=i)
            axis = np.concatenate([[axis[0] - h], axis, axis[-1] + h * np.arange(1, 3)])
            coordinate = axis[1] + (point[i] - axis[1]) % period
        else:
            coordinate = point[i]
            if not axis[0] + h <= coordinate <= axis[-1] - h:
                raise OutOfBox(f"{L.labels[i]}={coordinate} is not an interior point of [{axis[0]}, {axis[-1]}]")
        axes.append(axis)
        location.append(coordinate)
    interpolant = RegularGridInterpolator(tuple(axes), values)
    location = np.array(location)
    gradient = []
    for i, h in enumerate(L.spacing):
        step = np.zeros_like(location)
        step[i] = h
        gradient.append((interpolant(location + step) - interpolant(location - step))[0] / (2 * h))
    return float(np.linalg.norm(gradient))
