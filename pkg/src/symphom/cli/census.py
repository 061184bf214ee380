"""
Periodic orbits of the time-one map on T*Tⁿ.

A point z is a (v, u)-periodic orbit when Φᵛ(z) = z + (u, 0) on the universal
cover. Newton runs in (q, p) from a jittered grid of seeds; each seed keeps the
winding u its own orbit has after v periods. Solutions are reduced to their
minimal period and deduplicated geometrically along their orbit.
"""

import logging
from fractions import Fraction
from itertools import product
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from attrs import define

from ..dynamics import FlowConfig, HamiltonianSpec, flow_map, integrate
from ..dynamics.orbits import displacement, momentum_box
from ..exceptions import UnsupportedCoercive

logger = logging.getLogger(__name__)

MAX_PERIOD = 64


@define(frozen=True)
class CensusConfig:
    q_seeds: int = 12
    p_seeds: int = 25
    jitter: float = 0.25  # fraction of the seed spacing
    newton_iters: int = 30
    tol: float = 1e-9
    dedupe: float = 1e-6
    seed: int = 0


@define(frozen=True, eq=False)
class PeriodicOrbit:
    period: int
    winding: Tuple[int, ...]
    q: np.ndarray
    p: np.ndarray
    action: float  # ∫ p dq − H dt over one period
    residual: float

    @property
    def rotation(self) -> Tuple[Fraction, ...]:
        return tuple(Fraction(u, self.period) for u in self.winding)

    @property
    def mean_action(self) -> float:
        return self.action / self.period

    def to_row(self) -> Tuple[Any, ...]:
        return (
            self.period,
            *self.winding,
            *map(float, self.rotation),
            *self.q,
            *self.p,
            self.action,
            self.mean_action,
            self.residual,
        )


@define(frozen=True, eq=False)
class CensusTable:
    N: int
    orbits: List[PeriodicOrbit]
    degenerate: bool

    @property
    def distinct_rationals(self) -> int:
        return len({o.rotation for o in self.orbits})

    @property
    def distinct_actions(self) -> Optional[int]:
        if self.degenerate:
            return None
        return len({round(o.mean_action, 6) for o in self.orbits})

    def summary(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "orbits": len(self.orbits),
            "degenerate": self.degenerate,
            "distinct_rationals": self.distinct_rationals,
            "distinct_actions": self.distinct_actions,
        }


def _seeds(H: HamiltonianSpec, cfg: CensusConfig) -> Tuple[np.ndarray, np.ndarray]:
    n = H.n
    try:
        width = H.outer_radius
    except UnsupportedCoercive:
        width = momentum_box(H)
    q_axis = np.arange(cfg.q_seeds) / cfg.q_seeds
    p_axis = np.linspace(-width, width, cfg.p_seeds)
    pairs = list(product(product(q_axis, repeat=n), product(p_axis, repeat=n)))
    q = np.array([c for c, _ in pairs], dtype=float)
    p = np.array([c for _, c in pairs], dtype=float)

    rng = np.random.default_rng(cfg.seed)
    q += cfg.jitter / cfg.q_seeds * rng.uniform(-1.0, 1.0, q.shape)
    p += cfg.jitter * (p_axis[1] - p_axis[0]) * rng.uniform(-1.0, 1.0, p.shape)
    return q, p


def _residual(H: HamiltonianSpec, v: int, z: np.ndarray, u: np.ndarray, flow: FlowConfig) -> np.ndarray:
    n = u.shape[-1]
    dq, dp = displacement(H, v, z[:, :n], z[:, n:], flow)
    return np.concatenate([dq - u, dp], axis=-1)


def periodic_newton(
    H: HamiltonianSpec, v: int, q0: np.ndarray, p0: np.ndarray, flow: FlowConfig, cfg: CensusConfig
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Batched Gauss–Newton for Φᵛ(z) − z = (u, 0), with u the rounded winding of
    each seed. The pseudo-inverse step tolerates the continua of periodic points
    that integrable and radial Hamiltonians carry.

    Returns the points, windings and max-norm residuals (infinite when lost).
    """
    n = H.n
    z = np.concatenate([q0, p0], axis=-1)
    dq, _ = displacement(H, v, q0, p0, flow)
    u = np.round(np.nan_to_num(dq))
    G = _residual(H, v, z, u, flow)
    alive = np.isfinite(G).all(axis=-1)
    bound = 2.0 * np.abs(p0).max() + 1.0
    ε = 1e-7

    for iteration in range(cfg.newton_iters):
        active = np.flatnonzero(alive & (np.abs(G).max(axis=-1) > cfg.tol))
        if active.size == 0:
            break
        za, Ga = z[active], G[active]
        shifted = np.concatenate([za + ε * e for e in np.eye(2 * n)])
        Gs = _residual(H, v, shifted, np.tile(u[active], (2 * n, 1)), flow).reshape(2 * n, active.size, 2 * n)
        J = np.moveaxis((Gs - Ga) / ε, 0, -1)
        usable = np.isfinite(J).all(axis=(-1, -2))
        alive[active[~usable]] = False
        active, J, Ga = active[usable], J[usable], Ga[usable]
        if active.size == 0:
            continue

        step = -(np.linalg.pinv(J) @ Ga[..., None])[..., 0]
        step *= np.minimum(1.0, 0.25 / np.maximum(np.abs(step).max(axis=-1), 1e-300))[:, None]
        z[active] += step
        G[active] = _residual(H, v, z[active], u[active], flow)
        lost = ~np.isfinite(G[active]).all(axis=-1) | (np.abs(z[active, n:]).max(axis=-1) > bound)
        alive[active[lost]] = False
        logger.debug("period %d, iteration %d: %d seeds active", v, iteration, active.size)

    residual = np.where(alive, np.abs(G).max(axis=-1), np.inf)
    return z, u.astype(int), residual


def _minimal_period(H: HamiltonianSpec, v: int, z: np.ndarray, u: np.ndarray, flow: FlowConfig, tol: float) -> int:
    n = u.size
    for d in range(1, v):
        if v % d or np.any((u * d) % v):
            continue
        q, p, _ = flow_map(H, z[None, :n], z[None, n:], flow, duration=float(d))
        if np.abs(np.concatenate([q[0] - z[:n] - u * d // v, p[0] - z[n:]])).max() <= tol:
            return d
    return v


def _in_support(H: HamiltonianSpec, z: np.ndarray, tol: float = 1e-12) -> bool:
    n = H.n
    h, hq, hp = H.evaluate(0.0, z[None, :n], z[None, n:])
    return bool(abs(h[0] - H.offset) > tol or np.abs(hq).max() > tol or np.abs(hp).max() > tol)


def census(H: HamiltonianSpec, N: int, cfg: Optional[CensusConfig] = None, flow: Optional[FlowConfig] = None) -> CensusTable:
    """
    Periodic orbits of period at most N inside the support of H.

    When the time-one map moves no seed, every point is periodic; the census is
    flagged degenerate and reports no orbits.
    """
    if not 1 <= N <= MAX_PERIOD:
        raise ValueError(f"N must lie in [1, {MAX_PERIOD}], got {N}")
    cfg = cfg or CensusConfig()
    flow = flow or FlowConfig.init(H)
    n = H.n
    q0, p0 = _seeds(H, cfg)

    dq, dp = displacement(H, 1, q0, p0, flow)
    if np.nanmax(np.abs(np.concatenate([dq, dp], axis=-1))) <= cfg.tol:
        logger.warning("the time-one map fixes every seed; census is degenerate")
        return CensusTable(N, [], True)

    found: List[PeriodicOrbit] = []
    footprints: Dict[Tuple[int, Tuple[int, ...]], List[np.ndarray]] = {}
    for v in range(1, N + 1):
        z, u, residual = periodic_newton(H, v, q0.copy(), p0.copy(), flow, cfg)
        for i in np.flatnonzero(residual <= cfg.tol):
            if not _in_support(H, z[i]):
                continue
            d = _minimal_period(H, v, z[i], u[i], flow, 100 * cfg.tol)
            winding = tuple(int(w) for w in u[i] * d // v)
            point = np.concatenate([z[i, :n] % 1.0, z[i, n:]])
            seen = footprints.setdefault((d, winding), [])
            if any(_torus_distance(point, other, n) <= cfg.dedupe for other in seen):
                continue

            segment = integrate(H, z[i, None, :n], z[i, None, n:], flow, 0.0, float(d), record=True)
            marks = segment.qs[:: flow.substeps, 0], segment.ps[:: flow.substeps, 0]
            seen.extend(np.concatenate([q % 1.0, p]) for q, p in zip(*marks))
            found.append(PeriodicOrbit(d, winding, z[i, :n] % 1.0, z[i, n:].copy(), float(segment.action[0]), float(residual[i])))
        logger.info("census period %d: %d orbits so far", v, len(found))

    found.sort(key=lambda o: (o.period, o.winding, o.mean_action, tuple(o.q), tuple(o.p)))
    return CensusTable(N, found, False)


def _torus_distance(a: np.ndarray, b: np.ndarray, n: int) -> float:
    dq = np.abs((a[:n] - b[:n] + 0.5) % 1.0 - 0.5)
    return float(max(dq.max(), np.abs(a[n:] - b[n:]).max()))
