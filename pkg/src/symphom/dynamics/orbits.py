import logging
from itertools import product
from typing import Any, Optional, Tuple

import numpy as np
from attrs import define

from ..exceptions import NonConvergentImplicitStep, NoOrbitFound
from .flow import FlowConfig, PhasePoint, Segment, flow_map, integrate
from .hamiltonian import HamiltonianSpec

logger = logging.getLogger(__name__)


@define(frozen=True, eq=False)
class LiftedOrbit:
    """
    A trajectory on the universal cover sampled at every substep over [0, horizon].

    `action` is the accumulated ∫ p·q̇ − H dt. The optional look-ahead samples cover
    [horizon, horizon + 1] and feed the invariance defect of orbit measures.
    """

    times: np.ndarray
    qs: np.ndarray
    ps: np.ndarray
    action: float
    horizon: float
    lookahead: Optional[Segment] = None

    @property
    def start(self) -> PhasePoint:
        return PhasePoint(self.qs[0], self.ps[0])

    @property
    def end(self) -> PhasePoint:
        return PhasePoint(self.qs[-1], self.ps[-1])

    @property
    def average_action(self) -> float:
        return self.action / self.horizon

    @property
    def n(self) -> int:
        return self.qs.shape[-1]


def _orbit_from(segment: Segment, horizon: float, lookahead: Optional[Segment] = None) -> LiftedOrbit:
    return LiftedOrbit(
        segment.times,
        segment.qs[:, 0],
        segment.ps[:, 0],
        float(segment.action[0]),
        horizon,
        lookahead,
    )


def iterate_lift(H: HamiltonianSpec, z: PhasePoint, k: int, cfg: FlowConfig, lookahead: bool = False) -> LiftedOrbit:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    segment = integrate(H, z.q[None], z.p[None], cfg, 0.0, float(k), record=True)
    ahead = None
    if lookahead:
        ahead = integrate(H, segment.q, segment.p, cfg, float(k), 1.0, record=True)
    return _orbit_from(segment, float(k), ahead)


def rotation_vector(orb: LiftedOrbit) -> np.ndarray:
    if orb.horizon < 1.0:
        raise ValueError(f"rotation vector needs a horizon >= 1, got {orb.horizon}")
    return (orb.qs[-1] - orb.qs[0]) / orb.horizon


def momentum_box(H: HamiltonianSpec, α: Any = 0.0) -> float:
    """Half-width of the momentum box searched for orbits."""
    if H.support_radius is not None:
        return H.outer_radius
    return max(3.0, 2.0 * float(np.max(np.abs(α))) + 1.0)


def displacement(
    H: HamiltonianSpec, k: int, q0: np.ndarray, p0: np.ndarray, cfg: FlowConfig
) -> Tuple[np.ndarray, np.ndarray]:
    """(q_k − q_0, p_k − p_0) per batch member, NaN where the integrator gave up."""
    try:
        qk, pk, _ = flow_map(H, q0, p0, cfg, duration=float(k))
        return qk - q0, pk - p0
    except NonConvergentImplicitStep:
        dq = np.full_like(q0, np.nan)
        dp = np.full_like(p0, np.nan)
        for i in range(q0.shape[0]):
            try:
                qk, pk, _ = flow_map(H, q0[i : i + 1], p0[i : i + 1], cfg, duration=float(k))
            except NonConvergentImplicitStep:
                continue
            dq[i], dp[i] = qk[0] - q0[i], pk[0] - p0[i]
        return dq, dp


def shoot(
    H: HamiltonianSpec,
    k: int,
    target: np.ndarray,
    q0: np.ndarray,
    p0: np.ndarray,
    cfg: FlowConfig,
    max_iters: int = 40,
    max_step: float = 0.5,
    bound: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Batched Newton in p at fixed q for q_k(q, p) − q = target.

    Returns the final momenta and the max-norm residual per seed; seeds whose
    Jacobian went singular or whose iterates left the box carry an infinite
    residual.
    """
    n = q0.shape[-1]
    bound = 4.0 * momentum_box(H, target / k) + 10.0 if bound is None else bound
    p = p0.copy()
    dq, _ = displacement(H, k, q0, p, cfg)
    G = dq - target
    alive = np.isfinite(G).all(axis=-1)
    ε = 1e-6

    for iteration in range(max_iters):
        err = np.abs(G).max(axis=-1)
        active = np.flatnonzero(alive & (err > cfg.newton_tol))
        if active.size == 0:
            break
        qa, pa = q0[active], p[active]
        shifted = np.concatenate([pa + ε * e for e in np.eye(n)])
        Gs, _ = displacement(H, k, np.tile(qa, (n, 1)), shifted, cfg)
        Gs = (Gs - target).reshape(n, active.size, n)
        J = np.moveaxis((Gs - G[active]) / ε, 0, -1)

        usable = np.isfinite(J).all(axis=(-1, -2))
        usable[usable] = np.abs(np.linalg.det(J[usable])) > 1e-12
        alive[active[~usable]] = False
        active, J = active[usable], J[usable]
        if active.size == 0:
            continue

        step = np.linalg.solve(J, -G[active][..., None])[..., 0]
        step *= np.minimum(1.0, max_step / np.maximum(np.abs(step).max(axis=-1), 1e-300))[:, None]
        p[active] += step
        dq, _ = displacement(H, k, q0[active], p[active], cfg)
        G[active] = dq - target
        escaped = ~np.isfinite(G[active]).all(axis=-1) | (np.abs(p[active]).max(axis=-1) > bound)
        alive[active[escaped]] = False
        logger.debug("shooting iteration %d: %d seeds active", iteration, int(alive.sum()))

    residual = np.where(alive, np.abs(G).max(axis=-1), np.inf)
    return p, residual


def translation_seeds(H: HamiltonianSpec, seed: PhasePoint, α: np.ndarray, per_axis: int = 5) -> Tuple[np.ndarray, np.ndarray]:
    n = seed.n
    width = momentum_box(H, α)
    q_nodes = np.linspace(0.0, 1.0, max(per_axis - 1, 1), endpoint=False)
    p_nodes = np.linspace(-width, width, 2 * per_axis - 1)
    qs = [seed.q] + [np.array(c) for c in product(q_nodes, repeat=n)]
    ps = [seed.p] + [np.array(c) for c in product(p_nodes, repeat=n)]
    pairs = [(seed.q, seed.p)] + [(q, p) for q in qs[1:] for p in ps[1:]]
    return np.stack([q for q, _ in pairs]), np.stack([p for _, p in pairs])


def _displacement_jacobian(
    H: HamiltonianSpec, k: int, q0: np.ndarray, p: np.ndarray, base: np.ndarray, cfg: FlowConfig, ε: float = 1e-6
) -> np.ndarray:
    n = p.size
    dq, _ = displacement(H, k, np.tile(q0, (n, 1)), p[None, :] + ε * np.eye(n), cfg)
    return ((dq - base) / ε).T


def continue_translation(
    H: HamiltonianSpec,
    k: int,
    target: np.ndarray,
    q0: np.ndarray,
    p0: np.ndarray,
    cfg: FlowConfig,
    step: float = 0.25,
    max_step: float = 4.0,
    max_steps: int = 100,
    corrector_iters: int = 8,
    tol: float = 1e-8,
) -> Optional[Tuple[np.ndarray, float]]:
    """
    Pseudo-arclength continuation of D(p) = (1 − λ)·D(p0) + λ·target in (p, λ)
    from (p0, 0) to λ = 1, where D(p) = q_k(q0, p) − q0 at fixed q0.

    Turning points in λ are passed along the tangent of the curve. Returns the
    momentum at λ = 1 polished by shooting, with its residual, or None.
    """
    n = q0.size

    def system(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        d = displacement(H, k, q0[None], z[None, :n], cfg)[0][0]
        A = np.column_stack([_displacement_jacobian(H, k, q0, z[:n], d, cfg), -shift])
        return d - origin - z[n] * shift, A

    def tangent(A: np.ndarray, previous: np.ndarray) -> np.ndarray:
        t = np.linalg.svd(A)[2][-1]
        return -t if t @ previous < 0.0 else t

    origin = displacement(H, k, q0[None], p0[None], cfg)[0][0]
    if not np.isfinite(origin).all():
        return None
    shift = target - origin
    z = np.append(p0, 0.0)
    _, A = system(z)
    if not np.isfinite(A).all():
        return None
    t = tangent(A, np.append(np.zeros(n), 1.0))
    h = step

    for iteration in range(max_steps):
        w, converged = z + h * t, False
        for _ in range(corrector_iters):
            g, A = system(w)
            F = np.append(g, t @ (w - z) - h)
            if not (np.isfinite(F).all() and np.isfinite(A).all()):
                break
            if np.abs(F).max() <= tol:
                converged = True
                break
            M = np.vstack([A, t])
            if abs(np.linalg.det(M)) <= 1e-14:
                break
            w = w - np.linalg.solve(M, F)
        if not converged:
            h *= 0.5
            if h < 1e-6:
                return None
            continue

        if w[n] >= 1.0:
            s = (1.0 - z[n]) / (w[n] - z[n])
            p = z[:n] + s * (w[:n] - z[:n])
            bound = 2.0 * float(np.abs(p).max()) + 10.0
            polished, residual = shoot(H, k, target, q0[None], p[None], cfg, bound=bound)
            logger.debug("continuation reached λ = 1 after %d steps, residual %.2e", iteration + 1, residual[0])
            return (polished[0], float(residual[0])) if residual[0] <= cfg.newton_tol else None
        t, z = tangent(A, t), w
        h = min(2.0 * h, max_step)
    return None


def find_translated_orbit(
    H: HamiltonianSpec,
    k: int,
    α: Any,
    seed: PhasePoint,
    cfg: FlowConfig,
    per_axis: int = 5,
) -> Tuple[PhasePoint, float]:
    """
    A point z with q-component of Φᵏ(z) − z equal to kα, the momentum left free.

    The seed is tried first, then a coarse (q, p) grid; the first converged seed in
    that order wins. When no shot converges, the target is reached by arclength
    continuation from the seed, then from the seed that came closest.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    α = np.atleast_1d(np.asarray(α, dtype=float))
    target = k * α
    q0, p0 = translation_seeds(H, seed, α, per_axis)
    p, residual = shoot(H, k, target, q0, p0, cfg)

    converged = np.flatnonzero(residual <= cfg.newton_tol)
    if converged.size:
        i = converged[0]
        logger.debug("translated orbit for α=%s at k=%d from seed %d", α, k, i)
        return PhasePoint(q0[i], p[i]), float(residual[i])

    closest = int(np.argmin(residual)) if np.isfinite(residual).any() else 0
    for i in dict.fromkeys((0, closest)):
        found = continue_translation(H, k, target, q0[i], p0[i], cfg)
        if found is not None:
            logger.info("translated orbit for α=%s at k=%d by continuation from seed %d", α, k, i)
            return PhasePoint(q0[i], found[0]), found[1]
    raise NoOrbitFound(f"no translated orbit with rotation {α} at k={k} from {q0.shape[0]} seeds or by continuation")
