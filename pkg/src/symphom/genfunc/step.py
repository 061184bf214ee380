"""
Generating functions of flow segments.

Convention: a segment (q, p) ↦ (Q, P) of the lifted flow is generated by S(q, P) with

    Q = q + ∂S/∂P,    p = P + ∂S/∂q,    S = ⟨P, Q − q⟩ − ∫ p·dq − H dt,

so that S = duration·H(P) when H depends on p alone.
"""

import logging
from typing import Literal, Optional, Tuple

import numpy as np
from attrs import define

from ..dynamics import FlowConfig, HamiltonianSpec, flow_map
from ..dynamics.orbits import momentum_box
from ..exceptions import NoGeneratingFunction

logger = logging.getLogger(__name__)

Method = Literal["fixed_point", "newton"]


@define(frozen=True, eq=False)
class BoundarySolution:
    p: np.ndarray
    Q: np.ndarray
    action: np.ndarray
    values: np.ndarray
    residual: float
    contraction: float


def _end_momentum(
    H: HamiltonianSpec, t0: float, duration: float, q: np.ndarray, p: np.ndarray, cfg: FlowConfig
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return flow_map(H, q, p, cfg, t0, duration)


def generating_values(
    H: HamiltonianSpec,
    t0: float,
    duration: float,
    q: np.ndarray,
    P: np.ndarray,
    cfg: FlowConfig,
    method: Method = "newton",
    tol: float = 1e-12,
    accept: float = 1e-9,
    max_iters: int = 60,
) -> BoundarySolution:
    """
    Solves the boundary-value problem P_end(q, p) = P for a batch of (q, P) and
    evaluates S there.

    The fixed-point iteration p ← p + (P − P_end) is the contraction that defines
    the generating function of a short segment; Newton handles long segments whose
    twist has been checked.
    """
    q = np.array(q, dtype=float, ndmin=2)
    P = np.array(P, dtype=float, ndmin=2)
    n = q.shape[-1]
    p = P.copy()
    Q, Pend, action = _end_momentum(H, t0, duration, q, p, cfg)
    G = Pend - P
    residual = float(np.abs(G).max(initial=0.0))
    contraction = 0.0
    ε = 1e-7

    for iteration in range(max_iters):
        if residual <= tol:
            break
        if method == "fixed_point":
            p = p - G
        else:
            columns = []
            for e in np.eye(n):
                _, shifted, _ = _end_momentum(H, t0, duration, q, p + ε * e, cfg)
                columns.append((shifted - Pend) / ε)
            J = np.stack(columns, axis=-1)
            det = np.linalg.det(J)
            if not np.all(det > 0.0):
                raise NoGeneratingFunction(f"boundary map folds (det ∂P/∂p = {det.min():.3e}) over duration {duration}")
            step = np.linalg.solve(J, -G[..., None])[..., 0]
            step *= np.minimum(1.0, 0.5 / np.maximum(np.abs(step).max(axis=-1), 1e-300))[:, None]
            p = p + step
        Q, Pend, action = _end_momentum(H, t0, duration, q, p, cfg)
        G = Pend - P
        previous, residual = residual, float(np.abs(G).max())
        ratio = residual / previous if previous > 0.0 else 0.0
        contraction = max(contraction, ratio) if method == "fixed_point" else contraction
        logger.debug("%s iteration %d: residual %.3e", method, iteration, residual)
        if not np.isfinite(residual) or (method == "fixed_point" and ratio >= 1.0 and residual > accept):
            raise NoGeneratingFunction(
                f"boundary map is not a contraction over duration {duration} (ratio {ratio:.3f})"
            )

    if residual > accept:
        raise NoGeneratingFunction(f"boundary problem residual {residual:.3e} after {max_iters} iterations")
    values = np.sum(P * (Q - q), axis=-1) - action
    return BoundarySolution(p, Q, action, values, residual, contraction)


def endpoint_actions(
    H: HamiltonianSpec,
    t0: float,
    duration: float,
    q: np.ndarray,
    v: np.ndarray,
    cfg: FlowConfig,
    tol: float = 1e-11,
    accept: float = 1e-8,
    max_iters: int = 40,
) -> BoundarySolution:
    """
    Solves Q(q, p) − q = v by Newton in p for a batch of (q, v): the segment that
    travels v in the given time.

    This is ∂S/∂P = v for the end momentum P, so `values` is S(q, P) and
    ⟨P, v⟩ − S is the action of the segment. ∂Q/∂p must stay positive definite.
    """
    q = np.array(q, dtype=float, ndmin=2)
    v = np.array(v, dtype=float, ndmin=2)
    n = q.shape[-1]
    p = v / duration
    Q, Pend, action = _end_momentum(H, t0, duration, q, p, cfg)
    G = Q - q - v
    residual = float(np.abs(G).max(initial=0.0))
    ε = 1e-7

    for iteration in range(max_iters):
        if residual <= tol:
            break
        columns = [(_end_momentum(H, t0, duration, q, p + ε * e, cfg)[0] - Q) / ε for e in np.eye(n)]
        J = np.stack(columns, axis=-1)
        det = np.linalg.det(J)
        if not np.all(det > 0.0):
            raise NoGeneratingFunction(f"endpoint map folds (det ∂Q/∂p = {det.min():.3e}) over duration {duration}")
        step = np.linalg.solve(J, -G[..., None])[..., 0]
        step *= np.minimum(1.0, 1.0 / (duration * np.maximum(np.abs(step).max(axis=-1), 1e-300)))[:, None]
        p = p + step
        Q, Pend, action = _end_momentum(H, t0, duration, q, p, cfg)
        G = Q - q - v
        residual = float(np.abs(G).max())
        logger.debug("endpoint iteration %d: residual %.3e", iteration, residual)
        if not np.isfinite(residual):
            raise NoGeneratingFunction(f"endpoint problem diverged over duration {duration}")

    if residual > accept:
        raise NoGeneratingFunction(f"endpoint problem residual {residual:.3e} after {max_iters} iterations")
    values = np.sum(Pend * (Q - q), axis=-1) - action
    return BoundarySolution(p, Q, action, values, residual, 0.0)


def twist_check(
    H: HamiltonianSpec,
    t0: float,
    duration: float,
    cfg: FlowConfig,
    half_width: Optional[float] = None,
    q_nodes: int = 32,
    p_nodes: int = 257,
) -> bool:
    """
    True when p ↦ P_end(q, p) is injective on the momentum box for every sampled q,
    i.e. the segment has no fold and its generating function is single-valued.
    """
    n = H.n
    B = half_width if half_width is not None else 1.25 * momentum_box(H)
    if n == 1:
        q = np.repeat(np.arange(q_nodes) / q_nodes, p_nodes)[:, None]
        p = np.tile(np.linspace(-B, B, p_nodes), q_nodes)[:, None]
        _, Pend, _ = _end_momentum(H, t0, duration, q, p, cfg)
        ok = bool(np.all(np.diff(Pend[:, 0].reshape(q_nodes, p_nodes), axis=1) > 0.0))
    else:
        side_q, side_p = max(q_nodes // 4, 2), max(p_nodes // 16, 3)
        qs = np.stack(np.meshgrid(*[np.arange(side_q) / side_q] * n, indexing="ij"), -1).reshape(-1, n)
        ps = np.stack(np.meshgrid(*[np.linspace(-B, B, side_p)] * n, indexing="ij"), -1).reshape(-1, n)
        q = np.repeat(qs, len(ps), axis=0)
        p = np.tile(ps, (len(qs), 1))
        ε = 1e-6
        _, base, _ = _end_momentum(H, t0, duration, q, p, cfg)
        J = np.stack(
            [(_end_momentum(H, t0, duration, q, p + ε * e, cfg)[1] - base) / ε for e in np.eye(n)], axis=-1
        )
        ok = bool(np.all(np.linalg.det(J) > 0.0))
    logger.debug("twist check over [%g, %g]: %s", t0, t0 + duration, "ok" if ok else "fold")
    return ok


@define(frozen=True, eq=False)
class StepGenFun:
    """S on a (q, P) grid for the segment [t0, t0 + dt]; q periodic, P over the momentum box."""

    q_axis: np.ndarray
    P_axis: np.ndarray
    table: np.ndarray
    t0: float
    dt: float
    iteration_residual: float
    contraction: float


def step_genfun(
    H: HamiltonianSpec,
    t0: float,
    dt: float,
    cfg: FlowConfig,
    q_nodes: int = 64,
    P_nodes: int = 65,
) -> StepGenFun:
    if H.n != 1:
        raise ValueError("tabulated step generating functions are one-dimensional")
    B = 1.25 * momentum_box(H)
    q_axis = np.arange(q_nodes) / q_nodes
    P_axis = np.linspace(-B, B, P_nodes)
    Qg, Pg = np.meshgrid(q_axis, P_axis, indexing="ij")
    solution = generating_values(H, t0, dt, Qg.reshape(-1, 1), Pg.reshape(-1, 1), cfg, method="fixed_point")
    logger.debug("step generating function over dt=%g: residual %.2e", dt, solution.residual)
    return StepGenFun(
        q_axis,
        P_axis,
        solution.values.reshape(q_nodes, P_nodes),
        t0,
        dt,
        solution.residual,
        solution.contraction,
    )
