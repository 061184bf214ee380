"""
Effective Hamiltonians computed without the selector.

For H convex and superlinear in p, H̄(P) is the critical value of the cell problem,
obtained here by discrete Lax–Oleinik value iteration with the Lagrangian tilted by
P. For the mechanical pendulum H = p²/2 + a·cos 2πq it is the inverse of the action
of the rotational orbits, constant at max V = |a| on the plateau |P| ≤ 4√|a|/π.
"""

import logging
from enum import Enum
from typing import Any, List, Sequence, Tuple

import numpy as np
from attrs import define
from scipy.optimize import brentq
from scipy.special import ellipe

from ..dynamics import Family, HamiltonianSpec
from ..exceptions import NonConvexInput

logger = logging.getLogger(__name__)

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class Method(str, Enum):
    LAX_OLEINIK = "lax-oleinik"
    ACTION_INTEGRAL = "action-integral"


@define(frozen=True, eq=False)
class EffHamTable:
    p_grid: np.ndarray
    values: np.ndarray
    method: Method
    residual: float

    def convexity_violations(self, tol: float = 1e-9) -> int:
        """Nodes where the midpoint test on a uniform grid fails."""
        second = self.values[:-2] - 2.0 * self.values[1:-1] + self.values[2:]
        return int(np.sum(second < -tol))

    def to_rows(self) -> List[Tuple[float, float]]:
        return [(float(p), float(v)) for p, v in zip(self.p_grid, self.values)]


def _check_convex(H: HamiltonianSpec, bound: float) -> None:
    q = np.linspace(0.0, 1.0, 32, endpoint=False)
    p = np.linspace(-bound, bound, 201)
    Q, P = np.meshgrid(q, p, indexing="ij")
    values = H(0.0, Q[..., None], P[..., None])
    second = values[:, :-2] - 2.0 * values[:, 1:-1] + values[:, 2:]
    if second.min() < -1e-9 * max(1.0, np.abs(values).max()):
        raise NonConvexInput(f"H is not convex in p on [-{bound:g}, {bound:g}]")


def legendre(H: HamiltonianSpec, q: np.ndarray, v: np.ndarray, bound: float, iters: int = 80) -> np.ndarray:
    """L(q, v) = max_p p·v − H(q, p) over |p| ≤ bound, by golden-section search."""
    q, v = np.broadcast_arrays(q, v)

    def objective(p: np.ndarray) -> np.ndarray:
        return p * v - H(0.0, q[..., None], p[..., None])

    a, b = np.full(v.shape, -bound), np.full(v.shape, bound)
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(iters):
        left = fc > fd
        a, b = np.where(left, a, c), np.where(left, d, b)
        c_new, d_new = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
        c, d = np.where(left, c_new, d), np.where(left, c, d_new)
        fc, fd = np.where(left, objective(c), fd), np.where(left, fc, objective(d))
    return objective(0.5 * (a + b))


def lax_oleinik_effham(
    H: HamiltonianSpec,
    P: float,
    q_nodes: int = 256,
    velocities: int = 64,
    iters: int = 4096,
    tol: float = 1e-10,
) -> Tuple[float, float]:
    """
    (H̄(P), residual) by value iteration of
        u ↦ min_v u(q − v·dt) + dt·(L(·, v) − P·v)
    with the velocities chosen so that every step moves a whole number of nodes.

    H̄ is minus the growth rate of u per unit time and the residual is the spread
    of that rate over q.
    """
    if H.n != 1 or not H.is_autonomous:
        raise ValueError("the Lax–Oleinik oracle handles autonomous one-degree-of-freedom Hamiltonians")
    if not H.coercive:
        raise NonConvexInput("a compactly supported Hamiltonian is not superlinear")
    P = float(P)
    bound = abs(P) + 1.0
    _check_convex(H, 2.0 * bound + 1.0)

    h = 1.0 / q_nodes
    q = np.arange(q_nodes) * h
    p_nodes = np.linspace(-bound, bound, 65)
    speed = np.abs(H.gradient(0.0, np.repeat(q, 65)[:, None], np.tile(p_nodes, q_nodes)[:, None])[1]).max()
    V = 1.25 * max(float(speed), 0.5)
    half = velocities // 2
    shifts = np.arange(-half, velocities - half)
    dv = V / half
    dt = h / dv
    v = shifts * dv

    L = legendre(H, q[:, None], v[None, :], 2.0 * bound + 1.0)
    departure = np.stack([np.roll(L[:, j], s) for j, s in enumerate(shifts)], axis=1)
    cost = dt * (0.5 * (L + departure) - P * v[None, :])

    u = np.zeros(q_nodes)
    drift, anchor, anchor_step = 0.0, np.zeros(q_nodes), 0
    for iteration in range(iters):
        updated = (np.stack([np.roll(u, s) for s in shifts], axis=1) + cost).min(axis=1)
        increment = updated - u
        shift = float(updated.min())
        u, drift = updated - shift, drift + shift
        if iteration > q_nodes and np.ptp(increment) / dt <= tol:
            value, residual = -float(increment.mean()) / dt, float(np.ptp(increment)) / dt
            break
        if iteration == iters // 2:
            anchor, anchor_step = u + drift, iteration
    else:
        # periodic regime of the min-plus iteration: average over the second half
        rates = -(u + drift - anchor) / ((iteration - anchor_step) * dt)
        value, residual = float(rates.mean()), float(np.ptp(rates))
    logger.debug("Lax–Oleinik at P=%g: %.6g (residual %.2e, %d iterations)", P, value, residual, iteration + 1)
    return value, residual


def lax_oleinik_table(H: HamiltonianSpec, p_grid: Sequence[float], **kwargs: Any) -> EffHamTable:
    results = np.array([lax_oleinik_effham(H, P, **kwargs) for P in p_grid])
    return EffHamTable(np.asarray(p_grid, dtype=float), results[:, 0], Method.LAX_OLEINIK, float(results[:, 1].max()))


def rotation_action(amplitude: float, E: float) -> float:
    """Mean momentum of the rotational pendulum orbit at energy E ≥ |a|."""
    a = abs(amplitude)
    if a == 0.0:
        return float(np.sqrt(2.0 * E))
    return float(2.0 / np.pi * np.sqrt(2.0 * (E + a)) * ellipe(2.0 * a / (E + a)))


def pendulum_plateau(amplitude: float) -> Tuple[float, float]:
    """(plateau value, plateau half-width p_c)."""
    a = abs(amplitude)
    return a, 4.0 * np.sqrt(a) / np.pi


def _pendulum_component(a: float, P: float) -> float:
    level, critical = pendulum_plateau(a)
    if abs(P) <= critical:
        return level
    if a == 0.0:
        return 0.5 * P * P
    upper = level + 0.5 * P * P + 1.0
    return float(brentq(lambda E: rotation_action(a, E) - abs(P), level, upper, xtol=1e-14))


def pendulum_effham(amplitude: float, P: Any) -> float:
    """H̄ of p²/2 + a·Σ cos 2πq_i at cohomology P, summed over the separate degrees of freedom."""
    return float(sum(_pendulum_component(abs(amplitude), float(c)) for c in np.atleast_1d(P)))


def pendulum_table(amplitude: float, p_grid: Sequence[float]) -> EffHamTable:
    values = np.array([pendulum_effham(amplitude, P) for P in p_grid])
    return EffHamTable(np.asarray(p_grid, dtype=float), values, Method.ACTION_INTEGRAL, 0.0)


def effham_oracle(H: HamiltonianSpec, p_grid: Sequence[float]) -> EffHamTable:
    """The action integral for autonomous pendulums, Lax–Oleinik otherwise."""
    if H.family is Family.MECHANICAL_PENDULUM and H.is_autonomous and H.shear == 0.0 and H.scale == 1.0:
        table = pendulum_table(H.amplitude, p_grid)
        return EffHamTable(table.p_grid, table.values + H.offset, table.method, 0.0)
    return lax_oleinik_table(H, p_grid)
