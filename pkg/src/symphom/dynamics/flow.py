import logging
import math
from enum import Enum
from typing import Any, Sequence, Tuple

import numpy as np
from attrs import define, field

from ..exceptions import IncompatibleIntegrator, NonConvergentImplicitStep
from .hamiltonian import HamiltonianSpec

logger = logging.getLogger(__name__)


class Integrator(str, Enum):
    SPLITTING_SEPARABLE = "splitting_separable"  # Strang
    IMPLICIT_MIDPOINT = "implicit_midpoint"


@define(frozen=True)
class FlowConfig:
    integrator: Integrator = field(default=Integrator.IMPLICIT_MIDPOINT, converter=Integrator)
    substeps: int = 16  # per unit time
    newton_tol: float = 1e-10
    max_newton_iters: int = 25

    def __attrs_post_init__(self) -> None:
        if self.substeps < 1:
            raise ValueError(f"substeps must be >= 1, got {self.substeps}")
        if self.newton_tol <= 0.0:
            raise ValueError(f"newton_tol must be > 0, got {self.newton_tol}")

    @classmethod
    def init(cls, H: HamiltonianSpec, **kwargs: Any) -> "FlowConfig":
        """Strang splitting where H allows it, implicit midpoint otherwise."""
        integrator = Integrator.SPLITTING_SEPARABLE if H.is_separable else Integrator.IMPLICIT_MIDPOINT
        return cls(integrator, **kwargs)


def _as_vector(x: Any) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


@define(frozen=True, eq=False)
class PhasePoint:
    """A point of the universal cover ℝⁿ × ℝⁿ of T*Tⁿ."""

    q: np.ndarray = field(converter=_as_vector)
    p: np.ndarray = field(converter=_as_vector)

    def __attrs_post_init__(self) -> None:
        if not (np.isfinite(self.q).all() and np.isfinite(self.p).all()):
            raise ValueError(f"non-finite phase point ({self.q}, {self.p})")

    @property
    def n(self) -> int:
        return self.q.size

    def on_torus(self) -> "PhasePoint":
        return PhasePoint(self.q % 1.0, self.p)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhasePoint):
            return NotImplemented
        return bool(np.array_equal(self.q, other.q) and np.array_equal(self.p, other.p))


@define(frozen=True, eq=False)
class Segment:
    """A batch of trajectories; arrays are indexed (sample, batch, coordinate)."""

    times: np.ndarray
    qs: np.ndarray
    ps: np.ndarray
    action: np.ndarray  # ∫ p·dq − H dt per batch member

    @property
    def q(self) -> np.ndarray:
        return self.qs[-1]

    @property
    def p(self) -> np.ndarray:
        return self.ps[-1]


def _vector_field(H: HamiltonianSpec, t: float, q: np.ndarray, p: np.ndarray) -> np.ndarray:
    _, hq, hp = H.evaluate(t, q, p)
    return np.concatenate([hp, -hq], axis=-1)


def _strang_step(H: HamiltonianSpec, t: float, dt: float, q: np.ndarray, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    _, hq, _ = H.evaluate(t, q, p)
    p = p - 0.5 * dt * hq
    _, _, hp = H.evaluate(t + 0.5 * dt, q, p)
    q = q + dt * hp
    _, hq, _ = H.evaluate(t + dt, q, p)
    return q, p - 0.5 * dt * hq


def _midpoint_step(
    H: HamiltonianSpec, t: float, dt: float, q: np.ndarray, p: np.ndarray, cfg: FlowConfig
) -> Tuple[np.ndarray, np.ndarray]:
    n = q.shape[-1]
    z = np.concatenate([q, p], axis=-1)
    z1 = z.copy()
    τ = t + 0.5 * dt
    ε = 1e-7
    eye = np.eye(2 * n)

    for iteration in range(cfg.max_newton_iters + 1):
        mid = 0.5 * (z + z1)
        G = z1 - z - dt * _vector_field(H, τ, mid[:, :n], mid[:, n:])
        active = np.abs(G).max(axis=-1) > cfg.newton_tol
        if not active.any():
            return z1[:, :n], z1[:, n:]
        if iteration == cfg.max_newton_iters:
            raise NonConvergentImplicitStep(
                f"midpoint Newton residual {np.abs(G).max():.3e} after {iteration} iterations at t={t:.4f}"
            )
        m = mid[active]
        f0 = _vector_field(H, τ, m[:, :n], m[:, n:])
        columns = []
        for j in range(2 * n):
            shifted = m.copy()
            shifted[:, j] += ε
            columns.append((_vector_field(H, τ, shifted[:, :n], shifted[:, n:]) - f0) / ε)
        Df = np.stack(columns, axis=-1)
        jacobian = eye - 0.5 * dt * Df
        z1[active] -= np.linalg.solve(jacobian, G[active][..., None])[..., 0]

    raise AssertionError("unreachable")


def integrate(
    H: HamiltonianSpec,
    q: np.ndarray,
    p: np.ndarray,
    cfg: FlowConfig,
    t0: float = 0.0,
    duration: float = 1.0,
    record: bool = False,
) -> Segment:
    """
    Flows a batch of points, q and p of shape (B, n), from t0 over `duration`.

    The action accumulates p̄·Δq − H(t̄, z̄)·dt per substep at midpoints, which is
    exact for Hamiltonians of p alone. With `record`, every substep is kept.
    """
    if cfg.integrator is Integrator.SPLITTING_SEPARABLE and not H.is_separable:
        raise IncompatibleIntegrator(f"{H.family.value} Hamiltonian is not of the form T(p) + V(t, q)")

    q = np.array(q, dtype=float, ndmin=2)
    p = np.array(p, dtype=float, ndmin=2)
    steps = max(1, math.ceil(duration * cfg.substeps - 1e-9))
    dt = duration / steps
    action = np.zeros(q.shape[0])
    times, qs, ps = [t0], [q], [p]

    for i in range(steps):
        t = t0 + i * dt
        if cfg.integrator is Integrator.SPLITTING_SEPARABLE:
            q1, p1 = _strang_step(H, t, dt, q, p)
        else:
            q1, p1 = _midpoint_step(H, t, dt, q, p, cfg)
        q̄, p̄ = 0.5 * (q + q1), 0.5 * (p + p1)
        action += np.sum(p̄ * (q1 - q), axis=-1) - dt * H(t + 0.5 * dt, q̄, p̄)
        q, p = q1, p1
        if record:
            times.append(t0 + (i + 1) * dt)
            qs.append(q)
            ps.append(p)

    if not record:
        times, qs, ps = [t0, t0 + duration], [qs[0], q], [ps[0], p]
    return Segment(np.array(times), np.stack(qs), np.stack(ps), action)


def flow_map(
    H: HamiltonianSpec,
    q: np.ndarray,
    p: np.ndarray,
    cfg: FlowConfig,
    t0: float = 0.0,
    duration: float = 1.0,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Endpoints and actions of a batch flowed over [t0, t0 + duration]."""
    segment = integrate(H, q, p, cfg, t0, duration)
    return segment.q, segment.p, segment.action


def time_one_map(H: HamiltonianSpec, z: PhasePoint, cfg: FlowConfig) -> PhasePoint:
    q, p, _ = flow_map(H, z.q[None], z.p[None], cfg)
    return PhasePoint(q[0], p[0])


def jacobian_determinant(H: HamiltonianSpec, zs: Sequence[PhasePoint], cfg: FlowConfig, ε: float = 1e-6) -> np.ndarray:
    """det DΦ¹ by central differences at each point."""
    n = zs[0].n
    base = np.stack([np.concatenate([z.q, z.p]) for z in zs])
    columns = []
    for j in range(2 * n):
        step = np.zeros(2 * n)
        step[j] = ε
        plus, minus = base + step, base - step
        qp, pp, _ = flow_map(H, plus[:, :n], plus[:, n:], cfg)
        qm, pm, _ = flow_map(H, minus[:, :n], minus[:, n:], cfg)
        columns.append((np.concatenate([qp, pp], axis=-1) - np.concatenate([qm, pm], axis=-1)) / (2 * ε))
    return np.linalg.det(np.stack(columns, axis=-1))
