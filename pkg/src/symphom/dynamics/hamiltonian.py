import logging
from enum import Enum
from os import PathLike
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import attrs
import numpy as np
from attrs import define, field
from scipy.interpolate import RegularGridInterpolator

from ..exceptions import UnsupportedCoercive
from .profiles import Profile, ProfileKind, bump, smoothstep

logger = logging.getLogger(__name__)

Evaluation = Tuple[np.ndarray, np.ndarray, np.ndarray]


class Family(str, Enum):
    ZERO = "zero"
    INTEGRABLE = "integrable"
    MECHANICAL_PENDULUM = "mechanical_pendulum"
    SEPARABLE_NONCONVEX = "separable_nonconvex"
    LOCALIZED_BUMP = "localized_bump"
    CUSTOM_GRID = "custom_grid"


def modulation(t: np.ndarray) -> np.ndarray:
    return 1.0 + 0.5 * np.sin(2.0 * np.pi * t)


def _wrap(x: np.ndarray) -> np.ndarray:
    """Signed representative of x mod 1 in [−½, ½)."""
    return (x + 0.5) % 1.0 - 0.5


@define(frozen=True, eq=False)
class GridSamples:
    """H(t, q, p) sampled on a tensor grid for n = 1, periodic of period 1 in t and q."""

    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    values: np.ndarray
    _interpolator: RegularGridInterpolator = field(init=False, repr=False)

    @_interpolator.default
    def _build_interpolator(self) -> RegularGridInterpolator:
        pad = 3
        padded = np.pad(self.values, ((pad, pad), (pad, pad), (0, 0)), mode="wrap")

        def extend(axis: np.ndarray) -> np.ndarray:
            index = np.arange(-pad, axis.size + pad)
            return axis[index % axis.size] + np.floor_divide(index, axis.size)

        return RegularGridInterpolator(
            (extend(self.t), extend(self.q), self.p),
            padded,
            method="cubic",
            bounds_error=False,
            fill_value=0.0,
        )

    def evaluate(self, t: np.ndarray, q: np.ndarray, p: np.ndarray) -> Evaluation:
        ε = 1e-6
        t = np.broadcast_to(np.asarray(t, dtype=float) % 1.0, q.shape[:-1])
        q1, p1 = q[..., 0] % 1.0, p[..., 0]

        def at(dq: float = 0.0, dp: float = 0.0) -> np.ndarray:
            return self._interpolator(np.stack([t, q1 + dq, p1 + dp], axis=-1))

        value = at()
        dq = (at(dq=ε) - at(dq=-ε)) / (2.0 * ε)
        dp = (at(dp=ε) - at(dp=-ε)) / (2.0 * ε)
        return value, dq[..., None], dp[..., None]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "t": self.t.tolist(),
            "q": self.q.tolist(),
            "p": self.p.tolist(),
            "values": self.values.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GridSamples":
        return cls(*(np.asarray(data[key], dtype=float) for key in ("t", "q", "p", "values")))

    @classmethod
    def from_csv(cls, path: Union[str, PathLike]) -> "GridSamples":
        """Reads rows `t,q,p,H` covering a full tensor grid with t, q in [0, 1)."""
        data = np.genfromtxt(path, delimiter=",", names=True)
        t, q, p = (np.unique(data[column]) for column in ("t", "q", "p"))
        if t.max() >= 1.0 or q.max() >= 1.0:
            raise ValueError("t and q nodes must lie in [0, 1); the period is implied")
        values = np.full((t.size, q.size, p.size), np.nan)
        index = tuple(np.searchsorted(axis, data[c]) for axis, c in zip((t, q, p), "tqp"))
        values[index] = data["H"]
        if np.isnan(values).any():
            raise ValueError(f"{path} does not cover a full (t, q, p) grid")
        return cls(t, q, p, values)


@define(frozen=True, eq=False)
class HamiltonianSpec:
    """
    A Hamiltonian H(t, q, p) on S¹ × T*Tⁿ.

    The family term h is multiplied by `scale`, cut off smoothly in |p| over
    [support_radius − margin, support_radius] when compactly supported, composed
    with the shear (q, p) ↦ (q, p + shear·sin 2πq), and shifted by `offset`.
    Arrays q and p have shape (..., n); t broadcasts against their leading shape.
    """

    family: Family = field(converter=Family)
    n: int = 1
    time_dependent: bool = False
    support_radius: Optional[float] = None
    coercive: bool = False
    scale: float = 1.0
    margin: float = 1.0
    shear: float = 0.0
    offset: float = 0.0
    amplitude: float = 0.0
    p_profile: Optional[Profile] = None
    q_profile: Optional[Profile] = None
    centre_q: Tuple[float, ...] = field(default=(), converter=lambda c: tuple(map(float, c)))
    centre_p: Tuple[float, ...] = field(default=(), converter=lambda c: tuple(map(float, c)))
    radius: float = 0.25
    grid: Optional[GridSamples] = None

    def __attrs_post_init__(self) -> None:
        if self.n not in (1, 2):
            raise ValueError(f"torus dimension must be 1 or 2, got {self.n}")
        if (self.support_radius is not None) == self.coercive:
            raise ValueError("exactly one of support_radius and coercive must be set")
        if self.support_radius is not None and not 0.0 < self.margin <= self.support_radius:
            raise ValueError(f"need 0 < margin <= support_radius, got {self.margin}, {self.support_radius}")
        if self.family is Family.INTEGRABLE and self.p_profile is None:
            raise ValueError("integrable family needs a p_profile")
        if self.family is Family.SEPARABLE_NONCONVEX and (self.p_profile is None or self.q_profile is None):
            raise ValueError("separable family needs p_profile and q_profile")
        if self.family is Family.LOCALIZED_BUMP and not 0.0 < self.radius < 0.5:
            raise ValueError(f"bump radius must lie in (0, 1/2), got {self.radius}")
        if self.family is Family.CUSTOM_GRID and (self.grid is None or self.n != 1):
            raise ValueError("custom grid family needs grid samples and n = 1")

    @property
    def is_separable(self) -> bool:
        """True when H = T(p) + V(t, q), the form the splitting integrator needs."""
        if self.shear != 0.0:
            return False
        if self.family in (Family.ZERO, Family.INTEGRABLE):
            return True
        return self.family in (Family.MECHANICAL_PENDULUM, Family.SEPARABLE_NONCONVEX) and self.coercive

    @property
    def is_tonelli(self) -> bool:
        """True when H is coercive with a positive definite, q-independent fiber Hessian."""
        if not self.coercive or self.scale <= 0.0:
            return False
        if self.family is Family.MECHANICAL_PENDULUM:
            return True
        profile = self.p_profile
        return (
            self.family in (Family.INTEGRABLE, Family.SEPARABLE_NONCONVEX)
            and profile is not None
            and profile.kind is ProfileKind.QUADRATIC
            and profile.coefficients[0] > 0.0
        )

    @property
    def is_autonomous(self) -> bool:
        return not self.time_dependent and self.family is not Family.CUSTOM_GRID

    @property
    def outer_radius(self) -> float:
        """Radius in |p| beyond which the flow is the identity."""
        if self.support_radius is None:
            raise UnsupportedCoercive("coercive Hamiltonian has no compact support")
        return self.support_radius + abs(self.shear) * np.sqrt(self.n)

    def __call__(self, t: Any, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        return self.evaluate(t, q, p)[0]

    def gradient(self, t: Any, q: np.ndarray, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        _, dq, dp = self.evaluate(t, q, p)
        return dq, dp

    def evaluate(self, t: Any, q: np.ndarray, p: np.ndarray) -> Evaluation:
        """(H, ∂H/∂q, ∂H/∂p) at the given points."""
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        t = np.asarray(t, dtype=float)

        if self.shear != 0.0:
            twist = 2.0 * np.pi * self.shear * np.cos(2.0 * np.pi * q)
            p = p + self.shear * np.sin(2.0 * np.pi * q)

        h, hq, hp = self._family_term(t, q, p)

        if self.support_radius is not None:
            R, w = self.support_radius, self.margin
            r = np.linalg.norm(p, axis=-1)
            step, slope = smoothstep((r - (R - w)) / w)
            outside = r >= R
            χ = np.where(outside, 0.0, 1.0 - step)
            dχ = np.where(outside, 0.0, -slope / w)
            unit = p / np.where(r > 0.0, r, 1.0)[..., None]
            hp = χ[..., None] * hp + (dχ * h)[..., None] * unit
            hq = χ[..., None] * hq
            h = χ * h

        h, hq, hp = self.scale * h, self.scale * hq, self.scale * hp
        if self.shear != 0.0:
            hq = hq + hp * twist
        return h + self.offset, hq, hp

    def _family_term(self, t: np.ndarray, q: np.ndarray, p: np.ndarray) -> Evaluation:
        lead = q.shape[:-1]
        m = np.broadcast_to(modulation(t), lead) if self.time_dependent else np.ones(lead)

        if self.family is Family.ZERO:
            return np.zeros(lead), np.zeros_like(q), np.zeros_like(p)

        if self.family is Family.INTEGRABLE:
            assert self.p_profile is not None
            T, dT = self.p_profile.evaluate(p)
            return T, np.zeros_like(q), dT

        if self.family is Family.MECHANICAL_PENDULUM:
            a = self.amplitude
            V = a * np.cos(2.0 * np.pi * q).sum(axis=-1)
            dV = -2.0 * np.pi * a * np.sin(2.0 * np.pi * q)
            return 0.5 * np.sum(p * p, axis=-1) + m * V, m[..., None] * dV, p.copy()

        if self.family is Family.SEPARABLE_NONCONVEX:
            assert self.p_profile is not None and self.q_profile is not None
            T, dT = self.p_profile.evaluate(p)
            V, dV = self.q_profile.evaluate(q)
            return T + m * V, m[..., None] * dV, dT

        if self.family is Family.LOCALIZED_BUMP:
            q0 = np.asarray(self.centre_q or (0.0,) * self.n)
            p0 = np.asarray(self.centre_p or (0.0,) * self.n)
            δq, δp = _wrap(q - q0), p - p0
            d = np.sqrt(np.sum(δq * δq, axis=-1) + np.sum(δp * δp, axis=-1))
            β, dβ = bump(d / self.radius)
            gain = self.amplitude * m
            radial = gain * dβ / self.radius / np.where(d > 0.0, d, 1.0)
            return gain * β, radial[..., None] * δq, radial[..., None] * δp

        assert self.grid is not None
        return self.grid.evaluate(t, q, p)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            a.name: getattr(self, a.name)
            for a in attrs.fields(HamiltonianSpec)
            if a.name not in ("family", "p_profile", "q_profile", "grid", "centre_q", "centre_p")
        }
        data["family"] = self.family.value
        data["centre_q"] = list(self.centre_q)
        data["centre_p"] = list(self.centre_p)
        for name in ("p_profile", "q_profile", "grid"):
            value = getattr(self, name)
            data[name] = value.to_dict() if value is not None else None
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "HamiltonianSpec":
        known = {a.name for a in attrs.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown Hamiltonian fields: {sorted(unknown)}")
        kwargs = dict(data)
        for name in ("p_profile", "q_profile"):
            if kwargs.get(name) is not None:
                kwargs[name] = Profile.from_dict(kwargs[name])
        if kwargs.get("grid") is not None:
            kwargs["grid"] = GridSamples.from_dict(kwargs["grid"])
        return cls(**kwargs)

    @classmethod
    def zero(cls, n: int = 1) -> "HamiltonianSpec":
        return cls(Family.ZERO, n=n, support_radius=1.0)

    @classmethod
    def integrable(
        cls, profile: Profile, n: int = 1, support_radius: Optional[float] = None, margin: float = 1.0
    ) -> "HamiltonianSpec":
        return cls(
            Family.INTEGRABLE,
            n=n,
            p_profile=profile,
            support_radius=support_radius,
            coercive=support_radius is None,
            margin=margin,
        )

    @classmethod
    def pendulum(cls, amplitude: float, n: int = 1, time_dependent: bool = False) -> "HamiltonianSpec":
        return cls(
            Family.MECHANICAL_PENDULUM, n=n, amplitude=amplitude, coercive=True, time_dependent=time_dependent
        )

    @classmethod
    def localized_bump(
        cls,
        amplitude: float,
        radius: float = 0.25,
        centre_q: Tuple[float, ...] = (0.0,),
        centre_p: Tuple[float, ...] = (0.0,),
        time_dependent: bool = False,
    ) -> "HamiltonianSpec":
        n = len(centre_q)
        reach = float(np.linalg.norm(centre_p)) + radius
        return cls(
            Family.LOCALIZED_BUMP,
            n=n,
            amplitude=amplitude,
            radius=radius,
            centre_q=centre_q,
            centre_p=centre_p,
            time_dependent=time_dependent,
            support_radius=reach + 1.0,
        )


def truncate_coercive(H: HamiltonianSpec, R: float) -> HamiltonianSpec:
    """Compactly supported spec agreeing with H on |p| ≤ R, zero for |p| ≥ R + margin."""
    radius = R + H.margin
    if H.support_radius is not None:
        radius = min(radius, H.support_radius)
    logger.debug("truncating %s at |p| = %g (support %g)", H.family.value, R, radius)
    return attrs.evolve(H, support_radius=radius, coercive=False)


def conjugate_by_shear(H: HamiltonianSpec, s: float) -> HamiltonianSpec:
    """H ∘ ψ for the exact symplectic shear ψ(q, p) = (q, p + s·sin 2πq)."""
    return attrs.evolve(H, shear=H.shear + s)


def shifted(H: HamiltonianSpec, c: float) -> HamiltonianSpec:
    return attrs.evolve(H, offset=H.offset + c)


def negated(H: HamiltonianSpec) -> HamiltonianSpec:
    return attrs.evolve(H, scale=-H.scale, offset=-H.offset)
