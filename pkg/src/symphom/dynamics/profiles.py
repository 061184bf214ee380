from enum import Enum
from typing import Any, Dict, Mapping, Tuple

import numpy as np
from attrs import define, field
from numpy.polynomial import polynomial


class ProfileKind(str, Enum):
    QUADRATIC = "quadratic"
    BUMP = "bump"
    POLYNOMIAL = "polynomial"
    COSINE = "cosine"


def bump(s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """β(s) = exp(1 − 1/(1 − s²)) on |s| < 1, zero elsewhere, with β′."""
    inside = np.abs(s) < 1.0
    u = np.where(inside, 1.0 - s * s, 1.0)
    β = np.where(inside, np.exp(1.0 - 1.0 / u), 0.0)
    dβ = np.where(inside, β * (-2.0 * s / (u * u)), 0.0)
    return β, dβ


def smoothstep(s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Quintic C² step from 0 (s ≤ 0) to 1 (s ≥ 1), with its derivative."""
    s = np.clip(s, 0.0, 1.0)
    value = s**3 * (10.0 - 15.0 * s + 6.0 * s * s)
    slope = 30.0 * s * s * (1.0 - s) ** 2
    return value, slope


@define(frozen=True)
class Profile:
    """
    Scalar function of a vector argument x with shape (..., n).

    - QUADRATIC: c·|x|²/2 with c = coefficients[0]
    - BUMP: c·β(|x|/width)
    - POLYNOMIAL: Σ_i Σ_j coefficients[j]·x_i^j
    - COSINE: Σ_i Σ_{j≥1} coefficients[j−1]·cos(2πj·x_i)
    """

    kind: ProfileKind = field(converter=ProfileKind)
    coefficients: Tuple[float, ...] = field(default=(1.0,), converter=lambda c: tuple(map(float, c)))
    width: float = 1.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.evaluate(x)[0]

    def evaluate(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        c = np.asarray(self.coefficients)
        if self.kind is ProfileKind.QUADRATIC:
            return 0.5 * c[0] * np.sum(x * x, axis=-1), c[0] * x
        if self.kind is ProfileKind.BUMP:
            r = np.linalg.norm(x, axis=-1)
            β, dβ = bump(r / self.width)
            safe = np.where(r > 0.0, r, 1.0)
            unit = np.where((r > 0.0)[..., None], x / safe[..., None], 0.0)
            return c[0] * β, (c[0] * dβ / self.width)[..., None] * unit
        if self.kind is ProfileKind.POLYNOMIAL:
            value = polynomial.polyval(x, c).sum(axis=-1)
            return value, polynomial.polyval(x, polynomial.polyder(c)) if c.size > 1 else np.zeros_like(x)
        j = np.arange(1, c.size + 1)
        phase = 2.0 * np.pi * x[..., None] * j
        value = (c * np.cos(phase)).sum(axis=(-1, -2))
        return value, -(c * 2.0 * np.pi * j * np.sin(phase)).sum(axis=-1)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "coefficients": list(self.coefficients), "width": self.width}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Profile":
        return cls(data["kind"], data.get("coefficients", (1.0,)), float(data.get("width", 1.0)))
