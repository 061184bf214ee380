import logging
from typing import Any, Dict, Optional, Protocol, Sequence, Tuple

import numpy as np
from attrs import define
from scipy.integrate import trapezoid
from scipy.spatial.distance import directed_hausdorff

from ..dynamics import HamiltonianSpec, LiftedOrbit, rotation_vector
from ..dynamics.invariants import Integrand, phase_space_integral
from ..exceptions import EmptyInput

logger = logging.getLogger(__name__)

OBSERVABLES = 32
OBSERVABLE_SEED = 0


class Measure(Protocol):
    def integrate(self, fn: Integrand) -> np.ndarray:
        """∫ fn(t, q, p) dμ, with fn mapping q, p of shape (N, n) to (N,) or (N, m)."""
        ...


def _time_average(fn: Integrand, times: np.ndarray, qs: np.ndarray, ps: np.ndarray) -> np.ndarray:
    values = np.asarray(fn(times, qs, ps), dtype=float)
    return trapezoid(values, x=times, axis=0) / (times[-1] - times[0])


def observables(n: int) -> Integrand:
    """A fixed dictionary of trigonometric test functions bounded by 1."""
    rng = np.random.default_rng(OBSERVABLE_SEED)
    modes = rng.integers(-3, 4, size=(OBSERVABLES, n))
    frequencies = rng.uniform(-2.0, 2.0, size=(OBSERVABLES, n))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=OBSERVABLES)

    def fn(t: np.ndarray, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        return np.cos(2.0 * np.pi * q @ modes.T + p @ frequencies.T + phases)

    return fn


def _unit_drift(orbit: LiftedOrbit, fn: Integrand) -> np.ndarray:
    """(∫_k^{k+1} − ∫_0^1) fn along the orbit, per observable."""
    if orbit.lookahead is None:
        raise ValueError("orbit measures need pieces recorded with a one-unit look-ahead")
    ahead = orbit.lookahead
    end = int(np.searchsorted(orbit.times, orbit.times[0] + 1.0 + 1e-9))
    head = fn(orbit.times[:end], orbit.qs[:end], orbit.ps[:end])
    tail = fn(ahead.times, ahead.qs[:, 0], ahead.ps[:, 0])
    return trapezoid(tail, x=ahead.times, axis=0) - trapezoid(head, x=orbit.times[:end], axis=0)


@define(frozen=True, eq=False)
class OrbitMeasure:
    """
    A convex combination of normalized orbit segments (1/k)[γ_k].

    `invariance_defect` is the largest discrepancy |∫ f∘Φ¹ dμ − ∫ f dμ| over the
    observable dictionary; for a single k-segment it is at most 2/k.
    """

    pieces: Tuple[LiftedOrbit, ...]
    weights: np.ndarray
    rotation: np.ndarray
    avg_action: float
    invariance_defect: float

    @property
    def n(self) -> int:
        return self.pieces[0].n

    def integrate(self, fn: Integrand) -> np.ndarray:
        return sum(w * _time_average(fn, o.times, o.qs, o.ps) for o, w in zip(self.pieces, self.weights))

    def support_points(self) -> np.ndarray:
        """(q, p) samples of every piece with positive weight, shape (N, 2n)."""
        return np.concatenate(
            [np.concatenate([o.qs, o.ps], axis=-1) for o, w in zip(self.pieces, self.weights) if w > 0.0]
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pieces": [
                {
                    "start_q": o.qs[0].tolist(),
                    "start_p": o.ps[0].tolist(),
                    "horizon": o.horizon,
                    "rotation": rotation_vector(o).tolist(),
                    "average_action": o.average_action,
                }
                for o in self.pieces
            ],
            "weights": self.weights.tolist(),
            "rotation": self.rotation.tolist(),
            "average_action": self.avg_action,
            "invariance_defect": self.invariance_defect,
        }


def orbit_measure(orbits: Sequence[LiftedOrbit], weights: Optional[Sequence[float]] = None) -> OrbitMeasure:
    if not orbits:
        raise EmptyInput("an orbit measure needs at least one orbit")
    w = np.full(len(orbits), 1.0 / len(orbits)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (len(orbits),) or (w < 0.0).any() or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must be {len(orbits)} nonnegative numbers summing to 1, got {w}")

    rotation = sum(wi * rotation_vector(o) for o, wi in zip(orbits, w))
    avg_action = float(sum(wi * o.average_action for o, wi in zip(orbits, w)))
    fn = observables(orbits[0].n)
    drift = sum(wi * _unit_drift(o, fn) / o.horizon for o, wi in zip(orbits, w))
    defect = float(np.abs(drift).max())
    logger.debug("orbit measure of %d pieces: rotation %s, defect %.2e", len(orbits), rotation, defect)
    return OrbitMeasure(tuple(orbits), w, np.atleast_1d(rotation), avg_action, defect)


@define(frozen=True)
class LiouvilleMeasure:
    """χ·ωⁿ dt: the symplectic volume restricted to the momentum box holding supp H."""

    H: HamiltonianSpec
    q_nodes: Optional[int] = None
    p_nodes: Optional[int] = None

    def integrate(self, fn: Integrand) -> np.ndarray:
        return phase_space_integral(self.H, fn, self.q_nodes, self.p_nodes)


def rotation_of_measure(μ: Measure, H: HamiltonianSpec) -> np.ndarray:
    """ρ(μ) = ∫ ∂H/∂p dμ."""
    return np.atleast_1d(μ.integrate(lambda t, q, p: H.gradient(t, q, p)[1]))


def average_action(μ: Measure, H: HamiltonianSpec) -> float:
    """𝒜(μ) = ∫ ⟨p, ∂H/∂p⟩ − H dμ."""

    def integrand(t: np.ndarray, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        h, _, hp = H.evaluate(t, q, p)
        return np.sum(p * hp, axis=-1) - h

    return float(μ.integrate(integrand))


def support_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two sampled supports."""
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])
