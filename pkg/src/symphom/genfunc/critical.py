import logging
from itertools import product
from typing import List, Optional

import numpy as np
from attrs import define
from scipy.optimize import brentq, root

from ..dynamics import FlowConfig, HamiltonianSpec, PhasePoint, flow_map

logger = logging.getLogger(__name__)


@define(frozen=True, eq=False)
class CriticalOrbit:
    """
    An orbit with p(0) = p(k) = y, i.e. a critical point x of F_{k,y}.

    `value` is the critical value per unit time, ⟨y, ν⟩ − average action.
    """

    x: np.ndarray
    y: np.ndarray
    k: int
    value: float
    rotation: np.ndarray
    average_action: float
    degenerate: bool = False

    @property
    def start(self) -> PhasePoint:
        return PhasePoint(self.x, self.y)


def _orbit(H: HamiltonianSpec, k: int, x: np.ndarray, y: np.ndarray, cfg: FlowConfig, degenerate: bool) -> CriticalOrbit:
    Q, _, action = flow_map(H, x[None], y[None], cfg, duration=float(k))
    displacement = Q[0] - x
    value = (float(y @ displacement) - float(action[0])) / k
    return CriticalOrbit(x % 1.0, y, k, value, displacement / k, float(action[0]) / k, degenerate)


def fiber_critical_orbits(
    H: HamiltonianSpec,
    k: int,
    y: object,
    cfg: Optional[FlowConfig] = None,
    nodes: int = 256,
    tol: float = 1e-11,
) -> List[CriticalOrbit]:
    """
    All x with P_k(x, y) = y, by sign changes and Brent refinement (n = 1) or root
    finding from grid seeds (n = 2), sorted by critical value, highest first.

    When the momentum returns everywhere (H independent of q) the whole torus is
    critical; one orbit at x = 0 is reported, flagged degenerate.
    """
    cfg = cfg or FlowConfig.init(H)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    n = H.n

    def mismatch(x: np.ndarray) -> np.ndarray:
        _, P, _ = flow_map(H, x.reshape(-1, n), np.broadcast_to(y, (x.size // n, n)), cfg, duration=float(k))
        return P - y

    if n == 1:
        xs = np.arange(nodes) / nodes
        g = mismatch(xs[:, None])[:, 0]
        if np.abs(g).max() <= tol:
            return [_orbit(H, k, np.zeros(1), y, cfg, degenerate=True)]
        roots = list(xs[np.abs(g) <= tol])
        following = np.roll(g, -1)
        for i in np.flatnonzero((np.abs(g) > tol) & (np.abs(following) > tol) & (np.sign(g) != np.sign(following))):
            a = xs[i]
            b = a + 1.0 / nodes
            roots.append(brentq(lambda s: float(mismatch(np.array([s]))[0]), a, b, xtol=1e-13))
        found = [np.array([r]) % 1.0 for r in roots]
    else:
        side = 8
        found = []
        for seed in product(np.arange(side) / side, repeat=n):
            solution = root(lambda s: mismatch(np.asarray(s)).ravel(), np.array(seed), tol=tol)
            if solution.success and np.abs(mismatch(solution.x)).max() <= 1e-9:
                found.append(solution.x % 1.0)

    unique: List[np.ndarray] = []
    for x in found:
        gap = [np.abs(((x - other) + 0.5) % 1.0 - 0.5).max() for other in unique]
        if not gap or min(gap) > 1e-9:
            unique.append(x)
    orbits = [_orbit(H, k, x, y, cfg, degenerate=False) for x in unique]
    logger.debug("%d fiber-critical orbits at y=%s, k=%d", len(orbits), y, k)
    return sorted(orbits, key=lambda o: -o.value)
