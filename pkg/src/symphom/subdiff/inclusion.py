import logging
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from attrs import define

from .._data_structures import SampledFunction
from ..dynamics import FlowConfig, HamiltonianSpec
from ..exceptions import ConstantFunction
from ..genfunc import fiber_critical_orbits
from ..selector import SelectorTable, strong_critical_values
from .differentials import adjacent_gradients, clarke_pl
from .polytope import SubdiffPolytope

logger = logging.getLogger(__name__)


@define(frozen=True)
class Certificate:
    α: Tuple[float, ...]
    inside: bool  # ‖α‖ within the certified ball
    certified: bool
    witness: Optional[Tuple[float, ...]]

    def to_row(self) -> Tuple[Any, ...]:
        witness = self.witness or (np.nan,) * len(self.α)
        return (*self.α, int(self.certified), *witness)


@define(frozen=True, eq=False)
class BallReport:
    radius: float
    certificates: List[Certificate]

    @property
    def failures(self) -> List[Certificate]:
        """Uncertified covectors inside the ball; covectors outside it are not owed."""
        return [c for c in self.certificates if c.inside and not c.certified]

    @property
    def outside(self) -> List[Certificate]:
        return [c for c in self.certificates if not c.inside]


def _certify(f: SampledFunction, α: np.ndarray) -> Optional[Tuple[float, ...]]:
    """An interior strong critical point of f − ⟨α, ·⟩, isolated ones first, lowest value first."""
    found = sorted(strong_critical_values(f.tilted(α)), key=lambda c: (not c.isolated, c.value))
    if not found:
        return None
    index = tuple(int(i) for i in found[0].witnesses[0])
    return tuple(float(c) for c in f.point(index))


def ball_inclusion_check(f: SampledFunction, resolution: int = 9, extra: Sequence[Any] = ()) -> BallReport:
    """
    For every α on a grid of the ball of radius ‖f‖/4, finds an interior strong
    critical point x of f − ⟨α, ·⟩, hence α ∈ d_s f(x). `extra` covectors are
    checked and reported too, flagged outside when they leave the ball.
    """
    if np.ptp(f.values) == 0.0:
        raise ConstantFunction("the ball of a constant function is a point; nothing to certify")
    radius = 0.25 * f.sup_norm()
    side = np.linspace(-radius, radius, resolution)
    grid = np.stack(np.meshgrid(*([side] * f.n), indexing="ij"), axis=-1).reshape(-1, f.n)
    grid = grid[np.linalg.norm(grid, axis=1) <= radius * (1.0 + 1e-12)]
    covectors = list(grid) + [np.atleast_1d(np.asarray(α, dtype=float)) for α in extra]

    certificates = []
    for α in covectors:
        witness = _certify(f, α)
        inside = bool(np.linalg.norm(α) <= radius * (1.0 + 1e-12))
        certificates.append(Certificate(tuple(map(float, α)), inside, witness is not None, witness))
    report = BallReport(radius, certificates)
    if report.failures:
        logger.warning("%d covectors in the ball of radius %.3g were not certified", len(report.failures), radius)
    return report


@define(frozen=True, eq=False)
class HullInclusion:
    p: np.ndarray
    clarke: SubdiffPolytope
    rotations: SubdiffPolytope
    tolerance: float
    excess: float

    @property
    def holds(self) -> bool:
        return self.excess <= self.tolerance


def rotation_hull_inclusion(
    table: SelectorTable,
    p: Any,
    H: HamiltonianSpec,
    cfg: Optional[FlowConfig] = None,
    tolerance: Optional[float] = None,
) -> HullInclusion:
    """
    Checks that the Clarke differential of h_k at p lies in the convex hull of the
    rotation vectors of the orbits with p(0) = p(k) = p.

    The default tolerance is the spread of the adjacent gradients: one grid step
    times a local Lipschitz bound of the gradient.
    """
    f = table.as_sampled()
    clarke = clarke_pl(f, p)
    node = clarke.at
    orbits = fiber_critical_orbits(H, table.k, node, cfg)
    rotations = SubdiffPolytope.init([o.rotation for o in orbits], node)
    if tolerance is None:
        gradients = adjacent_gradients(f, f.node_index(node))
        tolerance = float(np.ptp(gradients, axis=0).max()) + 1e-9
    excess = max(rotations.distance(v) for v in clarke.vertices)
    logger.debug("rotation hull at p=%s: excess %.2e against tolerance %.2e", node, excess, tolerance)
    return HullInclusion(node, clarke, rotations, tolerance, excess)
