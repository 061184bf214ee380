from enum import Enum
from typing import Optional

from ..exceptions import ClassNotFound
from ..genfunc import GeneratingLandscape
from .persistence import PersistenceDiagram, sublevel_persistence


class CohomologyClass(str, Enum):
    FUNDAMENTAL = "mu"
    UNIT = "1"

    def degree(self, base_dimension: int) -> int:
        return base_dimension if self is CohomologyClass.FUNDAMENTAL else 0


def minimax(
    L: GeneratingLandscape, cls: CohomologyClass, diagram: Optional[PersistenceDiagram] = None
) -> float:
    """
    c(cls, L): birth of the essential relative class in degree cls + negative_index.

    The base is the torus of the periodic variables, so on a closed torus without
    fibers c(μ, f) = max f and c(1, f) = min f.
    """
    cls = CohomologyClass(cls)
    diagram = diagram or sublevel_persistence(L)
    degree = cls.degree(sum(L.periodic)) + L.negative_index
    births = diagram.essential(degree)
    if births.size == 0:
        raise ClassNotFound(
            f"no essential class in degree {degree} (negative index {L.negative_index}); "
            "check the index or enlarge the fiber box"
        )
    return float(births.max() if cls is CohomologyClass.FUNDAMENTAL else births.min())
