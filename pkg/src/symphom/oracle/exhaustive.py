import logging
from typing import Dict, Optional, Tuple

import numpy as np

from .._data_structures import CubicalGrid
from .._data_structures.gf2 import left_nullspace, rank
from ..exceptions import ClassNotFound, TooLarge
from ..genfunc import GeneratingLandscape
from ..selector import CohomologyClass

logger = logging.getLogger(__name__)

MAX_CELLS = 12**3
MAX_VARIABLES = 3


class _RelativeComplex:
    """Chains of K modulo the subcomplex A of cells at or below the negative level."""

    def __init__(self, grid: CubicalGrid, level: float):
        self.grid = grid
        self.dims = grid.dimensions()
        self.values = grid.values()
        self.outside = self.values > level
        self._boundaries: Dict[int, Tuple[np.ndarray, int]] = {}

    def cells(self, degree: int, threshold: float = np.inf) -> np.ndarray:
        return np.flatnonzero((self.dims == degree) & self.outside & (self.values <= threshold))

    def image_rank(self, degree: int, threshold: float) -> int:
        """Rank of H_d(K_c, A) → H_d(K, A)."""
        chains = self.cells(degree)
        if chains.size == 0:
            return 0
        column = {cell: j for j, cell in enumerate(chains)}
        if degree not in self._boundaries:
            matrix = self.grid.boundary_matrix(self.cells(degree + 1), chains)
            self._boundaries[degree] = matrix, rank(matrix)
        boundaries, base = self._boundaries[degree]

        support = self.cells(degree, threshold)
        if support.size == 0:
            return 0
        cycles = left_nullspace(self.grid.boundary_matrix(support, self.cells(degree - 1)))
        embedded = np.zeros((len(cycles), len(chains)), dtype=bool)
        embedded[:, [column[c] for c in support]] = cycles
        return rank(np.vstack([boundaries, embedded])) - base


def brute_force_minimax(L: GeneratingLandscape, cls: CohomologyClass) -> float:
    """
    c(cls, L) from the relative homology of every sublevel complex.

    The birth of a class is the least filtration value at which the image of
    H_d(L^c, L^level) in H_d(L, L^level) reaches it: the first nonzero rank for
    the unit class, the full rank for the fundamental one. Ranks are monotone in
    c, so a binary search over the distinct cell values finds both.
    """
    if L.free_dimension > MAX_VARIABLES or L.values.size > MAX_CELLS:
        raise TooLarge(f"{L.free_dimension} variables on {L.values.size} cells; the oracle stops at 12³")
    cls = CohomologyClass(cls)
    reported = cls.degree(sum(L.periodic)) + L.negative_index
    degree = reported - L.eliminated_index

    complex_ = _RelativeComplex(CubicalGrid.init(L.values, L.periodic), L.negative_level)
    total = complex_.image_rank(degree, np.inf)
    if total == 0:
        raise ClassNotFound(f"no relative class in degree {reported}")
    target = 1 if cls is CohomologyClass.UNIT else total

    levels = np.unique(complex_.values[complex_.outside])
    lo, hi = 0, len(levels) - 1
    found: Optional[float] = None
    while lo <= hi:
        mid = (lo + hi) // 2
        if complex_.image_rank(degree, levels[mid]) >= target:
            found, hi = float(levels[mid]), mid - 1
        else:
            lo = mid + 1
    assert found is not None
    logger.debug("exhaustive minimax in degree %d: %.6g", reported, found)
    return found
