import logging
from typing import Iterable, List, Sequence, Tuple

import gudhi
import numpy as np
from attrs import define

from ..exceptions import GridBudgetExceeded
from ..genfunc import GeneratingLandscape

logger = logging.getLogger(__name__)

MAX_FREE_DIMENSION = 3

Bar = Tuple[int, float, float]


def cubical_barcode(values: np.ndarray, periodic: Sequence[bool]) -> List[Bar]:
    """
    Absolute ℤ/2 barcode of the sublevel filtration with the samples as top cells.

    Lower-dimensional cells enter with the least adjacent sample.
    """
    complex_ = gudhi.PeriodicCubicalComplex(
        dimensions=list(values.shape),
        top_dimensional_cells=np.asarray(values, dtype=float).flatten(order="F"),
        periodic_dimensions=[bool(w) for w in periodic],
    )
    bars = complex_.persistence(homology_coeff_field=2, min_persistence=0.0)
    return [(int(d), float(b), float(δ)) for d, (b, δ) in bars if δ > b]


def relative_bars(bars: Iterable[Bar], level: float) -> List[Bar]:
    """
    Barcode of the pair (f^c, f^level) from the absolute one, by the exact sequence
    of the pair: bars born above `level` persist unchanged, and a bar born at or
    below it that dies at δ > level turns into an essential class one degree up,
    born at δ.
    """
    if np.isneginf(level):
        return list(bars)
    relative = []
    for d, b, δ in bars:
        if b > level:
            relative.append((d, b, δ))
        elif level < δ < np.inf:
            relative.append((d + 1, δ, np.inf))
    return relative


@define(frozen=True, eq=False)
class PersistenceDiagram:
    """
    (birth, death, degree) rows; death is +inf for essential classes.

    Degrees are reported in the unreduced chain convention: shifted by the index of
    the fiber pairs eliminated before sampling.
    """

    pairs: np.ndarray
    relative_to: float
    degree_shift: int = 0

    def __attrs_post_init__(self) -> None:
        if self.pairs.size and not np.all(self.pairs[:, 0] < self.pairs[:, 1]):
            raise ValueError("every persistence pair needs birth < death")

    def essential(self, degree: int) -> np.ndarray:
        rows = self.pairs[(self.pairs[:, 2] == degree) & np.isinf(self.pairs[:, 1])]
        return np.sort(rows[:, 0])

    def finite(self, degree: int) -> np.ndarray:
        rows = self.pairs[(self.pairs[:, 2] == degree) & np.isfinite(self.pairs[:, 1])]
        return rows[:, :2]

    @property
    def degrees(self) -> List[int]:
        return sorted({int(d) for d in self.pairs[:, 2]})

    def scaled(self, factor: float) -> "PersistenceDiagram":
        pairs = self.pairs.copy()
        pairs[:, :2] *= factor
        return PersistenceDiagram(pairs, self.relative_to * factor, self.degree_shift)

    def lowered(self, index: int) -> "PersistenceDiagram":
        """The same bars with every degree lowered by `index`."""
        pairs = self.pairs.copy()
        pairs[:, 2] -= index
        return PersistenceDiagram(pairs, self.relative_to, self.degree_shift - index)

    def to_rows(self) -> List[Tuple[float, float, int]]:
        return [(float(b), float(δ), int(d)) for b, δ, d in self.pairs]

    @classmethod
    def init(cls, bars: Iterable[Bar], relative_to: float = -np.inf, degree_shift: int = 0) -> "PersistenceDiagram":
        rows = [(b, δ, d + degree_shift) for d, b, δ in bars]
        pairs = np.array(rows, dtype=float).reshape(-1, 3)
        order = np.lexsort((pairs[:, 1], pairs[:, 0], pairs[:, 2]))
        return cls(pairs[order], relative_to, degree_shift)


def sublevel_persistence(L: GeneratingLandscape) -> PersistenceDiagram:
    """Persistence of L relative to its negative end, degrees shifted by the eliminated index."""
    if L.free_dimension > MAX_FREE_DIMENSION:
        raise GridBudgetExceeded(f"{L.free_dimension} free variables; at most {MAX_FREE_DIMENSION} are supported")
    if L.values.size > L.grids.budget:
        raise GridBudgetExceeded(f"{L.values.size} cells exceed the budget of {L.grids.budget}")
    bars = relative_bars(cubical_barcode(L.values, L.periodic), L.negative_level)
    logger.debug("%d relative bars for k=%d, ℓ=%d", len(bars), L.k, L.ell)
    return PersistenceDiagram.init(bars, L.negative_level, L.eliminated_index)


def bottleneck_distance(first: PersistenceDiagram, second: PersistenceDiagram) -> float:
    """
    Bottleneck distance per degree, taking the worse of the finite-pair matching and
    the matching of sorted essential births; inf when essential counts differ.
    """
    distance = 0.0
    for degree in sorted(set(first.degrees) | set(second.degrees)):
        a, b = first.essential(degree), second.essential(degree)
        if a.size != b.size:
            return np.inf
        if a.size:
            distance = max(distance, float(np.abs(a - b).max()))
        distance = max(distance, _finite_bottleneck(first.finite(degree), second.finite(degree)))
    return distance


def _finite_bottleneck(a: np.ndarray, b: np.ndarray) -> float:
    if not a.size and not b.size:
        return 0.0
    if not a.size or not b.size:
        other = a if a.size else b
        return float((other[:, 1] - other[:, 0]).max() / 2.0)
    return float(gudhi.bottleneck_distance(a, b))
