import logging
from typing import Dict, List, Optional, Set, Tuple

import numpy as np
from attrs import define

from .._data_structures import SampledFunction
from .persistence import cubical_barcode

logger = logging.getLogger(__name__)


@define(frozen=True, eq=False)
class StrongCritical:
    """
    A value c at which H*(f^{c+ε}, f^{c−ε}) survives every ε above the sampling noise.

    `witnesses` are node indices carrying the value; `isolated` is False when they
    spread over a plateau, where the value is a degenerate candidate only.
    """

    value: float
    witnesses: np.ndarray
    degrees: Tuple[int, ...]
    isolated: bool

    @property
    def points(self) -> int:
        return len(self.witnesses)


def _span(indices: np.ndarray, size: int, periodic: bool) -> int:
    if not periodic:
        return int(indices.max() - indices.min())
    ordered = np.unique(indices)
    gaps = np.diff(np.concatenate([ordered, [ordered[0] + size]]))
    return int(size - gaps.max())


def strong_critical_values(f: SampledFunction, lifetime: Optional[float] = None) -> List[StrongCritical]:
    """
    Births and deaths of persistence pairs living longer than `lifetime`
    (default twice the grid modulus) with their witnesses.

    Nodes on a non-periodic boundary never witness, so a value carried only there
    is dropped.
    """
    threshold = 2.0 * f.modulus() if lifetime is None else lifetime
    candidates: Dict[float, Set[int]] = {}
    for degree, birth, death in cubical_barcode(f.values, f.periodic):
        if death - birth <= threshold:
            continue
        candidates.setdefault(birth, set()).add(degree)
        if np.isfinite(death):
            candidates.setdefault(death, set()).add(degree + 1)

    scale = max(1.0, f.sup_norm())
    merged: Dict[float, Set[int]] = {}
    for value in sorted(candidates):
        previous = next(reversed(merged), None)
        if previous is not None and value - previous <= 1e-12 * scale:
            merged[previous] |= candidates[value]
        else:
            merged[value] = set(candidates[value])

    found = []
    for value, degrees in merged.items():
        hits = np.argwhere(np.abs(f.values - value) <= 1e-12 * scale)
        hits = np.array([index for index in hits if not f.on_boundary(index)]).reshape(-1, f.n)
        if not len(hits):
            continue
        spans = [_span(hits[:, i], f.shape[i], f.periodic[i]) for i in range(f.n)]
        found.append(StrongCritical(float(value), hits, tuple(sorted(degrees)), max(spans) <= 2))
    logger.debug("%d strong critical values above lifetime %.2e", len(found), threshold)
    return found
