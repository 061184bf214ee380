"""
Differentials of sampled functions at grid nodes.

The sampled function is read as its piecewise-linear interpolant: linear on each
segment in one variable, on the Freudenthal triangles (each square cut along its
main diagonal) in two.
"""

import logging
from itertools import product
from typing import Any, List, Sequence, Tuple

import numpy as np

from .._data_structures import SampledFunction
from ..exceptions import BoundaryPoint
from ..selector import strong_critical_values
from .polytope import SubdiffPolytope

logger = logging.getLogger(__name__)

Index = Tuple[int, ...]

# Freudenthal triangles of the unit square, by corner offsets
LOWER = ((0, 0), (1, 0), (1, 1))
UPPER = ((0, 0), (0, 1), (1, 1))


def _interior_index(f: SampledFunction, x: Any) -> Index:
    index = f.node_index(x)
    if f.on_boundary(index):
        raise BoundaryPoint(f"{np.atleast_1d(x).tolist()} is on the boundary of the sampled box")
    return index


def _value(f: SampledFunction, index: Sequence[int]) -> float:
    wrapped = tuple(i % size for i, size in zip(index, f.shape))
    return float(f.values[wrapped])


def adjacent_gradients(f: SampledFunction, index: Index) -> np.ndarray:
    """Gradients of the linear pieces whose closure holds node `index`."""
    h = f.spacing
    if f.n == 1:
        (i,) = index
        left = (_value(f, (i,)) - _value(f, (i - 1,))) / h[0]
        right = (_value(f, (i + 1,)) - _value(f, (i,))) / h[0]
        return np.array([[left], [right]])
    if f.n != 2:
        raise ValueError(f"piecewise-linear differentials are implemented for n <= 2, got {f.n}")

    i, j = index
    gradients = []
    for a, b in product((i - 1, i), (j - 1, j)):
        corner = (i - a, j - b)
        v = {(di, dj): _value(f, (a + di, b + dj)) for di, dj in product((0, 1), repeat=2)}
        if corner in LOWER:
            gradients.append(((v[1, 0] - v[0, 0]) / h[0], (v[1, 1] - v[1, 0]) / h[1]))
        if corner in UPPER:
            gradients.append(((v[1, 1] - v[0, 1]) / h[0], (v[0, 1] - v[0, 0]) / h[1]))
    return np.array(gradients)


def clarke_pl(f: SampledFunction, x: Any) -> SubdiffPolytope:
    """
    Clarke differential of the interpolant at the node nearest to x: the convex
    hull of the gradients of the adjacent pieces. `min_norm` gives λ_f(x).
    """
    index = _interior_index(f, x)
    return SubdiffPolytope.init(adjacent_gradients(f, index), f.point(index))


def _strong_at_centre(g: SampledFunction, centre: Index) -> Tuple[bool, bool]:
    for critical in strong_critical_values(g):
        if any(tuple(w) == centre for w in critical.witnesses):
            return True, not critical.isolated
    return False, False


def strong_diff(f: SampledFunction, x: Any, α_grid: Sequence[Any], radius: int = 8) -> SubdiffPolytope:
    """
    d_s f(x) on a finite set of covectors: those α for which f − ⟨α, ·⟩ restricted
    to the window of `radius` nodes around x has a strong critical point at x.

    The result's `members` are the detected α; `degenerate` is set when a
    detection came from a plateau.
    """
    index = _interior_index(f, x)
    window, centre = f.window(index, radius)
    detected, degenerate = [], False
    for α in α_grid:
        hit, flat = _strong_at_centre(window.tilted(α), centre)
        if hit:
            detected.append(np.atleast_1d(np.asarray(α, dtype=float)))
            degenerate |= flat
    logger.debug("strong differential at %s: %d of %d covectors", f.point(index), len(detected), len(α_grid))
    if not detected:
        return SubdiffPolytope.empty(f.point(index))
    members = np.array(detected)
    return SubdiffPolytope.init(members, f.point(index), members, degenerate)


def _ring(f: SampledFunction, index: Index, r: int) -> List[Index]:
    ring = []
    for offset in product(range(-r, r + 1), repeat=f.n):
        if max(abs(o) for o in offset) != r:
            continue
        node = tuple(i + o for i, o in zip(index, offset))
        node = tuple(k % size if wrap else k for k, size, wrap in zip(node, f.shape, f.periodic))
        if all(0 <= k < size for k, size in zip(node, f.shape)) and not f.on_boundary(node):
            ring.append(node)
    return ring


def limit_diff(
    f: SampledFunction,
    x: Any,
    α_grid: Sequence[Any],
    radii: Sequence[int] = (4, 2, 1),
    window: int = 8,
) -> SubdiffPolytope:
    """
    D_s f(x): covectors detected in d_s f at nodes converging to x.

    `radii` is the schedule of node distances, decreasing; what is detected on
    the innermost ring is kept.
    """
    if any(b >= a for a, b in zip(radii, radii[1:])) or min(radii) < 1:
        raise ValueError(f"radius schedule must decrease to 1, got {tuple(radii)}")
    index = _interior_index(f, x)
    found: np.ndarray = np.empty((0, f.n))
    for r in radii:
        members = [
            d.members
            for node in _ring(f, index, r)
            if not (d := strong_diff(f, f.point(node), α_grid, window)).is_empty and d.members is not None
        ]
        found = np.unique(np.concatenate(members), axis=0) if members else np.empty((0, f.n))
        logger.debug("ring %d around %s: %d covectors", r, f.point(index), len(found))
    if not len(found):
        return SubdiffPolytope.empty(f.point(index))
    return SubdiffPolytope.init(found, f.point(index), found)
