"""Linear algebra over the two-element field on boolean numpy arrays."""

from typing import Tuple

import numpy as np


def eliminate(matrix: np.ndarray, ncols: int) -> Tuple[np.ndarray, int]:
    """Gauss-Jordan elimination on the leading `ncols` columns."""
    m = np.array(matrix, dtype=bool, copy=True)
    rank = 0
    for col in range(ncols):
        if rank == m.shape[0]:
            break
        candidates = np.flatnonzero(m[rank:, col])
        if candidates.size == 0:
            continue
        pivot = rank + candidates[0]
        if pivot != rank:
            m[[rank, pivot]] = m[[pivot, rank]]
        hits = np.flatnonzero(m[:, col])
        hits = hits[hits != rank]
        m[hits] ^= m[rank]
        rank += 1
    return m, rank


def rank(matrix: np.ndarray) -> int:
    if matrix.size == 0:
        return 0
    return eliminate(matrix, matrix.shape[1])[1]


def left_nullspace(matrix: np.ndarray) -> np.ndarray:
    """Rows v with v @ matrix = 0 (mod 2), as a basis."""
    r, c = matrix.shape
    if r == 0:
        return np.zeros((0, 0), dtype=bool)
    augmented = np.hstack([np.asarray(matrix, dtype=bool), np.eye(r, dtype=bool)])
    reduced, rk = eliminate(augmented, c)
    return reduced[rk:, c:]
