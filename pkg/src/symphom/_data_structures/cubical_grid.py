from typing import Sequence, Tuple

import numpy as np
from attrs import define


@define(frozen=True, eq=False)
class CubicalGrid:
    """
    Cubical complex of a box of top cells, with selected axes wrapped around.

    Cells are addressed on the doubled grid: an odd coordinate spans an interval,
    an even one is a vertex. A cell enters the sublevel filtration with the least
    value among the top cells containing it (the same construction gudhi uses for
    top-dimensional cell input).
    """

    shape: Tuple[int, ...]
    periodic: Tuple[bool, ...]
    filtration: np.ndarray

    @property
    def extent(self) -> Tuple[int, ...]:
        return self.filtration.shape

    @property
    def num_cells(self) -> int:
        return self.filtration.size

    def dimensions(self) -> np.ndarray:
        coords = np.indices(self.extent)
        return (coords % 2).sum(axis=0).ravel()

    def values(self) -> np.ndarray:
        return self.filtration.ravel()

    def faces(self, cell: int) -> Tuple[int, ...]:
        coord = np.array(np.unravel_index(cell, self.extent))
        faces = []
        for axis in np.flatnonzero(coord % 2):
            for step in (-1, 1):
                face = coord.copy()
                face[axis] = (face[axis] + step) % self.extent[axis]
                faces.append(int(np.ravel_multi_index(tuple(face), self.extent)))
        return tuple(faces)

    def boundary_matrix(self, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
        """Incidence of the faces of `rows` among `cols`, over GF(2)."""
        position = {cell: j for j, cell in enumerate(cols)}
        matrix = np.zeros((len(rows), len(cols)), dtype=bool)
        for i, cell in enumerate(rows):
            for face in self.faces(cell):
                j = position.get(face)
                if j is not None:
                    matrix[i, j] ^= True
        return matrix

    @classmethod
    def init(cls, values: np.ndarray, periodic: Sequence[bool]) -> "CubicalGrid":
        values = np.asarray(values, dtype=float)
        wraps = tuple(bool(w) for w in periodic)
        if len(wraps) != values.ndim:
            raise ValueError(f"{len(wraps)} periodic flags for a {values.ndim}-d grid")

        extent = tuple(2 * s if w else 2 * s + 1 for s, w in zip(values.shape, wraps))
        filtration = np.full(extent, np.inf)
        filtration[tuple(slice(1, None, 2) for _ in extent)] = values

        # Each pass fills the cells that are even along `axis` from their two odd
        # neighbours, which earlier passes have already filled.
        for axis, wrap in enumerate(wraps):
            odd = np.take(filtration, np.arange(1, extent[axis], 2), axis=axis)
            if wrap:
                even = np.minimum(np.roll(odd, 1, axis=axis), odd)
            else:
                pad = np.full_like(np.take(odd, [0], axis=axis), np.inf)
                even = np.minimum(
                    np.concatenate([pad, odd], axis=axis),
                    np.concatenate([odd, pad], axis=axis),
                )
            index = [slice(None)] * filtration.ndim
            index[axis] = slice(0, None, 2)
            filtration[tuple(index)] = even

        return cls(values.shape, wraps, filtration)
