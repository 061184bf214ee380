from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from attrs import define

from ..exceptions import OutOfBox


@define(frozen=True, eq=False)
class SampledFunction:
    """
    Values of a function on a uniform tensor grid.

    A periodic axis holds the nodes of one period (the last node is not repeated),
    so its period is `len(axis) * spacing`. Non-periodic axes are closed intervals.
    """

    axes: Tuple[np.ndarray, ...]
    values: np.ndarray
    periodic: Tuple[bool, ...]

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def spacing(self) -> np.ndarray:
        return np.array([axis[1] - axis[0] for axis in self.axes])

    def points(self) -> np.ndarray:
        """Node coordinates, shape (*shape, n)."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    def point(self, index: Sequence[int]) -> np.ndarray:
        return np.array([axis[i] for axis, i in zip(self.axes, index)])

    def node_index(self, x: Sequence[float]) -> Tuple[int, ...]:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        index = []
        for axis, wrap, h, xi in zip(self.axes, self.periodic, self.spacing, x):
            j = int(np.rint((xi - axis[0]) / h))
            if wrap:
                j %= len(axis)
            elif not 0 <= j < len(axis):
                raise OutOfBox(f"{xi} lies outside [{axis[0]}, {axis[-1]}]")
            index.append(j)
        return tuple(index)

    def on_boundary(self, index: Sequence[int]) -> bool:
        return any(
            not wrap and i in (0, len(axis) - 1)
            for axis, wrap, i in zip(self.axes, self.periodic, index)
        )

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    def modulus(self) -> float:
        """Largest jump between neighbouring nodes."""
        jumps = [0.0]
        for axis, wrap in enumerate(self.periodic):
            diff = np.diff(self.values, axis=axis)
            if diff.size:
                jumps.append(float(np.abs(diff).max()))
            if wrap:
                first = np.take(self.values, [0], axis=axis)
                last = np.take(self.values, [-1], axis=axis)
                jumps.append(float(np.abs(first - last).max()))
        return max(jumps)

    def window(self, index: Sequence[int], radius: int) -> Tuple["SampledFunction", Tuple[int, ...]]:
        """Restriction to the nodes within `radius` steps of `index`, unwrapped."""
        axes, picks, centre = [], [], []
        for axis, wrap, h, i in zip(self.axes, self.periodic, self.spacing, index):
            offsets = np.arange(-radius, radius + 1)
            if wrap:
                pick = (i + offsets) % len(axis)
                coords = axis[i] + offsets * h
                centre.append(radius)
            else:
                lo, hi = max(i - radius, 0), min(i + radius, len(axis) - 1)
                pick = np.arange(lo, hi + 1)
                coords = axis[pick]
                centre.append(i - lo)
            axes.append(coords)
            picks.append(pick)
        values = self.values[np.ix_(*picks)]
        return SampledFunction(tuple(axes), values, (False,) * self.n), tuple(centre)

    def tilted(self, α: Sequence[float]) -> "SampledFunction":
        """f − ⟨α, ·⟩ on a box; the result is never periodic."""
        α = np.atleast_1d(np.asarray(α, dtype=float))
        return SampledFunction(self.axes, self.values - self.points() @ α, (False,) * self.n)

    def scaled(self, factor: float) -> "SampledFunction":
        return SampledFunction(self.axes, factor * self.values, self.periodic)

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        if self.shape != other.shape:
            raise ValueError(f"grids differ: {self.shape} vs {other.shape}")
        return SampledFunction(self.axes, self.values + other.values, self.periodic)

    @classmethod
    def init(
        cls,
        fn: Callable[[np.ndarray], np.ndarray],
        axes: Sequence[np.ndarray],
        periodic: Optional[Sequence[bool]] = None,
    ) -> "SampledFunction":
        """Samples `fn`, which maps points of shape (..., n) to values of shape (...)."""
        axes = tuple(np.asarray(axis, dtype=float) for axis in axes)
        wraps = tuple(periodic) if periodic is not None else (False,) * len(axes)
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return cls(axes, np.asarray(fn(grid), dtype=float), wraps)
