from typing import Any, Dict, Iterable, Optional

import numpy as np
from attrs import define, field
from scipy.optimize import minimize
from scipy.spatial import ConvexHull

from ..exceptions import EmptyInput


def _as_points(points: Any) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return points[:, None] if points.ndim == 1 else points.reshape(len(points), -1)


def hull_vertices(points: Iterable[Any], tol: float = 1e-12) -> np.ndarray:
    """Extreme points of a finite set, found in the affine span of the points."""
    points = _as_points(list(points))
    if points.size == 0:
        raise EmptyInput("a polytope needs at least one point")
    points = np.unique(points, axis=0)
    if len(points) == 1:
        return points
    centred = points - points.mean(axis=0)
    directions = np.linalg.svd(centred, full_matrices=False)[2]
    spread = np.linalg.svd(centred, compute_uv=False)
    rank = int(np.sum(spread > tol * max(1.0, spread[0])))
    if rank == 0:
        return points[:1]
    if rank == 1:
        t = centred @ directions[0]
        return points[[int(np.argmin(t)), int(np.argmax(t))]]
    return points[ConvexHull(centred @ directions[:rank].T).vertices]


def project(vertices: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Closest point of conv(vertices) to `target`."""
    if vertices.shape[1] == 1:
        return np.clip(target, vertices.min(axis=0), vertices.max(axis=0))
    if len(vertices) == 1:
        return vertices[0].copy()
    m = len(vertices)
    result = minimize(
        lambda w: float(np.sum((w @ vertices - target) ** 2)),
        np.full(m, 1.0 / m),
        jac=lambda w: 2.0 * vertices @ (w @ vertices - target),
        bounds=[(0.0, 1.0)] * m,
        constraints=({"type": "eq", "fun": lambda w: w.sum() - 1.0, "jac": lambda w: np.ones_like(w)},),
        method="SLSQP",
        options={"ftol": 1e-14, "maxiter": 200},
    )
    return result.x @ vertices


@define(frozen=True, eq=False)
class SubdiffPolytope:
    """
    A convex polytope of covectors at a base point, stored by its vertices.

    `members` keeps the detected points a differential was built from, when that
    differs from the vertex set. Detection-based differentials may be empty.
    """

    vertices: np.ndarray
    at: np.ndarray = field(converter=lambda x: np.atleast_1d(np.asarray(x, dtype=float)))
    members: Optional[np.ndarray] = None
    degenerate: bool = False

    @property
    def n(self) -> int:
        return len(self.at)

    @property
    def is_empty(self) -> bool:
        return self.vertices.size == 0

    @property
    def min_norm(self) -> np.ndarray:
        """λ(x): the element of least norm."""
        if self.is_empty:
            raise EmptyInput("empty polytope has no least-norm element")
        return project(self.vertices, np.zeros(self.n))

    def distance(self, α: Any) -> float:
        if self.is_empty:
            return np.inf
        α = np.atleast_1d(np.asarray(α, dtype=float))
        return float(np.linalg.norm(project(self.vertices, α) - α))

    def contains(self, α: Any, tol: float = 1e-9) -> bool:
        return self.distance(α) <= tol

    def within(self, other: "SubdiffPolytope", tol: float = 1e-9) -> bool:
        """Every vertex of self lies in `other` up to `tol`."""
        return all(other.contains(v, tol) for v in self.vertices)

    def scaled(self, factor: float) -> "SubdiffPolytope":
        members = None if self.members is None else factor * self.members
        return SubdiffPolytope.init(factor * self.vertices, self.at, members, self.degenerate)

    def __add__(self, other: "SubdiffPolytope") -> "SubdiffPolytope":
        sums = (self.vertices[:, None, :] + other.vertices[None, :, :]).reshape(-1, self.n)
        return SubdiffPolytope.init(sums, self.at)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "at": self.at.tolist(),
            "vertices": self.vertices.tolist(),
            "members": None if self.members is None else self.members.tolist(),
            "degenerate": self.degenerate,
        }

    @classmethod
    def init(
        cls,
        points: Iterable[Any],
        at: Any,
        members: Optional[np.ndarray] = None,
        degenerate: bool = False,
    ) -> "SubdiffPolytope":
        return cls(hull_vertices(points), at, members, degenerate)

    @classmethod
    def empty(cls, at: Any) -> "SubdiffPolytope":
        at = np.atleast_1d(np.asarray(at, dtype=float))
        return cls(np.empty((0, len(at))), at, np.empty((0, len(at))))
