from .differentials import adjacent_gradients, clarke_pl, limit_diff, strong_diff
from .inclusion import BallReport, Certificate, HullInclusion, ball_inclusion_check, rotation_hull_inclusion
from .polytope import SubdiffPolytope, hull_vertices

__all__ = (
    BallReport.__name__,
    Certificate.__name__,
    HullInclusion.__name__,
    SubdiffPolytope.__name__,
    adjacent_gradients.__name__,
    ball_inclusion_check.__name__,
    clarke_pl.__name__,
    hull_vertices.__name__,
    limit_diff.__name__,
    rotation_hull_inclusion.__name__,
    strong_diff.__name__,
)
