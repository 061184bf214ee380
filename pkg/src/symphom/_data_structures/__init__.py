from .cubical_grid import CubicalGrid
from .sampled_function import SampledFunction

__all__ = (
    CubicalGrid.__name__,
    SampledFunction.__name__,
)
