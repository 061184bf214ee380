from .cache import LandscapeCache, landscape_key
from .critical import CriticalOrbit, fiber_critical_orbits
from .landscape import (
    GeneratingLandscape,
    GridConfig,
    Reduction,
    build_landscape,
    compose_landscape,
    grad_residual,
    graph_landscape,
)
from .step import BoundarySolution, StepGenFun, endpoint_actions, generating_values, step_genfun, twist_check

__all__ = (
    BoundarySolution.__name__,
    CriticalOrbit.__name__,
    GeneratingLandscape.__name__,
    GridConfig.__name__,
    LandscapeCache.__name__,
    Reduction.__name__,
    StepGenFun.__name__,
    build_landscape.__name__,
    compose_landscape.__name__,
    endpoint_actions.__name__,
    fiber_critical_orbits.__name__,
    generating_values.__name__,
    grad_residual.__name__,
    graph_landscape.__name__,
    landscape_key.__name__,
    step_genfun.__name__,
    twist_check.__name__,
)
