from .flow import FlowConfig, Integrator, PhasePoint, Segment, flow_map, integrate, time_one_map
from .hamiltonian import (
    Family,
    GridSamples,
    HamiltonianSpec,
    conjugate_by_shear,
    negated,
    shifted,
    truncate_coercive,
)
from .invariants import calabi, phase_space_integral
from .orbits import LiftedOrbit, find_translated_orbit, iterate_lift, rotation_vector
from .profiles import Profile, ProfileKind

__all__ = (
    FlowConfig.__name__,
    Integrator.__name__,
    PhasePoint.__name__,
    Segment.__name__,
    Family.__name__,
    GridSamples.__name__,
    HamiltonianSpec.__name__,
    LiftedOrbit.__name__,
    Profile.__name__,
    ProfileKind.__name__,
    calabi.__name__,
    conjugate_by_shear.__name__,
    find_translated_orbit.__name__,
    flow_map.__name__,
    integrate.__name__,
    iterate_lift.__name__,
    negated.__name__,
    phase_space_integral.__name__,
    rotation_vector.__name__,
    shifted.__name__,
    time_one_map.__name__,
    truncate_coercive.__name__,
)
