from .measure import (
    LiouvilleMeasure,
    Measure,
    OrbitMeasure,
    average_action,
    observables,
    orbit_measure,
    rotation_of_measure,
    support_distance,
)
from .mu_alpha import (
    Candidate,
    MeasureConfig,
    RSet,
    SupportReport,
    alpha_candidates,
    build_mu_alpha,
    caratheodory,
    emit_R_set,
    equilibria,
    r_set_from_table,
    support_checks,
)

__all__ = (
    Candidate.__name__,
    LiouvilleMeasure.__name__,
    Measure.__name__,
    MeasureConfig.__name__,
    OrbitMeasure.__name__,
    RSet.__name__,
    SupportReport.__name__,
    alpha_candidates.__name__,
    average_action.__name__,
    build_mu_alpha.__name__,
    caratheodory.__name__,
    emit_R_set.__name__,
    equilibria.__name__,
    observables.__name__,
    orbit_measure.__name__,
    r_set_from_table.__name__,
    rotation_of_measure.__name__,
    support_checks.__name__,
    support_distance.__name__,
)
