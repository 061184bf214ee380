from .critical import StrongCritical, strong_critical_values
from .homogenize import (
    ConvergenceReport,
    SelectorTable,
    barcode_distances,
    capacities,
    homogenize,
    selector_table,
    selector_value,
)
from .minimax import CohomologyClass, minimax
from .persistence import PersistenceDiagram, bottleneck_distance, cubical_barcode, relative_bars, sublevel_persistence

__all__ = (
    CohomologyClass.__name__,
    ConvergenceReport.__name__,
    PersistenceDiagram.__name__,
    SelectorTable.__name__,
    StrongCritical.__name__,
    barcode_distances.__name__,
    bottleneck_distance.__name__,
    capacities.__name__,
    cubical_barcode.__name__,
    homogenize.__name__,
    minimax.__name__,
    relative_bars.__name__,
    selector_table.__name__,
    selector_value.__name__,
    strong_critical_values.__name__,
    sublevel_persistence.__name__,
)
