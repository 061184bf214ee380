from .effham import (
    EffHamTable,
    Method,
    effham_oracle,
    lax_oleinik_effham,
    lax_oleinik_table,
    pendulum_effham,
    pendulum_plateau,
    pendulum_table,
)
from .exhaustive import brute_force_minimax

__all__ = (
    EffHamTable.__name__,
    Method.__name__,
    brute_force_minimax.__name__,
    effham_oracle.__name__,
    lax_oleinik_effham.__name__,
    lax_oleinik_table.__name__,
    pendulum_effham.__name__,
    pendulum_plateau.__name__,
    pendulum_table.__name__,
)
