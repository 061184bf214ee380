from typing import Optional, Sequence, Union


class SymphomError(Exception):
    """Root of every error raised by symphom."""


class NonConvergentImplicitStep(SymphomError, ArithmeticError):
    """Implicit-midpoint Newton iteration did not converge; refine the substeps."""


class IncompatibleIntegrator(SymphomError, ValueError):
    pass


class NoOrbitFound(SymphomError, RuntimeError):
    """Shooting diverged from every seed."""


class UnsupportedCoercive(SymphomError, ValueError):
    pass


class NoGeneratingFunction(SymphomError, ArithmeticError):
    """The boundary-value map p ↦ P is not a contraction; shrink the segment."""


class OutOfBox(SymphomError, ValueError):
    pass


class ClassNotFound(SymphomError, LookupError):
    """No essential class in the requested degree: wrong index or box too small."""


class BoundaryPoint(SymphomError, ValueError):
    pass


class ConstantFunction(SymphomError, ValueError):
    pass


class EmptyInput(SymphomError, ValueError):
    pass


class InfeasibleAlpha(SymphomError, ValueError):
    pass


class NonConvexInput(SymphomError, ValueError):
    pass


class TooLarge(SymphomError, ValueError):
    pass


class BudgetExceeded(SymphomError, RuntimeError):
    pass


class GridBudgetExceeded(BudgetExceeded):
    """Free variables × resolution exceed the configured cell budget."""


class ConfigError(SymphomError, ValueError):
    def __init__(self, message: str, path: Optional[Sequence[Union[str, int]]] = None):
        self.path = ".".join(map(str, path)) if path else ""
        super().__init__(f"{self.path}: {message}" if self.path else message)
