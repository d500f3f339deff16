"""Two coupled oscillators coupled to two independent Ohmic baths.

Closed-form Green's functions and correlators, quadrature and series
evaluators, perturbative entanglement growth, and an exact finite-bath
Gaussian simulator used for validation.
"""

from .errors import ConfigError, DomainError, DuetError, InstabilityError, NumericalError
from .model import (
    BathSpec,
    CountertermMatrix,
    Cutoff,
    NormalModeBasis,
    SystemParams,
    counterterms,
    diagonalize,
    renormalized_basis,
)

__version__ = "0.1.0"

__all__ = [
    "BathSpec",
    "ConfigError",
    "CountertermMatrix",
    "Cutoff",
    "DomainError",
    "DuetError",
    "InstabilityError",
    "NormalModeBasis",
    "NumericalError",
    "SystemParams",
    "counterterms",
    "diagonalize",
    "renormalized_basis",
]
