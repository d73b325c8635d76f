"""
Core Package for Superform Lab

This package contains the mathematical engine behind the verification suites.
Modules included:
- scalars: exact Gaussian-rational and float scalar modes
- errors: the SuperformError hierarchy
- grassmann: multivectors over dx, ds, ψ, ψ̂ and z; Berezin integrals and tr_z
- matrices: matrices over the algebra, supertraces and even determinants
- jets: truncated multivariate Taylor series
- jet_forms: the exterior derivative on jets of forms
- flat_bundle: flat bundles with metrics, ω and characteristic forms
- thom_forms: pulled-back Thom forms and their transgressions
- lattice_sums: lattice windows, Poisson summation, asymptotics and φ(s)
- quadrature: trapezoidal integration of forms in log t and compensated sums
- fock: Clifford operators on Λ(C^N) and the supertrace/Berezin bridge
- superconnection: flat superconnections, torsion forms and Koszul complexes
"""

from .errors import (
    ConvergenceError,
    DomainError,
    ExactnessError,
    ParityError,
    ScalarModeError,
    ScenarioError,
    ShapeError,
    SignatureMismatchError,
    SuperformError,
)
from .scalars import ScalarMode

__all__ = [
    "ScalarMode",
    "SuperformError",
    "SignatureMismatchError",
    "ScalarModeError",
    "ParityError",
    "ShapeError",
    "ExactnessError",
    "DomainError",
    "ConvergenceError",
    "ScenarioError",
]
