"""
Features Package for Superform Lab

This package contains the verification suites that make up the Superform Lab
command line. Each module implements one suite and exposes one function that
takes a Scenario and returns a VerificationReport.

Modules included:
- exact_identities: Berezin integrals, Lemma 2.1, Newton and Chern identities, the Fock bridge
- jet_closedness: the jet calculus, closedness of characteristic and Thom forms
- thom_transgression: rank-1 oracles, degrees, parity and the transgression mechanism
- lattice_checks: Poisson summation, lattice sums, Theorem 2.19 and asymptotics
- phi_checks: the series φ(s) and dφ(0)
- torsion_checks: flat superconnections and torsion forms
- fock_checks: Clifford supertraces, scaling and Fourier modes

The SUITES table maps each command-line suite name to its function; suites
listed in THREADED_SUITES also take a ``workers`` argument.
"""

from .exact_identities import exact_identities
from .fock_checks import fock_checks
from .jet_closedness import jet_closedness
from .lattice_checks import lattice_checks
from .phi_checks import phi_checks
from .thom_transgression import thom_transgression
from .torsion_checks import torsion_checks

SUITES = {
    "exact-identities": exact_identities,
    "jets": jet_closedness,
    "thom": thom_transgression,
    "lattice": lattice_checks,
    "phi": phi_checks,
    "torsion": torsion_checks,
    "fock": fock_checks,
}

# Suites that evaluate lattice sums with a thread pool of their own
THREADED_SUITES = frozenset({"lattice", "fock"})

__all__ = [
    "SUITES",
    "THREADED_SUITES",
    "exact_identities",
    "jet_closedness",
    "thom_transgression",
    "lattice_checks",
    "phi_checks",
    "torsion_checks",
    "fock_checks",
]
