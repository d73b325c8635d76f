"""
Errors Module for Superform Lab

This module defines the exception hierarchy raised by the algebra engine,
the geometric constructions and the verifier. Every error derives from
SuperformError so that suites can record a failed check and carry on.
"""


class SuperformError(Exception):
    """Base class for all errors raised by superform-lab."""


class SignatureMismatchError(SuperformError):
    """Two multivectors (or matrix entries) live over different generator sets."""


class ScalarModeError(SuperformError):
    """Exact and floating scalars were mixed in one computation."""


class ParityError(SuperformError):
    """An operation received an element of the wrong Z2-degree."""


class ShapeError(SuperformError):
    """Matrix or vector dimensions do not fit the operation."""


class ExactnessError(SuperformError):
    """An exact result was requested but the value is irrational."""


class DomainError(SuperformError):
    """A parameter lies outside the domain of the construction (t <= 0, N parity, ...)."""


class ConvergenceError(SuperformError):
    """A quadrature or series did not reach the requested accuracy."""


class ScenarioError(SuperformError):
    """A scenario file or command line is malformed."""
