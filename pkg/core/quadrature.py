"""
Quadrature Module for Superform Lab

This module provides the integration of form-valued functions of t over
(0, +∞) used by φ(s) and by the torsion forms, together with the
compensated coefficientwise summation of float forms.

Integrals run in u = log t, where the integrands met here decay like
exp(-c e^{±u}) at both ends. The range is found by walking outward from a
centre until the integrand is negligible at both ends. The form is then
flattened to a real vector over a fixed (monomial, jet exponent) layout and
handed to scipy.integrate.quad_vec, which refines adaptively with
Gauss-Kronrod rules until the error is small relative to the result.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from core.errors import ConvergenceError, ShapeError
from core.grassmann import Multivector
from core.jets import JetScalar, monomials
from core.scalars import ScalarMode

logger = logging.getLogger(__name__)

# Step in u = log t of the outward walk that fixes the range
WALK_STEP = 0.5

# Nodes walked in each direction before giving up on the range
MAX_RANGE_NODES = 400

# The range ends where two consecutive nodes are below this fraction of the peak
ENDPOINT_CUTOFF = 1e-18

# Absolute magnitude below which an integrand counts as zero
QUADRATURE_FLOOR = 1e-30

# Subintervals quad_vec may create
QUADRATURE_LIMIT = 2000


def compensated_sum(forms, signature):
    """
    Coefficientwise math.fsum of float forms.

    Args:
        forms: iterable of float-mode Multivectors (jet or plain coefficients)
        signature (GeneratorSignature): signature of the result

    Returns:
        Multivector
    """
    columns = {}
    shape = None
    for form in forms:
        for mask, value in form.terms.items():
            if isinstance(value, JetScalar):
                shape = (value.nvars, value.order)
                for exps, c in value.terms.items():
                    columns.setdefault((mask, exps), []).append(complex(c))
            else:
                columns.setdefault((mask, None), []).append(complex(value))
    grouped = {}
    for (mask, exps), values in columns.items():
        total = complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))
        grouped.setdefault(mask, {})[exps] = total
    out = {}
    for mask, coefficients in grouped.items():
        if shape is None:
            value = coefficients.get(None, 0j)
        else:
            if None in coefficients:
                zero_exp = (0,) * shape[0]
                coefficients[zero_exp] = coefficients.get(zero_exp, 0j) + coefficients.pop(None)
            value = JetScalar(shape[0], shape[1], coefficients, ScalarMode.FLOAT)
        if value:
            out[mask] = value
    return Multivector._raw(signature, out, ScalarMode.FLOAT)


class FormVector:
    """
    Float forms over one signature as real vectors: the real parts of every
    (monomial, jet exponent) coefficient followed by the imaginary parts.

    Args:
        signature (GeneratorSignature): signature of the forms
        shape (tuple): (nvars, order) of the jet coefficients, or None for plain numbers
    """

    def __init__(self, signature, shape):
        self.signature = signature
        self.shape = shape
        exponents = monomials(*shape) if shape is not None else [None]
        self.basis = [(mask, exps) for mask in range(1 << signature.count) for exps in exponents]
        self.index = {key: i for i, key in enumerate(self.basis)}
        self.dim = len(self.basis)

    @classmethod
    def for_forms(cls, signature, forms):
        """Layout for ``forms``: their common jet variables at their lowest order."""
        shape = None
        for form in forms:
            for value in form.terms.values():
                if not isinstance(value, JetScalar):
                    continue
                if shape is None:
                    shape = (value.nvars, value.order)
                elif value.nvars != shape[0]:
                    raise ShapeError(f"jets in {value.nvars} and {shape[0]} variables in one integrand")
                else:
                    shape = (shape[0], min(shape[1], value.order))
        return cls(signature, shape)

    def encode(self, form):
        out = np.zeros(self.dim, dtype=complex)
        for mask, value in form.terms.items():
            if isinstance(value, JetScalar):
                if self.shape is None or value.nvars != self.shape[0]:
                    raise ShapeError(f"jet in {value.nvars} variables does not fit the layout {self.shape}")
                for exps, c in value.terms.items():
                    if sum(exps) <= self.shape[1]:
                        out[self.index[(mask, exps)]] += complex(c)
            elif self.shape is None:
                out[self.index[(mask, None)]] += complex(value)
            else:
                out[self.index[(mask, (0,) * self.shape[0])]] += complex(value)
        return np.concatenate([out.real, out.imag])

    def decode(self, vector):
        values = vector[:self.dim] + 1j * vector[self.dim:]
        grouped = {}
        for k in np.flatnonzero(values):
            mask, exps = self.basis[k]
            grouped.setdefault(mask, {})[exps] = complex(values[k])
        terms = {}
        for mask, coefficients in grouped.items():
            if self.shape is None:
                terms[mask] = coefficients[None]
            else:
                terms[mask] = JetScalar._raw(self.shape[0], self.shape[1], coefficients, ScalarMode.FLOAT)
        return Multivector._raw(self.signature, terms, ScalarMode.FLOAT)


@dataclass
class QuadratureResult:
    """Outcome of a LogQuadrature run; ``subintervals`` is 0 when the integrand was below the floor."""

    form: Multivector
    error_estimate: float
    evaluations: int
    interval: tuple
    subintervals: int

    def describe(self):
        lo, hi = self.interval
        if not self.subintervals:
            return f"integrand below the floor on u in [{lo:.2f}, {hi:.2f}], {self.evaluations} evaluations"
        return f"u in [{lo:.2f}, {hi:.2f}], {self.subintervals} subintervals, {self.evaluations} evaluations"


class LogQuadrature:
    """
    ∫_0^∞ F(t) dt = ∫ F(e^u) e^u du with scipy.integrate.quad_vec.

    Args:
        integrand: callable t -> float-mode Multivector
        signature (GeneratorSignature): signature of the integrand's values
        center (float): u around which the integrand is largest
        label (str): name used in log and error messages
        cutoff (float): endpoint threshold relative to the peak
        floor (float): absolute magnitude below which the integrand counts as zero

    Example:
        >>> sig = GeneratorSignature(0)
        >>> rule = LogQuadrature(lambda t: Multivector.scalar(math.exp(-t), sig), sig)
        >>> round(rule.integrate(1e-12).form.scalar_part().real, 10)
        1.0
    """

    def __init__(self, integrand, signature, center=0.0, label="integral",
                 cutoff=ENDPOINT_CUTOFF, floor=QUADRATURE_FLOOR):
        self.integrand = integrand
        self.signature = signature
        self.center = float(center)
        self.label = label
        self.cutoff = cutoff
        self.floor = floor
        self.evaluations = 0
        self._walked = {}

    def value(self, u):
        t = math.exp(u)
        self.evaluations += 1
        return self.integrand(t).scale(t)

    def interval(self):
        """
        Walk outward from the centre until two consecutive nodes on each side
        are below max(cutoff * peak, floor).

        Returns:
            tuple: (lo, hi, peak)
        """
        peak = 0.0
        ends = []
        for direction in (-1, 1):
            j, quiet, size = 0, 0, math.inf
            while quiet < 2:
                if j > MAX_RANGE_NODES:
                    raise ConvergenceError(
                        f"{self.label}: integrand still {size:.3e} after {j} nodes (peak {peak:.3e})")
                u = self.center + direction * j * WALK_STEP
                if u not in self._walked:
                    self._walked[u] = self.value(u)
                size = self._walked[u].magnitude()
                peak = max(peak, size)
                quiet = quiet + 1 if size <= max(self.cutoff * peak, self.floor) else 0
                j += 1
            ends.append(self.center + direction * (j - 1) * WALK_STEP)
        return ends[0], ends[1], peak

    def integrate(self, tolerance):
        """
        Integrate over the walked range until the error estimate is below
        ``tolerance`` relative to the result or below the floor.

        Raises:
            ConvergenceError: the range walk or quad_vec did not settle
        """
        lo, hi, peak = self.interval()
        if peak <= self.floor:
            logger.debug("%s: integrand below %.1e on the whole walk, integral is zero", self.label, self.floor)
            return QuadratureResult(Multivector.zero(self.signature, ScalarMode.FLOAT), 0.0,
                                    self.evaluations, (lo, hi), 0)
        layout = FormVector.for_forms(self.signature, self._walked.values())
        vector, error, info = integrate.quad_vec(lambda u: layout.encode(self.value(u)), lo, hi,
                                                 epsabs=self.floor, epsrel=tolerance, norm="max",
                                                 limit=QUADRATURE_LIMIT, full_output=True)
        if info.status != 0:
            raise ConvergenceError(f"{self.label}: quad_vec stopped with status {info.status}, "
                                   f"error {error:.3e} after {self.evaluations} evaluations")
        subintervals = len(info.intervals)
        logger.debug("%s: %d subintervals, error %.3e", self.label, subintervals, error)
        return QuadratureResult(layout.decode(vector), float(error), self.evaluations, (lo, hi), subintervals)
