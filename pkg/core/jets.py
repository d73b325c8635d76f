"""
Jets Module for Superform Lab

This module provides JetScalar, a multivariate polynomial in the base
coordinates truncated at a total order K. Jets stand in for smooth
functions on a neighbourhood of the base point: every product is
truncated at K, so the arithmetic is exact on the quotient ring.

Variables are numbered 0..nvars-1; variable a corresponds to the base
coordinate x_{a+1} (and the last variable to s on an extended germ).
"""

from functools import lru_cache
from fractions import Fraction
from math import factorial

from core.errors import DomainError, ScalarModeError, SignatureMismatchError
from core.scalars import (
    GaussianRational,
    ScalarMode,
    coerce,
    exp_scalar,
    magnitude,
    mode_of,
    power_scalar,
)


@lru_cache(maxsize=None)
def monomials(nvars, order):
    """All exponent tuples in ``nvars`` variables of total degree <= ``order``."""
    result = [()]
    for _ in range(nvars):
        result = [e + (k,) for e in result for k in range(order + 1) if sum(e) + k <= order]
    return sorted(result, key=lambda e: (sum(e), tuple(-k for k in e)))


BASE_SCALARS = (int, Fraction, GaussianRational, float, complex)


def rational(q, mode):
    """A Fraction converted to the scalar type of ``mode`` (float for float mode)."""
    if ScalarMode(mode) is ScalarMode.FLOAT:
        return float(q)
    return GaussianRational(q)


class JetScalar:
    """
    Truncated Taylor polynomial.

    Args:
        nvars (int): number of base coordinates
        order (int): truncation order K
        terms (dict): exponent tuple -> base scalar
        mode (ScalarMode): scalar mode of the coefficients
    """

    __slots__ = ("nvars", "order", "terms", "mode")
    __hash__ = None

    def __init__(self, nvars, order, terms=None, mode=ScalarMode.FLOAT):
        self.nvars = nvars
        self.order = order
        self.mode = ScalarMode(mode)
        clean = {}
        for exps, value in (terms or {}).items():
            if len(exps) != nvars:
                raise SignatureMismatchError(f"exponent {exps} has wrong length for {nvars} variables")
            if sum(exps) > order:
                continue
            value = coerce(value, self.mode)
            if value != 0:
                clean[tuple(exps)] = value
        self.terms = clean

    @classmethod
    def _raw(cls, nvars, order, terms, mode):
        jet = cls.__new__(cls)
        jet.nvars = nvars
        jet.order = order
        jet.mode = mode
        jet.terms = terms
        return jet

    @classmethod
    def constant(cls, value, nvars, order, mode):
        return cls(nvars, order, {(0,) * nvars: value}, mode)

    @classmethod
    def variable(cls, index, nvars, order, mode, center=0):
        """The coordinate function x_index (+ center) as a jet."""
        if not 0 <= index < nvars:
            raise DomainError(f"variable index {index} out of range")
        exps = [0] * nvars
        exps[index] = 1
        terms = {tuple(exps): 1}
        if center:
            terms[(0,) * nvars] = center
        return cls(nvars, order, terms, mode)

    # ------------------------------------------------------------------ ring

    def _lift(self, other):
        if isinstance(other, JetScalar):
            if other.nvars != self.nvars:
                raise SignatureMismatchError(
                    f"jets over {self.nvars} and {other.nvars} variables combined")
            if other.mode is not self.mode:
                raise ScalarModeError("exact and float jets combined")
            return other
        if isinstance(other, BASE_SCALARS):
            other_mode = mode_of(other)
            if other_mode is not None and other_mode is not self.mode:
                raise ScalarModeError(f"{other_mode.value} scalar combined with a {self.mode.value} jet")
            return JetScalar.constant(other, self.nvars, self.order, self.mode)
        return None

    def __add__(self, other):
        if not isinstance(other, JetScalar):
            other = self._lift(other)
            if other is None:
                return NotImplemented
            if not other.terms:
                return self
        else:
            self._lift(other)
        order = min(self.order, other.order)
        out = {e: v for e, v in self.terms.items() if sum(e) <= order}
        for e, v in other.terms.items():
            if sum(e) > order:
                continue
            total = out.get(e, 0) + v
            if total != 0:
                out[e] = total
            else:
                out.pop(e, None)
        return JetScalar._raw(self.nvars, order, out, self.mode)

    __radd__ = __add__

    def __neg__(self):
        return JetScalar._raw(self.nvars, self.order, {e: -v for e, v in self.terms.items()}, self.mode)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, factor):
        if factor == 0:
            return JetScalar._raw(self.nvars, self.order, {}, self.mode)
        return JetScalar._raw(self.nvars, self.order,
                              {e: v * factor for e, v in self.terms.items()}, self.mode)

    def __mul__(self, other):
        if not isinstance(other, JetScalar):
            if isinstance(other, (int, Fraction)):
                return self.scale(rational(Fraction(other), self.mode))
            if not isinstance(other, BASE_SCALARS):
                return NotImplemented
            return self.scale(other)
        self._lift(other)
        order = min(self.order, other.order)
        out = {}
        for ea, ca in self.terms.items():
            da = sum(ea)
            if da > order:
                continue
            for eb, cb in other.terms.items():
                if da + sum(eb) > order:
                    continue
                e = tuple(a + b for a, b in zip(ea, eb))
                out[e] = out.get(e, 0) + ca * cb
        out = {e: v for e, v in out.items() if v != 0}
        return JetScalar._raw(self.nvars, order, out, self.mode)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, JetScalar):
            return self * jet_inverse(other)
        if isinstance(other, (int, Fraction)):
            return self.scale(rational(1 / Fraction(other), self.mode))
        if not isinstance(other, BASE_SCALARS):
            return NotImplemented
        return self.scale(coerce(1, self.mode) / other)

    def __rtruediv__(self, other):
        return jet_inverse(self) * other

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result = JetScalar.constant(1, self.nvars, self.order, self.mode)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, JetScalar):
            try:
                other = self._lift(other)
            except Exception:
                return NotImplemented
            if other is None:
                return NotImplemented
        order = min(self.order, other.order)
        a = {e: v for e, v in self.terms.items() if sum(e) <= order}
        b = {e: v for e, v in other.terms.items() if sum(e) <= order}
        return a == b

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        body = " + ".join(f"{v}*x^{e}" for e, v in sorted(self.terms.items()))
        return f"JetScalar(K={self.order}, {body or '0'})"

    # ------------------------------------------------------------- queries

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, coerce(0, self.mode))

    def nilpotent_part(self):
        zero_exp = (0,) * self.nvars
        return JetScalar._raw(self.nvars, self.order,
                              {e: v for e, v in self.terms.items() if e != zero_exp}, self.mode)

    def magnitude(self):
        return max((magnitude(v) for v in self.terms.values()), default=0.0)

    def conjugate(self):
        return JetScalar._raw(self.nvars, self.order,
                              {e: v.conjugate() for e, v in self.terms.items()}, self.mode)

    def truncate(self, order):
        order = min(order, self.order)
        return JetScalar._raw(self.nvars, order,
                              {e: v for e, v in self.terms.items() if sum(e) <= order}, self.mode)

    def derivative(self, index):
        """
        Partial derivative in variable ``index``; the result has order K-1.

        Raises:
            DomainError: an order-0 jet knows nothing of its derivatives
        """
        if self.order < 1:
            raise DomainError("the derivative of an order-0 jet is not determined")
        out = {}
        for e, v in self.terms.items():
            k = e[index]
            if k == 0:
                continue
            lowered = e[:index] + (k - 1,) + e[index + 1:]
            out[lowered] = v * k
        return JetScalar._raw(self.nvars, self.order - 1, out, self.mode)

    def coefficient(self, exps):
        return self.terms.get(tuple(exps), coerce(0, self.mode))

    def evaluate(self, point):
        total = coerce(0, self.mode)
        for e, v in self.terms.items():
            term = v
            for x, k in zip(point, e):
                if k:
                    term = term * x ** k
            total = total + term
        return total

    def substitute(self, index, value):
        """Set variable ``index`` to the base scalar ``value``; the variable stays, now absent."""
        out = {}
        for e, v in self.terms.items():
            k = e[index]
            term = v * value ** k if k else v
            reduced = e[:index] + (0,) + e[index + 1:]
            out[reduced] = out.get(reduced, 0) + term
        return JetScalar(self.nvars, self.order, out, self.mode)

    def drop_variable(self, index):
        """Remove a variable that no longer occurs (after ``substitute``)."""
        out = {}
        for e, v in self.terms.items():
            if e[index]:
                raise DomainError(f"variable {index} still occurs in the jet")
            out[e[:index] + e[index + 1:]] = v
        return JetScalar(self.nvars - 1, self.order, out, self.mode)

    def add_variable(self):
        """Embed into one more (trailing) variable."""
        return JetScalar._raw(self.nvars + 1, self.order,
                              {e + (0,): v for e, v in self.terms.items()}, self.mode)

    def with_order(self, order):
        return JetScalar._raw(self.nvars, order,
                              {e: v for e, v in self.terms.items() if sum(e) <= order}, self.mode)

    def to_mode(self, mode):
        return JetScalar(self.nvars, self.order, {e: coerce(v, mode) for e, v in self.terms.items()}, mode)


def _series(p, coefficients):
    """Σ_k coefficients[k] * n^k with n the nilpotent part of p (k <= order)."""
    n = p.nilpotent_part()
    result = JetScalar.constant(0, p.nvars, p.order, p.mode)
    power = JetScalar.constant(1, p.nvars, p.order, p.mode)
    for k in range(p.order + 1):
        c = coefficients(k)
        if c != 0:
            result = result + power * c
        power = power * n
        if not power:
            break
    return result


def jet_exp(p):
    """
    exp of a jet: exp(p(0)) times the terminating series in the nilpotent part.

    Raises:
        ExactnessError: exact mode with p(0) != 0
    """
    a0 = p.constant_term()
    head = exp_scalar(a0, p.mode)
    return _series(p, lambda k: rational(Fraction(1, factorial(k)), p.mode)) * head


def jet_inverse(p):
    a0 = p.constant_term()
    if a0 == 0:
        raise DomainError("jet with vanishing constant term is not invertible")
    inv0 = coerce(1, p.mode) / a0
    return _series(p, lambda k: inv0 ** k * (-1) ** k) * inv0


def generalized_binomial(r, k):
    r = Fraction(r)
    value = Fraction(1)
    for i in range(k):
        value *= (r - i) / (i + 1)
    return value


def jet_power(p, exponent):
    """
    p ** exponent for a rational exponent via the binomial series around p(0).

    Raises:
        ExactnessError: exact mode and p(0) ** exponent is irrational
        DomainError: p(0) == 0 with a non-integral exponent
    """
    exponent = Fraction(exponent)
    if exponent.denominator == 1 and exponent >= 0:
        return p ** int(exponent)
    a0 = p.constant_term()
    if a0 == 0:
        raise DomainError("rational power of a jet vanishing at the base point")
    head = power_scalar(a0, exponent, p.mode)
    inv0 = coerce(1, p.mode) / a0
    return _series(p, lambda k: inv0 ** k * rational(generalized_binomial(exponent, k), p.mode)) * head


def jet_sqrt(p):
    return jet_power(p, Fraction(1, 2))
