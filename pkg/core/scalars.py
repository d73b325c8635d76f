"""
Scalars Module for Superform Lab

This module provides the two scalar modes used throughout the engine:

- exact: GaussianRational, a complex number with Fraction real and
  imaginary parts, so that an identity holding "exactly" really means
  the residual is the integer zero;
- float: Python complex numbers.

Mixing the two modes raises ScalarModeError. Plain ints and Fractions are
accepted by both modes and promoted on contact.
"""

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational

from core.errors import ExactnessError, ScalarModeError


class ScalarMode(str, Enum):
    EXACT = "exact"
    FLOAT = "float"


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)) and not isinstance(value, bool):
        return Fraction(value)
    if isinstance(value, bool):
        return Fraction(int(value))
    raise ScalarModeError(f"cannot use {type(value).__name__} as an exact rational")


@dataclass(frozen=True, eq=False)
class GaussianRational:
    """
    Exact complex number re + i*im with rational parts.

    Args:
        re: real part
        im: imaginary part (default 0)

    Example:
        >>> GaussianRational(Fraction(1, 2), 1) * GaussianRational(0, 2)
        GaussianRational(re=Fraction(-2, 1), im=Fraction(1, 1))
    """

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _as_fraction(self.re))
        object.__setattr__(self, "im", _as_fraction(self.im))

    @staticmethod
    def _lift(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (float, complex)):
            raise ScalarModeError("exact scalar combined with a floating-point value")
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        norm = o.re * o.re + o.im * o.im
        if norm == 0:
            raise ZeroDivisionError("division by exact zero")
        num = self * o.conjugate()
        return GaussianRational(num.re / norm, num.im / norm)

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, exponent):
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return GaussianRational(1) / (self ** -exponent)
        result = GaussianRational(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __eq__(self, other):
        try:
            o = self._lift(other)
        except ScalarModeError:
            return complex(self) == other
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __abs__(self):
        return math.hypot(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational(re={self.re!r}, im={self.im!r})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


I = GaussianRational(0, 1)


def mode_of(value):
    """Return the ScalarMode a base scalar belongs to, or None for plain rationals."""
    if isinstance(value, GaussianRational):
        return ScalarMode.EXACT
    if isinstance(value, (float, complex)):
        return ScalarMode.FLOAT
    return None


def coerce(value, mode):
    """
    Convert a number to the scalar type of ``mode``.

    Args:
        value: int, Fraction, GaussianRational, float or complex
        mode (ScalarMode): target mode

    Returns:
        GaussianRational in exact mode, complex in float mode

    Note:
        Floats are refused in exact mode even when integral, so that an exact
        run can never silently absorb a rounded constant.
    """
    mode = ScalarMode(mode)
    if mode is ScalarMode.EXACT:
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (float, complex)):
            raise ScalarModeError(f"floating value {value!r} in exact mode")
        return GaussianRational(value)
    if isinstance(value, GaussianRational):
        return complex(value)
    if isinstance(value, Fraction):
        return complex(float(value))
    return complex(value)


def zero(mode):
    return coerce(0, mode)


def one(mode):
    return coerce(1, mode)


def imaginary_unit(mode):
    return I if ScalarMode(mode) is ScalarMode.EXACT else 1j


def magnitude(value):
    """Absolute value as a float, for base scalars and anything with ``magnitude()``."""
    if hasattr(value, "magnitude"):
        return value.magnitude()
    return abs(complex(value)) if not isinstance(value, GaussianRational) else abs(value)


def exp_scalar(value, mode):
    """exp of a base scalar; exact only when the argument is exactly zero."""
    if ScalarMode(mode) is ScalarMode.EXACT:
        if value == 0:
            return GaussianRational(1)
        raise ExactnessError(f"exp({value}) is not rational")
    return cmath.exp(complex(value))


def _integer_root(n, k):
    if n < 0:
        return None
    if n in (0, 1):
        return n
    r = round(n ** (1.0 / k))
    for candidate in (r - 1, r, r + 1):
        if candidate >= 0 and candidate ** k == n:
            return candidate
    return None


def rational_root(q, k):
    """Exact k-th root of a non-negative Fraction, or None when it is irrational."""
    q = Fraction(q)
    num = _integer_root(q.numerator, k)
    den = _integer_root(q.denominator, k)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def power_scalar(value, exponent, mode):
    """
    value ** exponent for a rational exponent.

    In exact mode the base must be a non-negative rational with an exact
    root; otherwise ExactnessError. In float mode positive reals use the
    real power and everything else the principal branch.
    """
    exponent = Fraction(exponent)
    if ScalarMode(mode) is ScalarMode.EXACT:
        base = coerce(value, mode)
        if exponent.denominator == 1:
            return base ** int(exponent)
        if base.im != 0 or base.re < 0:
            raise ExactnessError(f"no exact rational power of {base}")
        root = rational_root(base.re, exponent.denominator)
        if root is None:
            raise ExactnessError(f"{base}^{exponent} is irrational")
        return GaussianRational(root) ** exponent.numerator
    z = complex(value)
    if z.imag == 0 and z.real > 0:
        return complex(z.real ** float(exponent))
    return z ** float(exponent)


def conjugate(value):
    if hasattr(value, "conjugate"):
        return value.conjugate()
    return value
