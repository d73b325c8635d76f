"""
Grassmann Module for Superform Lab

This module provides the exterior algebra engine: a fixed ordered set of
odd generators (base 1-forms dx_a, the extra ds, the fiber blocks psi and
psi-hat, the auxiliary z), sparse multivectors keyed by generator bitmasks,
and the Berezin integrals, z-trace, contractions and exponentials built on
top of them.

Monomials are stored in canonical order (lowest bit first); the sign of a
product is the parity of the number of transpositions needed to merge two
canonical monomials.
"""

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from math import factorial

from core.errors import ParityError, ScalarModeError, ShapeError, SignatureMismatchError
from core.jets import BASE_SCALARS, JetScalar, jet_exp, rational
from core.scalars import ScalarMode, coerce, exp_scalar, magnitude, mode_of

logger = logging.getLogger(__name__)

# Largest number of odd generators a signature may carry
GENERATOR_CAP = 24

# Relative threshold used by Multivector.chop for float coefficients
DROP_TOLERANCE = 1e-14


@lru_cache(maxsize=None)
def above_parity(a):
    """
    Bitmask of the positions j with an odd number of generators of ``a``
    above j; cached per left factor.
    """
    mask, parity = 0, 0
    for j in range(a.bit_length() - 1, -1, -1):
        if parity:
            mask |= 1 << j
        parity ^= (a >> j) & 1
    return mask


def reorder_sign(a, b):
    """
    Sign of the product of canonical monomials ``a`` and ``b`` (as bitmasks).

    Every generator of ``b`` passes the generators of ``a`` that sit above
    it, one transposition each.
    """
    return -1 if (b & above_parity(a)).bit_count() & 1 else 1


def _remove_bits(mask, low, width):
    return (mask & ((1 << low) - 1)) | ((mask >> (low + width)) << low)


@dataclass(frozen=True)
class GeneratorSignature:
    """
    Ordered set of odd generators: dx_1..dx_m < ds < psi_1..psi_N < psihat_1..psihat_N' < z.

    Args:
        base_dim (int): number of dx generators
        extra_s (bool): whether the ds generator is present
        n_psi (int): size of the psi block
        n_psihat (int): size of the psi-hat block
        has_z (bool): whether the auxiliary z generator is present
    """

    base_dim: int
    extra_s: bool = False
    n_psi: int = 0
    n_psihat: int = 0
    has_z: bool = False

    def __post_init__(self):
        if min(self.base_dim, self.n_psi, self.n_psihat) < 0:
            raise ShapeError("generator counts must be non-negative")
        if self.count > GENERATOR_CAP:
            raise ShapeError(f"{self.count} generators exceed the cap of {GENERATOR_CAP}")

    @classmethod
    def standard(cls, base_dim, rank=0, extra_s=False, has_z=False, psihat=True):
        return cls(base_dim, extra_s, rank, rank if psihat else 0, has_z)

    @property
    def n_base(self):
        return self.base_dim + int(self.extra_s)

    @property
    def count(self):
        return self.n_base + self.n_psi + self.n_psihat + int(self.has_z)

    def dx(self, a):
        if not 0 <= a < self.base_dim:
            raise ShapeError(f"no dx_{a + 1} in {self}")
        return a

    @property
    def ds(self):
        if not self.extra_s:
            raise ShapeError("signature has no ds generator")
        return self.base_dim

    def psi(self, k):
        if not 0 <= k < self.n_psi:
            raise ShapeError(f"no psi_{k + 1} in {self}")
        return self.n_base + k

    def psihat(self, k):
        if not 0 <= k < self.n_psihat:
            raise ShapeError(f"no psihat_{k + 1} in {self}")
        return self.n_base + self.n_psi + k

    @property
    def z(self):
        if not self.has_z:
            raise ShapeError("signature has no z generator")
        return self.count - 1

    @property
    def base_mask(self):
        return (1 << self.n_base) - 1

    @property
    def psi_mask(self):
        return ((1 << self.n_psi) - 1) << self.n_base

    @property
    def psihat_mask(self):
        return ((1 << self.n_psihat) - 1) << (self.n_base + self.n_psi)

    def labels(self):
        names = [f"dx{a + 1}" for a in range(self.base_dim)]
        if self.extra_s:
            names.append("ds")
        names += [f"psi{k + 1}" for k in range(self.n_psi)]
        names += [f"psihat{k + 1}" for k in range(self.n_psihat)]
        if self.has_z:
            names.append("z")
        return names

    def without_psi(self):
        return replace(self, n_psi=0)

    def without_psihat(self):
        return replace(self, n_psihat=0)

    def without_z(self):
        return replace(self, has_z=False)

    def with_z(self):
        return replace(self, has_z=True)

    def without_s(self):
        return replace(self, extra_s=False)

    def __str__(self):
        return "<" + " ".join(self.labels()) + ">"


def _coefficient(value, mode):
    if isinstance(value, JetScalar):
        if value.mode is not mode:
            raise ScalarModeError("jet coefficient in the wrong scalar mode")
        return value
    value_mode = mode_of(value)
    if value_mode is not None and value_mode is not mode:
        raise ScalarModeError(f"{value_mode.value} coefficient in a {mode.value} multivector")
    return coerce(value, mode)


class Multivector:
    """
    Sparse element of the exterior algebra over a GeneratorSignature.

    Coefficients are base scalars of one ScalarMode or JetScalars of that
    mode. Exact zeros are never stored; ``chop`` applies the relative float
    drop tolerance.

    Example:
        >>> sig = GeneratorSignature.standard(0, 2)
        >>> p1, p2 = Multivector.generator(sig, sig.psi(0)), Multivector.generator(sig, sig.psi(1))
        >>> (p1 * p2 + p2 * p1).is_zero()
        True
    """

    __slots__ = ("signature", "terms", "mode")
    __hash__ = None

    def __init__(self, signature, terms=None, mode=ScalarMode.FLOAT):
        self.signature = signature
        self.mode = ScalarMode(mode)
        limit = 1 << signature.count
        clean = {}
        for mask, value in (terms or {}).items():
            if not 0 <= mask < limit:
                raise SignatureMismatchError(f"monomial {mask:b} outside {signature}")
            value = _coefficient(value, self.mode)
            if value:
                clean[mask] = value
        self.terms = clean

    @classmethod
    def _raw(cls, signature, terms, mode):
        mv = cls.__new__(cls)
        mv.signature = signature
        mv.terms = terms
        mv.mode = mode
        return mv

    @classmethod
    def scalar(cls, value, signature, mode=ScalarMode.FLOAT):
        return cls(signature, {0: value}, mode)

    @classmethod
    def zero(cls, signature, mode=ScalarMode.FLOAT):
        return cls._raw(signature, {}, ScalarMode(mode))

    @classmethod
    def generator(cls, signature, index, mode=ScalarMode.FLOAT, coefficient=1):
        return cls(signature, {1 << index: coefficient}, mode)

    @classmethod
    def monomial(cls, signature, indices, mode=ScalarMode.FLOAT, coefficient=1):
        """Product of generators in the given (not necessarily canonical) order."""
        mask = 0
        sign = 1
        for index in indices:
            bit = 1 << index
            if mask & bit:
                return cls.zero(signature, mode)
            sign *= reorder_sign(mask, bit)
            mask |= bit
        return cls(signature, {mask: coefficient if sign > 0 else -coefficient}, mode)

    # ------------------------------------------------------------ algebra

    def _lift(self, other):
        if isinstance(other, Multivector):
            if other.signature != self.signature:
                raise SignatureMismatchError(f"{self.signature} vs {other.signature}")
            if other.mode is not self.mode:
                raise ScalarModeError("exact and float multivectors combined")
            return other
        if isinstance(other, BASE_SCALARS) or isinstance(other, JetScalar):
            return Multivector(self.signature, {0: other}, self.mode)
        return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        if not other.terms:
            return self
        out = dict(self.terms)
        for mask, value in other.terms.items():
            if mask in out:
                total = out[mask] + value
                if total:
                    out[mask] = total
                else:
                    del out[mask]
            else:
                out[mask] = value
        return Multivector._raw(self.signature, out, self.mode)

    __radd__ = __add__

    def __neg__(self):
        return Multivector._raw(self.signature, {m: -v for m, v in self.terms.items()}, self.mode)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, factor):
        """Multiply by an even scalar (base scalar or jet)."""
        if isinstance(factor, (int, Fraction)):
            factor = rational(Fraction(factor), self.mode)
        out = {}
        for mask, value in self.terms.items():
            product = value * factor
            if product:
                out[mask] = product
        return Multivector._raw(self.signature, out, self.mode)

    def __mul__(self, other):
        if not isinstance(other, Multivector):
            if isinstance(other, BASE_SCALARS) or isinstance(other, JetScalar):
                return self.scale(other)
            return NotImplemented
        self._lift(other)
        out = {}
        for ma, ca in self.terms.items():
            above = above_parity(ma)
            for mb, cb in other.terms.items():
                if ma & mb:
                    continue
                product = ca * cb
                if (mb & above).bit_count() & 1:
                    product = -product
                mask = ma | mb
                if mask in out:
                    out[mask] = out[mask] + product
                else:
                    out[mask] = product
        return Multivector._raw(self.signature, {m: v for m, v in out.items() if v}, self.mode)

    def __rmul__(self, other):
        if isinstance(other, BASE_SCALARS) or isinstance(other, JetScalar):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(rational(1 / Fraction(other), self.mode))
        return self.scale(coerce(1, self.mode) / other)

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result = Multivector.scalar(1, self.signature, self.mode)
        for _ in range(exponent):
            result = result * self
            if not result.terms:
                break
        return result

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            other = self._lift(other) if isinstance(other, (BASE_SCALARS, JetScalar)) else None
            if other is None:
                return NotImplemented
        return self.signature == other.signature and self.terms == other.terms

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        labels = self.signature.labels()
        parts = []
        for mask in sorted(self.terms, key=lambda m: (m.bit_count(), m)):
            names = [labels[i] for i in range(self.signature.count) if mask >> i & 1]
            parts.append(f"{self.terms[mask]}*{'^'.join(names) or '1'}")
        return "Multivector(" + (" + ".join(parts) or "0") + ")"

    # ------------------------------------------------------------ queries

    def is_zero(self):
        return not self.terms

    def is_even(self):
        return all(m.bit_count() % 2 == 0 for m in self.terms)

    def is_odd(self):
        return all(m.bit_count() % 2 == 1 for m in self.terms)

    def even_part(self):
        return self.filter(lambda m: m.bit_count() % 2 == 0)

    def odd_part(self):
        return self.filter(lambda m: m.bit_count() % 2 == 1)

    def filter(self, predicate):
        return Multivector._raw(self.signature,
                                {m: v for m, v in self.terms.items() if predicate(m)}, self.mode)

    def scalar_part(self):
        return self.terms.get(0, coerce(0, self.mode))

    def coefficient(self, mask):
        return self.terms.get(mask, coerce(0, self.mode))

    def form_degree_part(self, degree):
        base = self.signature.base_mask
        return self.filter(lambda m: (m & base).bit_count() == degree)

    def form_degrees(self):
        base = self.signature.base_mask
        return sorted({(m & base).bit_count() for m in self.terms})

    def magnitude(self):
        return max((magnitude(v) for v in self.terms.values()), default=0.0)

    def conjugate(self):
        return Multivector._raw(self.signature,
                                {m: v.conjugate() for m, v in self.terms.items()}, self.mode)

    def map_coefficients(self, function):
        out = {}
        for mask, value in self.terms.items():
            value = function(value)
            if value:
                out[mask] = value
        return Multivector(self.signature, out, self.mode)

    def chop(self, tolerance=DROP_TOLERANCE):
        """Drop float coefficients below ``tolerance`` relative to the largest one."""
        if self.mode is ScalarMode.EXACT or not self.terms:
            return self
        scale = self.magnitude()
        return self.filter(lambda m: magnitude(self.terms[m]) > tolerance * scale)

    def embed(self, signature):
        """Re-express in a larger signature that contains every generator of this one."""
        source = self.signature.labels()
        target = {name: i for i, name in enumerate(signature.labels())}
        try:
            index_map = [target[name] for name in source]
        except KeyError as missing:
            raise SignatureMismatchError(f"{signature} lacks generator {missing}") from None
        out = {}
        for mask, value in self.terms.items():
            new = 0
            for i, j in enumerate(index_map):
                if mask >> i & 1:
                    new |= 1 << j
            out[new] = value
        return Multivector._raw(signature, out, self.mode)


def wedge(a, b):
    """Graded-commutative product a ∧ b."""
    if not isinstance(a, Multivector) or not isinstance(b, Multivector):
        raise SignatureMismatchError("wedge expects two multivectors")
    return a * b


def berezin_single(a, block="psi"):
    """
    Berezin integral over one fiber block.

    Extracts the coefficient of the top monomial of the block. For the psi
    block a monomial dx_I psi_top R gives dx_I R; for the psi-hat block the
    top monomial is first moved to the left of the psi generators.
    """
    sig = a.signature
    if block == "psi":
        width, low, block_mask = sig.n_psi, sig.n_base, sig.psi_mask
        target = sig.without_psi()
    elif block == "psihat":
        width, low, block_mask = sig.n_psihat, sig.n_base + sig.n_psi, sig.psihat_mask
        target = sig.without_psihat()
    else:
        raise ShapeError(f"unknown generator block {block!r}")
    out = {}
    for mask, value in a.terms.items():
        if mask & block_mask != block_mask:
            continue
        if block == "psihat" and (width * (mask & sig.psi_mask).bit_count()) % 2:
            value = -value
        out[_remove_bits(mask, low, width)] = value
    return Multivector._raw(target, out, a.mode)


def berezin_double(a):
    """Berezin integral over psi_1..psi_N psihat_1..psihat_N, canonical orientation."""
    sig = a.signature
    top = sig.psi_mask | sig.psihat_mask
    width = sig.n_psi + sig.n_psihat
    out = {}
    for mask, value in a.terms.items():
        if mask & top == top:
            out[_remove_bits(mask, sig.n_base, width)] = value
    target = GeneratorSignature(sig.base_dim, sig.extra_s, 0, 0, sig.has_z)
    return Multivector._raw(target, out, a.mode)


def tr_z(a):
    """Return a_1 where a = a_0 + z a_1 (z written on the left)."""
    sig = a.signature
    z_bit = 1 << sig.z
    out = {}
    for mask, value in a.terms.items():
        if mask & z_bit:
            rest = mask ^ z_bit
            out[rest] = -value if rest.bit_count() % 2 else value
    return Multivector._raw(sig.without_z(), out, a.mode)


def interior_mult(v, block, a):
    """
    Contraction i_v on the psi or psi-hat block: the odd derivation sending
    the k-th block generator to v[k].
    """
    sig = a.signature
    if block == "psi":
        width, low = sig.n_psi, sig.n_base
    elif block == "psihat":
        width, low = sig.n_psihat, sig.n_base + sig.n_psi
    else:
        raise ShapeError(f"unknown generator block {block!r}")
    if len(v) != width:
        raise ShapeError(f"contraction vector of length {len(v)} for a block of {width}")
    result = Multivector.zero(sig, a.mode)
    for k, vk in enumerate(v):
        if isinstance(vk, (int, Fraction)) and vk == 0:
            continue
        bit = 1 << (low + k)
        out = {}
        for mask, value in a.terms.items():
            if not mask & bit:
                continue
            term = value * vk
            if (mask & (bit - 1)).bit_count() % 2:
                term = -term
            out[mask ^ bit] = term
        result = result + Multivector(sig, out, a.mode)
    return result


def exp_even(a):
    """
    Exponential of an even multivector: exp(a_0) times the terminating
    series in the nilpotent part.

    Raises:
        ParityError: ``a`` has an odd monomial
        ExactnessError: exact mode and exp(a_0) is irrational
    """
    if not a.is_even():
        raise ParityError("exp_even called on a non-even multivector")
    a0 = a.scalar_part()
    nilpotent = a.filter(lambda m: m != 0)
    head = jet_exp(a0) if isinstance(a0, JetScalar) else exp_scalar(a0, a.mode)
    result = Multivector.scalar(1, a.signature, a.mode)
    power = result
    k = 1
    while True:
        power = power * nilpotent
        if not power.terms:
            break
        result = result + power.scale(rational(Fraction(1, factorial(k)), a.mode))
        k += 1
    logger.debug("exp_even: nilpotent series of %d terms over %s", k - 1, a.signature)
    return result.scale(head)


def split_ds(form):
    """
    Split a form on an extended germ as X + ds ∧ T.

    Returns:
        tuple: (X, T), both without the ds generator
    """
    sig = form.signature
    ds_bit = 1 << sig.ds
    below = ds_bit - 1
    target = sig.without_s()
    spatial, transgression = {}, {}
    for mask, value in form.terms.items():
        if mask & ds_bit:
            if (mask & below).bit_count() % 2:
                value = -value
            transgression[_remove_bits(mask, sig.ds, 1)] = value
        else:
            spatial[_remove_bits(mask, sig.ds, 1)] = value
    return (Multivector._raw(target, spatial, form.mode),
            Multivector._raw(target, transgression, form.mode))
