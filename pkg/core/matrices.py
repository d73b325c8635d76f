"""
Matrices Module for Superform Lab

This module provides AlgebraMatrix, a matrix whose entries are multivectors
over one signature, together with the matrix functions used by the
characteristic-form and superconnection code: supertrace, determinants of
even matrices, det^{1/2}(sin M / M), matrix exponentials and the map from
antisymmetric matrices to 2-forms in the psi generators.

Graded endomorphism algebras A ⊗̂ End(E) are stored sign-twisted: a
homogeneous a ⊗ T is the plain matrix a·τ^{|a|}·T, with τ the grading
involution. Plain matrix multiplication is then the graded tensor product,
and ``supertrace`` undoes the twist on odd coefficients.
"""

import cmath
import itertools
import logging
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.linalg import expm

from core.errors import (
    ConvergenceError,
    DomainError,
    ExactnessError,
    ParityError,
    ShapeError,
    SignatureMismatchError,
)
from core.grassmann import Multivector, reorder_sign
from core.jets import JetScalar, generalized_binomial, jet_inverse, monomials, rational
from core.scalars import ScalarMode, coerce, magnitude

logger = logging.getLogger(__name__)

# Terms of the sinc series used before giving up in float mode
SINC_MAX_TERMS = 200


@lru_cache(maxsize=None)
def bernoulli_number(n):
    """
    Bernoulli number B_n as a Fraction (Akiyama-Tanigawa, so B_1 = +1/2).

    Example:
        >>> bernoulli_number(4)
        Fraction(-1, 30)
    """
    table = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        table[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            table[j - 1] = j * (table[j - 1] - table[j])
    return table[0]


def permutation_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


class AlgebraMatrix:
    """
    Matrix with Multivector entries sharing one signature and scalar mode.

    Args:
        entries: 2-d numpy object array of Multivector
        grading: optional per-index integer degrees (square matrices only)
    """

    def __init__(self, entries, grading=None):
        entries = np.asarray(entries, dtype=object)
        if entries.ndim != 2 or entries.size == 0:
            raise ShapeError("AlgebraMatrix needs a non-empty 2-d array of entries")
        first = entries.flat[0]
        for entry in entries.flat:
            if not isinstance(entry, Multivector):
                raise ShapeError(f"entry of type {type(entry).__name__} is not a Multivector")
            if entry.signature != first.signature:
                raise SignatureMismatchError("matrix entries over different signatures")
        if grading is not None:
            grading = tuple(int(g) for g in grading)
            if entries.shape[0] != entries.shape[1] or len(grading) != entries.shape[0]:
                raise ShapeError("grading needs a square matrix with one degree per index")
        self.entries = entries
        self.grading = grading
        self.signature = first.signature
        self.mode = first.mode

    # ------------------------------------------------------------ builders

    @classmethod
    def zeros(cls, rows, cols, signature, mode, grading=None):
        entries = np.empty((rows, cols), dtype=object)
        for i in range(rows):
            for j in range(cols):
                entries[i, j] = Multivector.zero(signature, mode)
        return cls(entries, grading)

    @classmethod
    def identity(cls, size, signature, mode, grading=None):
        result = cls.zeros(size, size, signature, mode, grading)
        for i in range(size):
            result.entries[i, i] = Multivector.scalar(1, signature, mode)
        return result

    @classmethod
    def from_scalars(cls, values, signature, mode, grading=None):
        """Embed a matrix of base scalars or jets as degree-0 multivectors."""
        values = np.asarray(values, dtype=object)
        entries = np.empty(values.shape, dtype=object)
        for index, value in np.ndenumerate(values):
            if isinstance(value, np.generic):
                value = value.item()
            entries[index] = Multivector.scalar(value, signature, mode)
        return cls(entries, grading)

    @classmethod
    def tensor(cls, coefficient, operator, grading):
        """
        Sign-twisted image of coefficient ⊗ operator.

        Args:
            coefficient (Multivector): element of the coefficient algebra
            operator: square matrix of base scalars (or AlgebraMatrix of scalars)
            grading: degrees of the basis the operator acts on
        """
        operator = np.asarray(operator, dtype=object)
        tau = np.array([1 if g % 2 == 0 else -1 for g in grading], dtype=object)
        twisted = tau[:, None] * operator
        size = operator.shape[0]
        entries = np.empty((size, size), dtype=object)
        even, odd = coefficient.even_part(), coefficient.odd_part()
        for i in range(size):
            for j in range(size):
                plain, sign_twisted = operator[i, j], twisted[i, j]
                entries[i, j] = even * _plain(plain) + odd * _plain(sign_twisted)
        return cls(entries, grading)

    # ------------------------------------------------------------ algebra

    @property
    def shape(self):
        return self.entries.shape

    def _check(self, other):
        if not isinstance(other, AlgebraMatrix):
            raise ShapeError("expected an AlgebraMatrix")
        if other.signature != self.signature:
            raise SignatureMismatchError(f"{self.signature} vs {other.signature}")

    def _grading_with(self, other):
        return self.grading if self.grading is not None else other.grading

    def __add__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        return AlgebraMatrix(self.entries + other.entries, self._grading_with(other))

    def __sub__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ShapeError(f"cannot subtract {self.shape} and {other.shape}")
        return AlgebraMatrix(self.entries - other.entries, self._grading_with(other))

    def __neg__(self):
        return AlgebraMatrix(-self.entries, self.grading)

    def __matmul__(self, other):
        self._check(other)
        if self.shape[1] != other.shape[0]:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        return AlgebraMatrix(self.entries @ other.entries, self._grading_with(other))

    def scale(self, factor):
        """Multiply every entry on the left by ``factor`` (scalar, jet or multivector)."""
        out = np.empty(self.shape, dtype=object)
        for index, entry in np.ndenumerate(self.entries):
            out[index] = factor * entry if isinstance(factor, Multivector) else entry.scale(factor)
        return AlgebraMatrix(out, self.grading)

    def map(self, function):
        out = np.empty(self.shape, dtype=object)
        for index, entry in np.ndenumerate(self.entries):
            out[index] = function(entry)
        return AlgebraMatrix(out, self.grading)

    def transpose(self):
        return AlgebraMatrix(self.entries.T.copy(), self.grading)

    def power(self, k):
        if k < 0:
            raise ShapeError("negative matrix power")
        result = AlgebraMatrix.identity(self.shape[0], self.signature, self.mode, self.grading)
        for _ in range(k):
            result = result @ self
        return result

    def trace(self):
        if self.shape[0] != self.shape[1]:
            raise ShapeError("trace of a non-square matrix")
        total = Multivector.zero(self.signature, self.mode)
        for i in range(self.shape[0]):
            total = total + self.entries[i, i]
        return total

    def is_zero(self):
        return all(entry.is_zero() for entry in self.entries.flat)

    def magnitude(self):
        return max(entry.magnitude() for entry in self.entries.flat)

    def has_numeric_part(self):
        for entry in self.entries.flat:
            value = entry.scalar_part()
            if isinstance(value, JetScalar):
                value = value.constant_term()
            if value != 0:
                return True
        return False

    def chop(self, tolerance=None):
        return self.map(lambda e: e.chop() if tolerance is None else e.chop(tolerance))


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    return value


def supertrace(matrix):
    """
    Supertrace Σ_i (-1)^{deg i} M_ii of a graded algebra matrix.

    On the odd-coefficient part of the diagonal the twist τ^{|a|} already
    carries the sign, so those terms enter without it.

    Raises:
        ShapeError: non-square or ungraded matrix
    """
    if matrix.grading is None:
        raise ShapeError("supertrace needs a graded matrix")
    total = Multivector.zero(matrix.signature, matrix.mode)
    for i, degree in enumerate(matrix.grading):
        entry = matrix.entries[i, i]
        even = entry.even_part()
        total = total + (even if degree % 2 == 0 else -even) + entry.odd_part()
    return total


def det_even(matrix):
    """Leibniz determinant of a square matrix with even entries."""
    rows, cols = matrix.shape
    if rows != cols:
        raise ShapeError("determinant of a non-square matrix")
    if not all(entry.is_even() for entry in matrix.entries.flat):
        raise ParityError("det_even needs even entries")
    total = Multivector.zero(matrix.signature, matrix.mode)
    for perm in itertools.permutations(range(rows)):
        product = Multivector.scalar(permutation_sign(perm), matrix.signature, matrix.mode)
        for i, j in enumerate(perm):
            product = product * matrix.entries[i, j]
            if product.is_zero():
                break
        total = total + product
    return total


def _is_skew(matrix, tolerance=1e-12):
    for i in range(matrix.shape[0]):
        for j in range(matrix.shape[1]):
            residual = matrix.entries[i, j] + matrix.entries[j, i]
            if matrix.mode is ScalarMode.EXACT:
                if not residual.is_zero():
                    return False
            elif residual.magnitude() > tolerance:
                return False
    return True


def numeric_part(matrix):
    """The base-point values of the degree-0 parts of the entries, as a complex array."""
    out = np.zeros(matrix.shape, dtype=complex)
    for index, entry in np.ndenumerate(matrix.entries):
        value = entry.scalar_part()
        if isinstance(value, JetScalar):
            value = value.constant_term()
        out[index] = complex(value)
    return out


def _base_value(element):
    value = element.scalar_part()
    return value.constant_term() if isinstance(value, JetScalar) else value


def _nilpotent_series(unit_minus_one, coefficient):
    """Σ_k coefficient(k) u^k for an element u with vanishing base value; terminates."""
    terms = dict(unit_minus_one.terms)
    # rounding leaves a residue in the base value that would never die out
    head = terms.pop(0, None)
    if isinstance(head, JetScalar) and head.nilpotent_part():
        terms[0] = head.nilpotent_part()
    u = Multivector._raw(unit_minus_one.signature, terms, unit_minus_one.mode)
    total = Multivector.scalar(1, u.signature, u.mode)
    power = total
    k = 1
    while True:
        power = power * u
        if power.is_zero():
            return total
        total = total + power.scale(rational(coefficient(k), u.mode))
        k += 1


def inverse_even(element):
    """
    Inverse of an even element whose base value is non-zero.

    Raises:
        ParityError: odd monomials
        DomainError: the base value vanishes
    """
    if not element.is_even():
        raise ParityError("inverse_even needs an even element")
    head = element.scalar_part()
    if isinstance(head, JetScalar):
        head = jet_inverse(head)
    else:
        if head == 0:
            raise DomainError("even element with vanishing base value is not invertible")
        head = coerce(1, element.mode) / head
    unit = element.scale(head)
    return _nilpotent_series(unit - 1, lambda k: Fraction((-1) ** k)).scale(head)


def det_local(matrix):
    """
    Determinant of a square matrix with even entries by elimination, pivoting
    on the base values. Even entries commute, so this is the determinant over
    a commutative local ring.

    Raises:
        ParityError: odd entries
        DomainError: the numeric part is singular
    """
    size = matrix.shape[0]
    if matrix.shape != (size, size):
        raise ShapeError("determinant of a non-square matrix")
    if not all(entry.is_even() for entry in matrix.entries.flat):
        raise ParityError("det_local needs even entries")
    rows = [list(matrix.entries[i]) for i in range(size)]
    det = Multivector.scalar(1, matrix.signature, matrix.mode)
    for col in range(size):
        pivot = max(range(col, size), key=lambda r: magnitude(_base_value(rows[r][col])))
        if _base_value(rows[pivot][col]) == 0:
            raise DomainError("numeric part of the matrix is singular")
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        head = rows[col][col]
        det = det * head
        inverse = inverse_even(head)
        for r in range(col + 1, size):
            factor = rows[r][col] * inverse
            if factor.is_zero():
                continue
            rows[r] = [rows[r][k] - factor * rows[col][k] for k in range(size)]
    return det


def _paired_root(eigenvalues, sign):
    """
    Π f(sign·μ) over the eigenvalue pairs of a square with doubled spectrum,
    f(y) = sinh√y/√y; closest pairs are matched first and a lone eigenvalue
    (odd size) enters through its square root.
    """
    remaining = list(eigenvalues)
    product = 1 + 0j

    def f(mu):
        root = cmath.sqrt(sign * mu)
        return cmath.sinh(root) / root if root != 0 else 1

    while len(remaining) > 1:
        i, j = min(((i, j) for i in range(len(remaining)) for j in range(i + 1, len(remaining))),
                   key=lambda pair: abs(remaining[pair[0]] - remaining[pair[1]]))
        mu = (remaining.pop(j) + remaining.pop(i)) / 2
        product *= f(mu)
    if remaining:
        product *= cmath.sqrt(f(remaining[0]))
    return product


def _sqrtdet_entire(square, sign):
    """
    det^{1/2} f(sign·S) for S with a doubled spectrum (the square of a matrix
    similar to a skew one), f(y) = Σ y^k / (2k+1)!, branch equal to 1 at S = 0.

    Raises:
        ExactnessError: exact mode with a non-zero numeric part
        ConvergenceError: the float series did not settle
    """
    size = square.shape[0]
    numeric = numeric_part(square)
    has_numeric = bool(np.any(numeric))
    if has_numeric and square.mode is ScalarMode.EXACT:
        raise ExactnessError("det^{1/2}(sin M / M) of a matrix with a numeric part is not exact")
    signed = square if sign > 0 else -square
    power = AlgebraMatrix.identity(size, square.signature, square.mode)
    total = power
    for k in range(1, SINC_MAX_TERMS + 1):
        power = power @ signed
        if power.is_zero():
            break
        term = power.scale(rational(Fraction(1, factorial(2 * k + 1)), square.mode))
        total = total + term
        if square.mode is ScalarMode.FLOAT and term.magnitude() < 1e-17 * max(1.0, total.magnitude()):
            break
    else:
        raise ConvergenceError(f"sinc series still moving after {SINC_MAX_TERMS} terms")
    det = det_local(total)
    if not has_numeric:
        return _nilpotent_series(det - 1, lambda k: generalized_binomial(Fraction(1, 2), k))
    head = _paired_root(np.linalg.eigvals(numeric), sign)
    base = complex(_base_value(det))
    if abs(head * head - base) > 1e-8 * max(1.0, abs(base)):
        logger.warning("paired sinc root %r disagrees with the determinant %r", head, base)
    unit = det.scale(1 / base)
    return _nilpotent_series(unit - 1, lambda k: generalized_binomial(Fraction(1, 2), k)).scale(head)


def sqrtdet_sinc(matrix):
    """
    det^{1/2}(sin M / M) for skew M, the holomorphic branch equal to 1 at
    M = 0. The numeric part's root comes from the paired eigenvalues of M²,
    the nilpotent part from a terminating binomial series.

    Raises:
        ParityError: odd entries
        ShapeError: M not skew-symmetric
        ExactnessError: exact mode with a non-zero numeric part
    """
    if not all(entry.is_even() for entry in matrix.entries.flat):
        raise ParityError("sqrtdet_sinc needs even entries")
    if matrix.shape[0] != matrix.shape[1] or not _is_skew(matrix):
        raise ShapeError("sqrtdet_sinc needs a skew-symmetric matrix")
    return _sqrtdet_entire(matrix @ matrix, -1)


def sqrtdet_sinh_ratio(matrix):
    """
    det^{1/2}(sinh K / K) for K = M·diag(±1) with M skew, so that K² has a
    doubled spectrum; equals 1 at K = 0.

    Raises:
        ParityError: odd entries
        ShapeError: non-square K
    """
    if matrix.shape[0] != matrix.shape[1]:
        raise ShapeError("sqrtdet_sinh_ratio needs a square matrix")
    if not all(entry.is_even() for entry in matrix.entries.flat):
        raise ParityError("sqrtdet_sinh_ratio needs even entries")
    return _sqrtdet_entire(matrix @ matrix, 1)


def antisym_to_form(matrix, tolerance=1e-12):
    """
    ½⟨ψ, Aψ⟩ = ½ Σ_ij A_ij ψ_i ψ_j for an antisymmetric matrix with even
    entries in a signature with a psi block of matching size.
    """
    sig = matrix.signature
    size = matrix.shape[0]
    if matrix.shape != (size, size) or size != sig.n_psi:
        raise ShapeError(f"need an {sig.n_psi}x{sig.n_psi} matrix")
    if not all(entry.is_even() for entry in matrix.entries.flat):
        raise ParityError("antisym_to_form needs even entries")
    if not _is_skew(matrix, tolerance):
        raise ShapeError("antisym_to_form needs an antisymmetric matrix")
    half = rational(Fraction(1, 2), matrix.mode)
    total = Multivector.zero(sig, matrix.mode)
    for i in range(size):
        for j in range(size):
            if i == j or matrix.entries[i, j].is_zero():
                continue
            pair = Multivector.monomial(sig, (sig.psi(i), sig.psi(j)), matrix.mode)
            total = total + matrix.entries[i, j] * pair
    return total.scale(half)


def pairing(matrix, left="psi", right="psihat"):
    """
    ⟨ψ, Mψ̂⟩ = Σ_ij ψ_i M_ij ψ̂_j with the blocks chosen by ``left`` and ``right``.

    Entries may have either parity; the generator is kept on the left as
    written, so an odd entry picks up the reordering sign.
    """
    sig = matrix.signature
    size = matrix.shape[0]
    widths = {"psi": sig.n_psi, "psihat": sig.n_psihat}
    if left not in widths or right not in widths:
        raise ShapeError(f"unknown generator blocks {left!r}, {right!r}")
    if matrix.shape != (size, size) or widths[left] != size or widths[right] != size:
        raise ShapeError(f"need a {size}x{size} matrix matching both blocks")
    index = {"psi": sig.psi, "psihat": sig.psihat}
    total = Multivector.zero(sig, matrix.mode)
    for i in range(size):
        head = Multivector.generator(sig, index[left](i), matrix.mode)
        for j in range(size):
            entry = matrix.entries[i, j]
            if entry.is_zero():
                continue
            tail = Multivector.generator(sig, index[right](j), matrix.mode)
            total = total + head * entry * tail
    return total


# ---------------------------------------------------------------- functions


def power_series(matrix, coefficient, max_terms=64):
    """
    Σ_k coefficient(k) M^k for a matrix whose entries are nilpotent, exact
    in exact mode. Stops when M^k vanishes.

    Raises:
        ExactnessError: the series did not terminate within ``max_terms``
    """
    size = matrix.shape[0]
    power = AlgebraMatrix.identity(size, matrix.signature, matrix.mode, matrix.grading)
    total = AlgebraMatrix.zeros(size, size, matrix.signature, matrix.mode, matrix.grading)
    for k in range(max_terms):
        c = coefficient(k)
        if c:
            total = total + power.scale(rational(Fraction(c), matrix.mode))
        power = power @ matrix
        if power.is_zero():
            return total
    raise ExactnessError("matrix power series did not terminate; numeric part is not nilpotent")


class RegularRepresentation:
    """
    Left-regular representation of the finite-dimensional coefficient
    algebra spanned by the generators and jet monomials occurring in a
    matrix. An AlgebraMatrix of size n maps to a numeric (n·d)×(n·d)
    matrix, turning analytic matrix functions into ordinary numerics.
    """

    def __init__(self, matrix):
        union = 0
        jet_shape = None
        for entry in matrix.entries.flat:
            for mask, value in entry.terms.items():
                union |= mask
                if isinstance(value, JetScalar) and jet_shape is None:
                    jet_shape = (value.nvars, value.order)
        masks = []
        sub = union
        while True:
            masks.append(sub)
            if sub == 0:
                break
            sub = (sub - 1) & union
        masks.sort()
        self.jet_shape = jet_shape
        self.monos = monomials(*jet_shape) if jet_shape else [()]
        self.basis = [(m, e) for m in masks for e in self.monos]
        self.index = {b: i for i, b in enumerate(self.basis)}
        self.size = matrix.shape[0]
        self.dim = len(self.basis)
        self.signature = matrix.signature
        self.mode = matrix.mode
        self.grading = matrix.grading

    def _jet_terms(self, value):
        if isinstance(value, JetScalar):
            return value.terms.items()
        return (((0,) * (self.jet_shape[0] if self.jet_shape else 0), value),)

    def left(self, element):
        out = np.zeros((self.dim, self.dim), dtype=complex)
        order = self.jet_shape[1] if self.jet_shape else 0
        for col, (m2, e2) in enumerate(self.basis):
            for m1, value in element.terms.items():
                if m1 & m2:
                    continue
                sign = reorder_sign(m1, m2)
                for e1, c in self._jet_terms(value):
                    e = tuple(a + b for a, b in zip(e1, e2))
                    if sum(e) > order:
                        continue
                    out[self.index[(m1 | m2, e)], col] += sign * complex(c)
        return out

    def encode(self, matrix):
        d = self.dim
        big = np.zeros((self.size * d, self.size * d), dtype=complex)
        for (i, j), entry in np.ndenumerate(matrix.entries):
            if not entry.is_zero():
                big[i * d:(i + 1) * d, j * d:(j + 1) * d] = self.left(entry)
        return big

    def decode(self, big):
        """Entries of the algebra matrix whose regular image is ``big``."""
        d = self.dim
        unit = self.index[(0, self.monos[0])]
        entries = np.empty((self.size, self.size), dtype=object)
        for i in range(self.size):
            for j in range(self.size):
                column = big[i * d:(i + 1) * d, j * d + unit]
                grouped = {}
                for row, value in enumerate(column):
                    if value == 0:
                        continue
                    mask, e = self.basis[row]
                    grouped.setdefault(mask, {})[e] = value
                terms = {}
                for mask, coeffs in grouped.items():
                    if self.jet_shape:
                        terms[mask] = JetScalar(self.jet_shape[0], self.jet_shape[1], coeffs, self.mode)
                    else:
                        terms[mask] = coeffs[()]
                entries[i, j] = Multivector(self.signature, terms, self.mode)
        return AlgebraMatrix(entries, self.grading)


def apply_matrix_function(matrix, numeric_function):
    """
    Evaluate an analytic matrix function through the regular representation.

    Args:
        matrix (AlgebraMatrix): float-mode matrix
        numeric_function: callable taking and returning a numpy matrix

    Raises:
        ExactnessError: called in exact mode
    """
    if matrix.mode is ScalarMode.EXACT:
        raise ExactnessError("numeric matrix functions are float-mode only")
    rep = RegularRepresentation(matrix)
    logger.debug("regular representation of dimension %d", rep.size * rep.dim)
    return rep.decode(numeric_function(rep.encode(matrix)))


def algebra_expm(matrix):
    """
    exp(M) over the algebra: a terminating series when the numeric part is
    zero (exact in exact mode), otherwise scipy's expm on the regular image.
    """
    if not matrix.has_numeric_part():
        try:
            return power_series(matrix, lambda k: Fraction(1, factorial(k)))
        except ExactnessError:
            if matrix.mode is ScalarMode.EXACT:
                raise
    return apply_matrix_function(matrix, expm)
