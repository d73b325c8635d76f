"""
Flat Bundle Module for Superform Lab

This module provides the flat-bundle germ (a metric jet in a flat frame),
the form ω = h⁻¹dh, invariant polynomials in the power sums n_j, and the
characteristic forms P(∇, h) and P^z(∇, h) built from them, together with
the Newton / Cayley-Hamilton checks, the Λ(F̄*) character and the Φ_j
cochain evaluator.

In a flat frame the flat connection is the trivial d, so a germ is fully
described by its metric jet h(x).
"""

import itertools
import logging
import math
from dataclasses import dataclass, field as dataclass_field, replace
from enum import Enum
from fractions import Fraction
from functools import cached_property
from math import comb, factorial

import numpy as np

from core.errors import DomainError, ShapeError
from core.grassmann import GeneratorSignature, Multivector, split_ds, tr_z
from core.jet_forms import d, form_residual, function_form
from core.jets import JetScalar, jet_inverse, monomials, rational
from core.matrices import AlgebraMatrix, bernoulli_number, permutation_sign
from core.scalars import GaussianRational, ScalarMode, coerce, magnitude

logger = logging.getLogger(__name__)

# Random germ coefficients are k / RANDOM_DENOMINATOR with |k| <= RANDOM_NUMERATOR
RANDOM_NUMERATOR = 3
RANDOM_DENOMINATOR = 8

# Hermiticity tolerance for float metrics
HERMITIAN_TOLERANCE = 1e-12


class Field(str, Enum):
    REAL = "real"
    COMPLEX = "complex"


# ---------------------------------------------------------------- jet matrices


def jet_matrix_product(a, b):
    return np.asarray(a, dtype=object) @ np.asarray(b, dtype=object)


def jet_matrix_inverse(matrix):
    """
    Inverse of a square matrix of jets by Gauss-Jordan elimination.

    Raises:
        DomainError: the value at the base point is singular
    """
    size = matrix.shape[0]
    work = np.array(matrix, dtype=object)
    sample = work.flat[0]
    nvars, order, mode = sample.nvars, sample.order, sample.mode
    inverse = np.empty((size, size), dtype=object)
    for i in range(size):
        for j in range(size):
            inverse[i, j] = JetScalar.constant(1 if i == j else 0, nvars, order, mode)
    for col in range(size):
        pivot = max(range(col, size), key=lambda r: magnitude(work[r, col].constant_term()))
        if work[pivot, col].constant_term() == 0:
            raise DomainError("metric is singular at the base point")
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
            inverse[[col, pivot]] = inverse[[pivot, col]]
        scale = jet_inverse(work[col, col])
        work[col] = [entry * scale for entry in work[col]]
        inverse[col] = [entry * scale for entry in inverse[col]]
        for row in range(size):
            if row == col or not work[row, col]:
                continue
            factor = work[row, col]
            work[row] = [a - factor * b for a, b in zip(work[row], work[col])]
            inverse[row] = [a - factor * b for a, b in zip(inverse[row], inverse[col])]
    return inverse


def jet_determinant(matrix):
    size = matrix.shape[0]
    total = None
    for perm in itertools.permutations(range(size)):
        term = matrix[0, perm[0]]
        for i in range(1, size):
            term = term * matrix[i, perm[i]]
        term = term * permutation_sign(perm)
        total = term if total is None else total + term
    return total


def jet_matrix_exp(matrix):
    """exp of a jet matrix vanishing at the base point (terminating series)."""
    size = matrix.shape[0]
    sample = matrix.flat[0]
    identity = np.empty((size, size), dtype=object)
    for i in range(size):
        for j in range(size):
            identity[i, j] = JetScalar.constant(1 if i == j else 0, sample.nvars, sample.order, sample.mode)
    total = identity.copy()
    power = identity
    for k in range(1, sample.order + 1):
        power = jet_matrix_product(power, matrix)
        total = total + power * rational(Fraction(1, factorial(k)), sample.mode)
    return total


def jet_conjugate_transpose(matrix):
    out = np.empty(matrix.shape[::-1], dtype=object)
    for (i, j), entry in np.ndenumerate(matrix):
        out[j, i] = entry.conjugate()
    return out


def gram_minor_metric(metric, p):
    """Metric of Λ^p in the basis e_I (I increasing) induced by ``metric``."""
    size = metric.shape[0]
    subsets = list(itertools.combinations(range(size), p))
    out = np.empty((len(subsets), len(subsets)), dtype=object)
    for a, rows in enumerate(subsets):
        for b, cols in enumerate(subsets):
            out[a, b] = jet_determinant(metric[np.ix_(rows, cols)])
    return out


# -------------------------------------------------------------------- germs


@dataclass(frozen=True, eq=False)
class FlatBundleGerm:
    """
    Germ of a flat vector bundle with metric, in a flat frame.

    Args:
        rank (int): N
        base_dim (int): m
        metric: N x N numpy object array of JetScalar (symmetric or Hermitian)
        field (Field): real or complex
        mode (ScalarMode): scalar mode of every jet
        order (int): jet order K
        lattice_scale: c, with Λ = cZ^N in the flat frame
        holonomy: optional integer matrix, kept as documentation only
        unimodular (bool): det h = 1 exactly as a jet
        extra_s (bool): the germ lives on B x R+
        s0: base value of s on an extended germ
    """

    rank: int
    base_dim: int
    metric: np.ndarray
    field: Field = Field.REAL
    mode: ScalarMode = ScalarMode.FLOAT
    order: int = 2
    lattice_scale: object = 1
    holonomy: tuple = None
    unimodular: bool = False
    extra_s: bool = False
    s0: object = None
    label: str = dataclass_field(default="germ")

    def __post_init__(self):
        if self.metric.shape != (self.rank, self.rank):
            raise ShapeError(f"metric of shape {self.metric.shape} for rank {self.rank}")
        for entry in self.metric.flat:
            if not isinstance(entry, JetScalar) or entry.nvars != self.nvars:
                raise ShapeError("metric entries must be jets over the base coordinates")
        if self.lattice_scale <= 0:
            raise DomainError("lattice scale must be positive")
        h0 = self.metric_at_zero()
        if np.max(np.abs(h0 - h0.conj().T)) > HERMITIAN_TOLERANCE * max(1.0, np.max(np.abs(h0))):
            raise DomainError("metric is not Hermitian at the base point")
        if np.min(np.linalg.eigvalsh(h0)) <= 0:
            raise DomainError("metric is not positive definite at the base point")

    @property
    def nvars(self):
        return self.base_dim + int(self.extra_s)

    @property
    def signature(self):
        return GeneratorSignature(self.base_dim, self.extra_s)

    def metric_at_zero(self):
        out = np.zeros((self.rank, self.rank), dtype=complex)
        for index, entry in np.ndenumerate(self.metric):
            out[index] = complex(entry.constant_term())
        return out

    @cached_property
    def inverse(self):
        return jet_matrix_inverse(self.metric)

    @cached_property
    def det(self):
        return jet_determinant(self.metric)

    def jet(self, value):
        return JetScalar.constant(value, self.nvars, self.order, self.mode)

    def covolume(self):
        """Vol(E/Λ) = sqrt(det h(0)) c^N (equal to c^N for a unimodular germ)."""
        det0 = float(np.real(np.linalg.det(self.metric_at_zero())))
        return math.sqrt(det0) * float(self.lattice_scale) ** self.rank

    @classmethod
    def from_metric(cls, metric, base_dim, mode=ScalarMode.FLOAT, order=2, field=Field.REAL, **kwargs):
        """Build a germ from a nested list of jets or base scalars."""
        metric = np.asarray(metric, dtype=object)
        out = np.empty(metric.shape, dtype=object)
        for index, entry in np.ndenumerate(metric):
            if not isinstance(entry, JetScalar):
                entry = JetScalar.constant(entry, base_dim, order, mode)
            out[index] = entry
        return cls(metric.shape[0], base_dim, out, Field(field), ScalarMode(mode), order, **kwargs)


def _random_entry(rng, mode, complex_entry):
    re = Fraction(int(rng.integers(-RANDOM_NUMERATOR, RANDOM_NUMERATOR + 1)), RANDOM_DENOMINATOR)
    im = Fraction(int(rng.integers(-RANDOM_NUMERATOR, RANDOM_NUMERATOR + 1)), RANDOM_DENOMINATOR) \
        if complex_entry else Fraction(0)
    return coerce(GaussianRational(re, im), mode)


def random_germ(rank, base_dim, order=2, mode=ScalarMode.FLOAT, seed=1, field=Field.REAL,
                unimodular=False, lattice_scale=1, frame=True):
    """
    Reproducible random germ h = Pᴴ exp(S(x)) P.

    S(x) is a random symmetric (Hermitian) jet vanishing at the base point,
    traceless when ``unimodular``; P is unit upper-triangular with small
    integer entries (rescaled by a random diagonal unless unimodular), so
    every coefficient is rational and det h = 1 exactly for unimodular germs.

    Example:
        >>> g = random_germ(2, 3, mode=ScalarMode.EXACT, seed=7, unimodular=True)
        >>> g.det == 1
        True
    """
    mode = ScalarMode(mode)
    field = Field(field)
    rng = np.random.default_rng(seed)
    is_complex = field is Field.COMPLEX
    generator = np.empty((rank, rank), dtype=object)
    for i in range(rank):
        for j in range(rank):
            generator[i, j] = JetScalar(base_dim, order, {}, mode)
    for exps in monomials(base_dim, order):
        if sum(exps) == 0:
            continue
        for i in range(rank):
            for j in range(i, rank):
                value = _random_entry(rng, mode, is_complex and i != j)
                if value == 0:
                    continue
                term = JetScalar(base_dim, order, {exps: value}, mode)
                generator[i, j] = generator[i, j] + term
                if i != j:
                    generator[j, i] = generator[j, i] + term.conjugate()
    if unimodular:
        trace = sum((generator[i, i] for i in range(rank)), JetScalar(base_dim, order, {}, mode))
        shift = trace * rational(Fraction(1, rank), mode)
        for i in range(rank):
            generator[i, i] = generator[i, i] - shift
    core = jet_matrix_exp(generator)
    frame_matrix = np.empty((rank, rank), dtype=object)
    for i in range(rank):
        scale = 1 if unimodular or not frame else Fraction(int(rng.integers(2, 5)), 2)
        for j in range(rank):
            if j < i or not frame:
                value = 1 if i == j else 0
            elif j == i:
                value = scale
            else:
                value = int(rng.integers(-1, 2))
            frame_matrix[i, j] = JetScalar.constant(value, base_dim, order, mode)
    metric = jet_matrix_product(jet_matrix_product(jet_conjugate_transpose(frame_matrix), core), frame_matrix)
    logger.debug("random %s germ rank=%d m=%d K=%d seed=%s", field.value, rank, base_dim, order, seed)
    return FlatBundleGerm(rank, base_dim, metric, field, mode, order, lattice_scale,
                          unimodular=unimodular, label=f"random(seed={seed})")


def dual_germ(germ):
    """The (anti)dual bundle in the dual flat frame, with metric h⁻¹."""
    return replace(germ, metric=germ.inverse, label=f"dual({germ.label})")


def lambda_power_germ(germ, p):
    """Λ^p of the antidual of ``germ``, with the Gram-minor metric of h⁻¹."""
    if not 0 <= p <= germ.rank:
        raise DomainError(f"no exterior power {p} of a rank-{germ.rank} bundle")
    if p == 0:
        one = np.array([[germ.jet(1)]], dtype=object)
        return replace(germ, rank=1, metric=one, unimodular=True, label=f"Λ^0({germ.label})")
    metric = gram_minor_metric(germ.inverse, p)
    return replace(germ, rank=metric.shape[0], metric=metric, unimodular=False,
                   label=f"Λ^{p}({germ.label})")


# -------------------------------------------------------------------- omega


def embed_matrix(matrix, signature):
    return matrix.map(lambda entry: entry.embed(signature))


def omega(germ, signature=None):
    """
    ω = h⁻¹ dh as an N x N matrix of jet 1-forms.

    Args:
        germ (FlatBundleGerm): the germ
        signature: optional larger signature to embed the entries into
    """
    base = germ.signature
    hinv = AlgebraMatrix.from_scalars(germ.inverse, base, germ.mode)
    dh = np.empty(germ.metric.shape, dtype=object)
    for index, entry in np.ndenumerate(germ.metric):
        dh[index] = d(function_form(entry, base))
    result = hinv @ AlgebraMatrix(dh)
    return embed_matrix(result, signature) if signature is not None else result


def dual_omega(germ, signature=None):
    """ω of the antidual bundle; equals -h ω h⁻¹."""
    return omega(dual_germ(germ), signature)


def transpose_sign_residual(germ, power):
    """
    Residual of (hω^j)ᵀ = (-1)^{j(j-1)/2} hω^j for a real germ: ω is
    h-symmetric, so hω^j is a symmetric matrix up to the reordering sign.
    """
    h = AlgebraMatrix.from_scalars(germ.metric, germ.signature, germ.mode)
    w = h @ omega(germ).power(power)
    sign = -1 if (power * (power - 1) // 2) % 2 else 1
    diff = w.transpose() - w.scale(sign)
    return max(form_residual(entry) for entry in diff.entries.flat)


def flatness_residual(germ):
    """
    Residual of ∇^u ω = dω + ω² = 0, valid to jet order K - 2.

    Raises:
        DomainError: K < 2 leaves no order at which dω is known
    """
    if germ.order < 2:
        raise DomainError(f"dω + ω² needs jet order K >= 2, got K={germ.order}")
    w = omega(germ)
    total = w.map(d) + (w @ w)
    return max(form_residual(entry, order=germ.order - 2) for entry in total.entries.flat)


# ---------------------------------------------------- invariant polynomials


class InvariantPolynomial:
    """
    Polynomial in the power sums n_1, n_2, ... truncated at a weight cap.

    A term is keyed by an exponent tuple (e_1, ..., e_W) of weight
    Σ k·e_k <= W; coefficients are Fractions, so the polynomial is real.
    """

    def __init__(self, weight, terms=None, name="P"):
        self.weight = weight
        self.name = name
        self.terms = {}
        for exps, value in (terms or {}).items():
            exps = tuple(exps) + (0,) * (weight - len(exps))
            if self._weight_of(exps) <= weight and value != 0:
                self.terms[exps] = Fraction(value)

    @staticmethod
    def _weight_of(exps):
        return sum((k + 1) * e for k, e in enumerate(exps))

    @classmethod
    def constant(cls, value, weight, name="const"):
        return cls(weight, {(0,) * weight: value}, name)

    @classmethod
    def power_sum(cls, j, weight=None, name=None):
        weight = weight if weight is not None else j
        if j < 1:
            raise DomainError("power sums start at n_1")
        exps = [0] * weight
        if j > weight:
            return cls(weight, {}, name or f"n{j}")
        exps[j - 1] = 1
        return cls(weight, {tuple(exps): 1}, name or f"n{j}")

    def __add__(self, other):
        out = dict(self.terms)
        for exps, value in other.terms.items():
            out[exps] = out.get(exps, 0) + value
        return InvariantPolynomial(self.weight, out, f"({self.name}+{other.name})")

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, factor):
        return InvariantPolynomial(self.weight, {e: v * Fraction(factor) for e, v in self.terms.items()},
                                   self.name)

    def __mul__(self, other):
        out = {}
        for ea, va in self.terms.items():
            for eb, vb in other.terms.items():
                exps = tuple(a + b for a, b in zip(ea, eb))
                if self._weight_of(exps) <= self.weight:
                    out[exps] = out.get(exps, 0) + va * vb
        return InvariantPolynomial(self.weight, out, f"{self.name}*{other.name}")

    def weight_part(self, j):
        return InvariantPolynomial(self.weight, {e: v for e, v in self.terms.items()
                                                 if self._weight_of(e) == j}, f"{self.name}[{j}]")

    def value_at_zero(self):
        """P(0): the constant term (every n_j vanishes at 0 for j >= 1)."""
        return self.terms.get((0,) * self.weight, Fraction(0))

    def exp(self):
        """exp of a polynomial without constant term, truncated at the weight cap."""
        if self.value_at_zero() != 0:
            raise DomainError("exp of an invariant polynomial with a constant term")
        total = InvariantPolynomial.constant(1, self.weight)
        power = InvariantPolynomial.constant(1, self.weight)
        for k in range(1, self.weight + 1):
            power = power * self
            total = total + power.scale(Fraction(1, factorial(k)))
        total.name = f"exp({self.name})"
        return total

    def evaluate(self, traces, unit):
        """
        Substitute n_k -> traces[k] (even multivectors), returning a multivector.

        Args:
            traces (dict): k -> Multivector
            unit (Multivector): the unit of the target algebra
        """
        total = unit.scale(0)
        for exps, value in sorted(self.terms.items()):
            term = unit.scale(rational(value, unit.mode))
            for k, e in enumerate(exps):
                for _ in range(e):
                    term = term * traces[k + 1]
                if term.is_zero():
                    break
            total = total + term
        return total

    def __repr__(self):
        return f"InvariantPolynomial({self.name}, weight={self.weight}, terms={len(self.terms)})"


def total_chern(weight):
    """c(A) = det(1 + A) = exp(Σ (-1)^{k+1} n_k / k)."""
    log = InvariantPolynomial(weight)
    for k in range(1, weight + 1):
        log = log + InvariantPolynomial.power_sum(k, weight).scale(Fraction((-1) ** (k + 1), k))
    result = log.exp()
    result.name = "c"
    return result


def chern_class(j, weight=None):
    weight = weight if weight is not None else j
    result = total_chern(weight).weight_part(j)
    result.name = f"c{j}"
    return result


def chern_character(rank, weight):
    """ch(A) = Tr exp(A) = rank + Σ n_k / k!."""
    result = InvariantPolynomial.constant(rank, weight)
    for k in range(1, weight + 1):
        result = result + InvariantPolynomial.power_sum(k, weight).scale(Fraction(1, factorial(k)))
    result.name = "ch"
    return result


def todd(weight):
    """Td(A) = det(A / (1 - e^{-A})) = exp(n_1/2 - Σ B_2k n_2k / (2k (2k)!))."""
    log = InvariantPolynomial.power_sum(1, weight).scale(Fraction(1, 2))
    for k in range(1, weight // 2 + 1):
        coefficient = -bernoulli_number(2 * k) / (2 * k * factorial(2 * k))
        log = log + InvariantPolynomial.power_sum(2 * k, weight).scale(coefficient)
    result = log.exp()
    result.name = "Td"
    return result


# ---------------------------------------------------- characteristic forms


def _normalizer(mode, normalized):
    """The factor a in a·ω²/8: 1/(iπ) when normalized, 1 otherwise."""
    if normalized:
        if ScalarMode(mode) is ScalarMode.EXACT:
            raise DomainError("the 1/(iπ) normalization needs float mode")
        return 1 / (1j * math.pi)
    return rational(Fraction(1), mode)


def _default_normalized(germ, normalized):
    return germ.mode is ScalarMode.FLOAT if normalized is None else normalized


def _matrix_traces(matrix, count):
    traces = {}
    power = matrix
    for k in range(1, count + 1):
        if k > 1:
            power = power @ matrix
        traces[k] = power.trace()
    return traces


def P_even(germ, polynomial, normalized=None):
    """P(ω²/(8iπ)) (unnormalized: P(ω²/8)); equals P(0) by construction."""
    normalized = _default_normalized(germ, normalized)
    sig = germ.signature
    w = omega(germ)
    x = (w @ w).scale(_normalizer(germ.mode, normalized) / 8)
    unit = Multivector.scalar(1, sig, germ.mode)
    return polynomial.evaluate(_matrix_traces(x, polynomial.weight), unit)


def P_z(germ, polynomial, normalized=None):
    """
    P^z = Tr_z[P(ω²/(8iπ) + z ω/2)], an odd form.

    With ``normalized=False`` the factor 1/(iπ) is dropped (exact mode).
    """
    normalized = _default_normalized(germ, normalized)
    sig = germ.signature.with_z()
    w = omega(germ, sig)
    z = Multivector.generator(sig, sig.z, germ.mode)
    half = rational(Fraction(1, 2), germ.mode)
    x = (w @ w).scale(_normalizer(germ.mode, normalized) / 8) + w.scale(z).scale(half)
    unit = Multivector.scalar(1, sig, germ.mode)
    return tr_z(polynomial.evaluate(_matrix_traces(x, polynomial.weight), unit))


def n_j_z(germ, j, normalized=None):
    return P_z(germ, InvariantPolynomial.power_sum(j, max(j, 1)), normalized)


def n_j_z_closed_form(germ, j, normalized=None):
    """
    j·2^{-(2j-1)}(2iπ)^{-(j-1)} Tr[ω^{2j-1}]; unnormalized j·2^{-(3j-2)} Tr[ω^{2j-1}].
    """
    if j < 1:
        raise DomainError("n_j^z needs j >= 1")
    normalized = _default_normalized(germ, normalized)
    trace = omega(germ).power(2 * j - 1).trace()
    if normalized:
        factor = j * 2.0 ** (-(2 * j - 1)) * (2j * math.pi) ** (-(j - 1))
        return trace.scale(complex(factor))
    return trace.scale(rational(Fraction(j, 2 ** (3 * j - 2)), germ.mode))


def ch_z_lambda(germ, normalized=None):
    """
    ch^z of the Z2-graded bundle Λ(F̄*) = ⊕_p Λ^p(F̄*), i.e. Σ_p (-1)^p ch^z(Λ^p).

    Raises:
        DomainError: real germ
    """
    if germ.field is not Field.COMPLEX:
        raise DomainError("ch_z_lambda is defined for complex germs")
    total = None
    for p in range(germ.rank + 1):
        part = P_z(lambda_power_germ(germ, p), chern_character(comb(germ.rank, p), germ.rank + 1), normalized)
        part = part if p % 2 == 0 else -part
        total = part if total is None else total + part
    return total


# ---------------------------------------------------------------- Newton


def omega_nilpotency_residual(germ):
    """Largest coefficient of ω^{2N}."""
    top = omega(germ).power(2 * germ.rank)
    return max(form_residual(entry) for entry in top.entries.flat)


def chern_newton_residual(germ, j, normalized=None):
    """c_j^z - ((-1)^{j-1}/j) n_j^z."""
    lhs = P_z(germ, chern_class(j, germ.rank + 1), normalized)
    rhs = n_j_z(germ, j, normalized).scale(rational(Fraction((-1) ** (j - 1), j), germ.mode))
    return form_residual(lhs, rhs)


def cayley_hamilton_residual(germ, normalized=None):
    """
    X^N + Σ_j (-1)^j c_j(X) X^{N-j} for X = aω²/8, with c_j(X) from traces.
    Also checks c_j(∇, h) = 0 for j >= 1.

    Returns:
        tuple: (Cayley-Hamilton residual, largest |c_j(∇, h)|)
    """
    normalized = _default_normalized(germ, normalized)
    sig = germ.signature
    w = omega(germ)
    x = (w @ w).scale(_normalizer(germ.mode, normalized) / 8)
    unit = Multivector.scalar(1, sig, germ.mode)
    traces = _matrix_traces(x, germ.rank)
    n = germ.rank
    total = x.power(n)
    chern_values = []
    for j in range(1, n + 1):
        cj = chern_class(j, n).evaluate(traces, unit)
        chern_values.append(form_residual(cj))
        sign = -1 if j % 2 else 1
        total = total + x.power(n - j).scale(cj.scale(sign))
    return max(form_residual(entry) for entry in total.entries.flat), max(chern_values)


def newton_scalar_residual(eigenvalues):
    """
    Residual of n_j - c_1 n_{j-1} + ... + (-1)^j j c_j = 0 for every j, with
    c_j taken from numpy's characteristic polynomial of diag(eigenvalues).
    """
    values = np.asarray(eigenvalues, dtype=float)
    size = len(values)
    charpoly = np.poly(np.diag(values))
    elementary = [(-1) ** k * charpoly[k] for k in range(size + 1)]
    power = [float(np.sum(values ** k)) for k in range(size + 1)]
    worst = 0.0
    for j in range(1, size + 1):
        total = power[j]
        for i in range(1, j):
            total += (-1) ** i * elementary[i] * power[j - i]
        total += (-1) ** j * j * elementary[j]
        worst = max(worst, abs(total))
    return worst


def metric_variation_residual(germ_a, germ_b, polynomial, s0=Fraction(1, 2), normalized=None):
    """
    Transgression of P^z along h(σ) = h_a + σ (h_b - h_a).

    On B x R the form P^z of the interpolating germ is closed; writing it as
    X + ds∧T, closedness is equivalent to d_x X = 0 and ∂_s X = d_x T.

    Returns:
        tuple: (closedness residual, transgression residual)
    """
    if germ_a.metric.shape != germ_b.metric.shape or germ_a.base_dim != germ_b.base_dim:
        raise ShapeError("metric variation needs germs of equal shape")
    nvars = germ_a.base_dim + 1
    s = JetScalar.variable(nvars - 1, nvars, germ_a.order, germ_a.mode, center=s0)
    metric = np.empty(germ_a.metric.shape, dtype=object)
    for index, (a, b) in enumerate(zip(germ_a.metric.flat, germ_b.metric.flat)):
        a, b = a.add_variable(), b.add_variable()
        metric.flat[index] = a + s * (b - a)
    family = replace(germ_a, metric=metric, extra_s=True, s0=s0, unimodular=False, label="interpolation")
    form = P_z(family, polynomial, normalized)
    closed = form_residual(d(form))
    spatial, transgression = split_ds(form)
    index = germ_a.base_dim
    ds_x = spatial.map_coefficients(lambda jet: jet.derivative(index) if isinstance(jet, JetScalar) else 0)
    dx_t = _d_without_s(transgression)
    return closed, form_residual(ds_x, dx_t)


def _d_without_s(form):
    """Exterior derivative in the x directions only, on a form over B whose jets still carry s."""
    sig = form.signature
    out = Multivector.zero(sig, form.mode)
    for a in range(sig.base_dim):
        gen = Multivector.generator(sig, a, form.mode)
        part = form.map_coefficients(lambda jet, a=a: jet.derivative(a) if isinstance(jet, JetScalar) else 0)
        out = out + gen * part
    return out


# ---------------------------------------------------------------- Φ_j


def phi_j_cochain(j, *matrices):
    """
    Φ_j(M_1..M_{2j-1}) = Σ_σ sign(σ) Tr[M_σ(1) ... M_σ(2j-1)].

    Raises:
        ShapeError: wrong number of matrices or mismatched sizes
    """
    if len(matrices) != 2 * j - 1:
        raise ShapeError(f"Φ_{j} takes {2 * j - 1} matrices, got {len(matrices)}")
    arrays = [np.asarray(m, dtype=complex) for m in matrices]
    shape = arrays[0].shape
    if any(a.shape != shape or a.shape[0] != a.shape[1] for a in arrays):
        raise ShapeError("Φ_j needs square matrices of one size")
    total = 0j
    for perm in itertools.permutations(range(len(arrays))):
        product = np.eye(shape[0], dtype=complex)
        for index in perm:
            product = product @ arrays[index]
        total += permutation_sign(perm) * np.trace(product)
    return total


def random_hermitian(rng, size):
    a = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    return (a + a.conj().T) / 2


def random_unitary(rng, size):
    a = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    q, r = np.linalg.qr(a)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def check_tolerance(germ, tolerance=1e-10):
    return 0.0 if germ.mode is ScalarMode.EXACT else tolerance


def newton_suite(germ, seed=1, tolerance=1e-10):
    """
    ω^{2N} = 0, c_j^z = ((-1)^{j-1}/j) n_j^z, the Cayley-Hamilton step with
    c_j(∇, h) = 0, and the scalar Newton identity on random diagonal matrices.

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport("newton")
    exact = germ.mode is ScalarMode.EXACT
    tol = check_tolerance(germ, tolerance)
    inputs = {"N": germ.rank, "m": germ.base_dim, "K": germ.order, "germ": germ.label}
    report.check("thm1.10/eq1.19", "Thm 1.10, Eq (1.19) ω^{2N} = 0",
                 lambda: omega_nilpotency_residual(germ), tol, inputs, exact)
    for j in range(1, germ.rank + 1):
        report.check(f"thm1.10/eq1.21/j{j}", "Thm 1.10, Eq (1.21) c_j^z = (-1)^{j-1}/j n_j^z",
                     lambda j=j: chern_newton_residual(germ, j), tol, {**inputs, "j": j}, exact)
    ch_residual = {}

    def cayley_hamilton():
        ch_residual["values"] = cayley_hamilton_residual(germ)
        return ch_residual["values"][0]

    report.check("thm1.10/eq1.22", "Thm 1.10, Eq (1.22) Cayley-Hamilton", cayley_hamilton, tol, inputs, exact)
    report.check("thm1.10/eq1.23", "Thm 1.10, Eq (1.23) c_j(∇, h) = 0",
                 lambda: ch_residual.get("values", cayley_hamilton_residual(germ))[1], tol, inputs, exact)
    rng = np.random.default_rng(seed)
    eigenvalues = rng.normal(size=max(germ.rank, 2))
    report.check("thm1.10/eq1.24", "Thm 1.10, Eq (1.24) Newton's identity",
                 lambda: newton_scalar_residual(eigenvalues), 1e-10, {"size": len(eigenvalues)})
    return report
