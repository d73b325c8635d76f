"""
Superconnection Module for Superform Lab

This module provides flat complexes of bundles with metrics over a base
germ (FlatComplexGerm), the rescaled superconnection
D_t = ½(√t (v* - v) + ω) of C'_t = √t v + ∇, and the forms built from an
odd function f:

    f(C'_t, h) = (2iπ)^{1/2} φ Tr_s[f(D_t)]        (odd, real, closed)
    f^∧(C'_t, h) = φ Tr_s[(N/2) f'(D_t)]           (even)

together with the torsion form T_f, its anomaly formula, the t → 0 and
t → ∞ limits, and the Koszul complex Λ(V) with differential √-1 x∧, which
ties f(C'_t) to the Thom forms δ_{t/4}, ε_{t/4} and to the Fourier modes of
the torus bundle E/Λ.

Ω(B) ⊗̂ End(E) is held in FormArrays: an element is a complex array of
shape (rank, rank, dim), one channel per (form monomial, jet monomial),
sign-twisted as in core.matrices, and products run through precomputed
structure constants.
"""

import cmath
import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from math import comb

import numpy as np

from core.errors import DomainError, ParityError, ShapeError
from core.flat_bundle import (
    Field,
    FlatBundleGerm,
    dual_germ,
    jet_determinant,
    jet_matrix_inverse,
    jet_matrix_product,
    lambda_power_germ,
    n_j_z,
    omega,
)
from core.fock import clifford_generators
from core.grassmann import GeneratorSignature, Multivector, reorder_sign, split_ds
from core.jet_forms import d, form_residual, lift_jet, restrict_s, s_jet, slice_s
from core.jets import JetScalar, monomials
from core.lattice_sums import float_germ, sum_pulled
from core.matrices import AlgebraMatrix
from core.quadrature import QUADRATURE_FLOOR, LogQuadrature
from core.scalars import ScalarMode
from core.thom_forms import DELTA, EPSILON, Frame, SectionSpec, pull_delta, pull_epsilon

logger = logging.getLogger(__name__)

# A numeric part within this (relative) distance of a multiple of I is treated as one
SHIFT_TOLERANCE = 1e-12

# Scaling and squaring for exponentials with a general numeric part
SQUARING_TARGET = 0.5
TAYLOR_TERMS = 30

DIFFERENTIAL_TOLERANCE = 1e-12
RANK_TOLERANCE = 1e-10

# Limits are checked at these t
LARGE_T = 1e3
SMALL_T = 1e-3

# Relative step of the central differences in t
DIFFERENCE_STEP = 1e-2

# Torsion integrands are O(t) near 0 and lose relative accuracy there
TORSION_CUTOFF = 1e-13
TORSION_TOLERANCE = 1e-9

# Integrand channels this small against the terms they are the difference of are rounding noise
CANCELLATION_NOISE = 1e-13

# Largest number of Fourier modes evaluated one at a time
MAX_MODES = 64


# ---------------------------------------------------------------- arrays


class FormArrays:
    """
    Forms over a base signature with jet coefficients as flat complex
    vectors, and matrices of them as (rows, cols, dim) arrays.

    Args:
        signature (GeneratorSignature): dx generators (and ds), no fiber generators
        order (int): jet order K, or None for jet-free coefficients
    """

    def __init__(self, signature, order):
        if signature.count != signature.n_base:
            raise ShapeError("FormArrays holds base forms only")
        self.signature = signature
        self.order = order
        self.nvars = signature.count
        self.monos = monomials(self.nvars, order) if order is not None else [()]
        self.basis = [(mask, exps) for mask in range(1 << signature.count) for exps in self.monos]
        self.index = {b: i for i, b in enumerate(self.basis)}
        self.dim = len(self.basis)
        self.degree = np.array([mask.bit_count() for mask, _ in self.basis])
        self.odd = self.degree % 2 == 1
        self.table = {}
        limit = order if order is not None else 0
        for p, (m1, e1) in enumerate(self.basis):
            qs, rs, signs = [], [], []
            for q, (m2, e2) in enumerate(self.basis):
                if m1 & m2:
                    continue
                exps = tuple(a + b for a, b in zip(e1, e2))
                if sum(exps) > limit:
                    continue
                qs.append(q)
                rs.append(self.index[(m1 | m2, exps)])
                signs.append(reorder_sign(m1, m2))
            self.table[p] = (np.array(qs, dtype=int), np.array(rs, dtype=int), np.array(signs, dtype=float))
        logger.debug("form arrays over %s, K=%s: %d channels", signature, order, self.dim)

    # ------------------------------------------------------------ codec

    def encode(self, value):
        """Vector of a Multivector, a jet or a number (the last two as 0-forms)."""
        out = np.zeros(self.dim, dtype=complex)
        items = value.terms.items() if isinstance(value, Multivector) else ((0, value),)
        for mask, coefficient in items:
            if isinstance(coefficient, JetScalar):
                for exps, c in coefficient.terms.items():
                    if sum(exps) <= (self.order or 0):
                        out[self.index[(mask, exps)]] += complex(c)
            else:
                out[self.index[(mask, self.monos[0])]] += complex(coefficient)
        return out

    def encode_matrix(self, entries, grading=None):
        """
        Array of a matrix of Multivectors, jets or numbers. With ``grading``
        the odd channels of row i pick up the twist (-1)^{deg i}.
        """
        entries = np.asarray(entries, dtype=object)
        out = np.zeros(entries.shape + (self.dim,), dtype=complex)
        for (i, j), entry in np.ndenumerate(entries):
            out[i, j] = self.encode(entry)
        if grading is not None:
            for i, degree in enumerate(grading):
                if degree % 2:
                    out[i, :, self.odd] *= -1
        return out

    def decode(self, vector):
        grouped = {}
        for k in np.flatnonzero(vector):
            mask, exps = self.basis[k]
            grouped.setdefault(mask, {})[exps] = complex(vector[k])
        terms = {}
        for mask, coefficients in grouped.items():
            if self.order is None:
                terms[mask] = coefficients[()]
            else:
                terms[mask] = JetScalar._raw(self.nvars, self.order, coefficients, ScalarMode.FLOAT)
        return Multivector._raw(self.signature, terms, ScalarMode.FLOAT)

    # ------------------------------------------------------------ algebra

    def unit(self, size):
        out = np.zeros((size, size, self.dim), dtype=complex)
        out[:, :, 0] = np.eye(size)
        return out

    def multiply(self, a, b):
        out = np.zeros((a.shape[0], b.shape[1], self.dim), dtype=complex)
        live = np.any(b != 0, axis=(0, 1))
        for p in np.flatnonzero(np.any(a != 0, axis=(0, 1))):
            qs, rs, signs = self.table[p]
            keep = live[qs]
            if not keep.any():
                continue
            qs, rs, signs = qs[keep], rs[keep], signs[keep]
            out[:, :, rs] += np.einsum("ij,jkq->ikq", a[:, :, p], b[:, :, qs]) * signs
        return out

    def power(self, a, k):
        result = self.unit(a.shape[0])
        for _ in range(k):
            result = self.multiply(result, a)
        return result

    def exp(self, a):
        """
        exp(A). The numeric eigenvalue of largest real part is split off as a
        scalar factor; if the rest has no numeric part its series terminates,
        otherwise scaling and squaring is used.
        """
        size = a.shape[0]
        eigenvalues = np.linalg.eigvals(a[:, :, 0])
        shift = eigenvalues[np.argmax(eigenvalues.real)]
        rest = a.copy()
        rest[:, :, 0] -= shift * np.eye(size)
        if np.max(np.abs(rest[:, :, 0])) <= SHIFT_TOLERANCE * max(1.0, abs(shift)):
            rest[:, :, 0] = 0
            result = self._nilpotent_exp(rest)
        else:
            result = self._scaled_exp(rest)
        return cmath.exp(shift) * result

    def _nilpotent_exp(self, rest):
        total = self.unit(rest.shape[0])
        term = total
        for k in range(1, self.dim + 2):
            term = self.multiply(term, rest) / k
            if not term.any():
                break
            total = total + term
        return total

    def _scaled_exp(self, rest):
        norm = np.abs(rest).sum(axis=(1, 2)).max()
        squarings = max(0, math.ceil(math.log2(norm / SQUARING_TARGET))) if norm > 0 else 0
        scaled = rest / 2 ** squarings
        total = self.unit(rest.shape[0])
        term = total
        for k in range(1, TAYLOR_TERMS + 1):
            term = self.multiply(term, scaled) / k
            total = total + term
            if np.max(np.abs(term)) <= 1e-17 * np.max(np.abs(total)):
                break
        for _ in range(squarings):
            total = self.multiply(total, total)
        return total

    def supertrace(self, a, grading):
        """Σ_i (-1)^{deg i} a_ii on even channels; odd channels carry the twist already."""
        tau = np.array([-1.0 if g % 2 else 1.0 for g in grading])
        diagonal = np.einsum("iid->id", a)
        return np.where(self.odd, diagonal.sum(axis=0), (tau[:, None] * diagonal).sum(axis=0))

    def normalize(self, vector, shift):
        """Multiply the degree-k channels by (2iπ)^{shift - k/2}."""
        out = vector.copy()
        for k in np.unique(self.degree):
            out[self.degree == k] *= _two_i_pi_power(shift - k / 2)
        return out


@lru_cache(maxsize=32)
def form_arrays(signature, order):
    return FormArrays(signature, order)


def _two_i_pi_power(exponent):
    base = 2j * math.pi
    if float(exponent).is_integer():
        return base ** int(exponent)
    return cmath.exp(exponent * cmath.log(base))


# ------------------------------------------------------------ odd functions


@dataclass(frozen=True)
class OddFunction:
    """
    Odd function f of an odd element: z·exp(z²) (``power`` None) or z^power.

    Example:
        >>> GAUSSIAN.derivative_at(0)
        1.0
    """

    name: str
    power: int = None

    def apply(self, arrays, x):
        if self.power is None:
            return arrays.multiply(x, arrays.exp(arrays.multiply(x, x)))
        return arrays.power(x, self.power)

    def derivative(self, arrays, x):
        if self.power is None:
            square = arrays.multiply(x, x)
            return arrays.multiply(arrays.unit(x.shape[0]) + 2 * square, arrays.exp(square))
        return self.power * arrays.power(x, self.power - 1)

    def derivative_at(self, z):
        if self.power is None:
            return (1 + 2 * z * z) * cmath.exp(z * z) if z else 1.0
        return float(self.power == 1) if z == 0 else self.power * z ** (self.power - 1)


GAUSSIAN = OddFunction("z exp(z^2)")


def odd_monomial(j):
    """f(z) = z^{2j-1}, for which f(∇, h) is (1/j) n_j^z."""
    if j < 1:
        raise DomainError(f"odd monomial needs j >= 1, got {j}")
    return OddFunction(f"z^{2 * j - 1}", 2 * j - 1)


def _matrix_arrays(matrix):
    sig = matrix.signature
    order = None
    for entry in matrix.entries.flat:
        for value in entry.terms.values():
            if isinstance(value, JetScalar):
                order = value.order if order is None else min(order, value.order)
    arrays = form_arrays(sig, order)
    return arrays, arrays.encode_matrix(matrix.entries)


def _require_odd(matrix):
    if matrix.grading is None:
        raise ShapeError("f-forms need a graded matrix")
    for (i, j), entry in np.ndenumerate(matrix.entries):
        same = (matrix.grading[i] - matrix.grading[j]) % 2 == 0
        if (not entry.even_part().is_zero() and same) or (not entry.odd_part().is_zero() and not same):
            raise ParityError(f"entry ({i}, {j}) makes the matrix not odd")


def f_form(X, f=GAUSSIAN):
    """
    (2iπ)^{1/2} φ Tr_s[f(X)] for an odd graded AlgebraMatrix X (sign-twisted).

    Raises:
        ParityError: X is not odd
        ShapeError: X ungraded or not over base forms
    """
    _require_odd(X)
    arrays, x = _matrix_arrays(X)
    return arrays.decode(arrays.normalize(arrays.supertrace(f.apply(arrays, x), X.grading), 0.5))


def f_wedge_form(D, f=GAUSSIAN):
    """φ Tr_s[(N/2) f'(D)] with N the number operator of the grading of D."""
    _require_odd(D)
    arrays, x = _matrix_arrays(D)
    half_n = np.array(D.grading, dtype=float) / 2
    value = half_n[:, None, None] * f.derivative(arrays, x)
    return arrays.decode(arrays.normalize(arrays.supertrace(value, D.grading), 0.0))


def euler_weight(ranks):
    """Σ (-1)^i i r_i over a mapping degree -> rank."""
    return sum((-1) ** degree * degree * rank for degree, rank in ranks.items())


# ---------------------------------------------------------------- complexes


@dataclass(frozen=True, eq=False)
class FlatComplexGerm:
    """
    Flat complex (E, v) of bundles in a flat frame, with metrics.

    Args:
        grading (tuple): degree of each basis vector of E = ⊕ E^i
        differential: constant complex matrix of v, raising the degree by one
        metric: object array of jets, block diagonal in the degree
        base_dim (int): m
        order (int): jet order K
        harmonic (tuple): indices spanning a constant frame of the cohomology
            (every index with v = 0 on it), None for an acyclic complex
        adjoint: optional precomputed jets of v* = h⁻¹ v† h
        extra_s (bool): the germ lives on B x R+
        label (str): name used in reports
    """

    grading: tuple
    differential: np.ndarray
    metric: np.ndarray
    base_dim: int
    order: int = 2
    harmonic: tuple = None
    adjoint: np.ndarray = None
    extra_s: bool = False
    label: str = field(default="complex")

    def __post_init__(self):
        size = len(self.grading)
        v = np.asarray(self.differential, dtype=complex)
        object.__setattr__(self, "differential", v)
        object.__setattr__(self, "grading", tuple(int(g) for g in self.grading))
        if v.shape != (size, size) or self.metric.shape != (size, size):
            raise ShapeError(f"complex of size {size} with v {v.shape} and metric {self.metric.shape}")
        scale = max(1.0, float(np.max(np.abs(v))) if v.size else 1.0)
        for (i, j), value in np.ndenumerate(v):
            if value != 0 and self.grading[i] != self.grading[j] + 1:
                raise DomainError(f"v[{i}, {j}] does not raise the degree by one")
        if np.max(np.abs(v @ v)) > DIFFERENTIAL_TOLERANCE * scale ** 2:
            raise DomainError("v² ≠ 0")
        for (i, j), entry in np.ndenumerate(self.metric):
            if self.grading[i] != self.grading[j] and entry:
                raise DomainError("the metric must be block diagonal in the degree")
        if self.harmonic is not None:
            kept = set(self.harmonic)
            if not kept <= set(range(size)):
                raise ShapeError("harmonic index out of range")
            rest = [i for i in range(size) if i not in kept]
            for i in kept:
                if np.any(v[i, :] != 0) or np.any(v[:, i] != 0):
                    raise DomainError(f"v does not vanish on the harmonic index {i}")
                if any(self.metric[i, j] for j in rest):
                    raise DomainError("harmonic frame is not orthogonal to the rest of the complex")
        self.bundle

    @property
    def size(self):
        return len(self.grading)

    @property
    def nvars(self):
        return self.base_dim + int(self.extra_s)

    @property
    def signature(self):
        return GeneratorSignature(self.base_dim, self.extra_s)

    def indices(self, degree):
        return [i for i, g in enumerate(self.grading) if g == degree]

    def ranks(self):
        return {g: self.grading.count(g) for g in sorted(set(self.grading))}

    @cached_property
    def bundle(self):
        """E with its metric as one flat bundle (validates Hermitian positivity)."""
        return FlatBundleGerm(self.size, self.base_dim, self.metric, Field.COMPLEX, ScalarMode.FLOAT,
                              self.order, extra_s=self.extra_s, label=self.label)

    @cached_property
    def adjoint_jets(self):
        if self.adjoint is not None:
            return self.adjoint
        dagger = np.empty((self.size, self.size), dtype=object)
        for (i, j), _ in np.ndenumerate(dagger):
            dagger[i, j] = JetScalar.constant(np.conj(self.differential[j, i]), self.nvars, self.order,
                                              ScalarMode.FLOAT)
        return jet_matrix_product(jet_matrix_product(self.bundle.inverse, dagger), self.metric)

    def cohomology(self):
        """Mapping degree -> dim H^i, from numeric ranks of v."""

        def rank(block):
            if block.size == 0:
                return 0
            return int(np.linalg.matrix_rank(block, tol=RANK_TOLERANCE * max(1.0, np.max(np.abs(block)))))

        v = self.differential
        out = {}
        for degree in sorted(set(self.grading)):
            here = self.indices(degree)
            incoming = rank(v[np.ix_(here, self.indices(degree - 1))])
            outgoing = rank(v[np.ix_(self.indices(degree + 1), here)])
            out[degree] = len(here) - incoming - outgoing
        return out

    @property
    def d_E(self):
        return euler_weight(self.ranks())

    @property
    def d_H(self):
        return euler_weight(self.cohomology())

    def harmonic_complex(self):
        """
        The cohomology with its induced metric, as a complex with v = 0;
        None for an acyclic complex.

        Raises:
            DomainError: non-acyclic without a harmonic frame, or a frame of the wrong size
        """
        cohomology = self.cohomology()
        if not any(cohomology.values()):
            return None
        if self.harmonic is None:
            raise DomainError(f"{self.label} is not acyclic and has no harmonic frame")
        kept = sorted(self.harmonic)
        counts = {g: sum(1 for i in kept if self.grading[i] == g) for g in cohomology}
        if counts != cohomology:
            raise DomainError(f"harmonic frame {counts} does not match the cohomology {cohomology}")
        grading = tuple(self.grading[i] for i in kept)
        return FlatComplexGerm(grading, np.zeros((len(kept), len(kept)), dtype=complex),
                               self.metric[np.ix_(kept, kept)], self.base_dim, self.order,
                               tuple(range(len(kept))), extra_s=self.extra_s, label=f"H({self.label})")


def _float_metric(germ):
    return float_germ(germ).metric


def from_bundle(germ, degree=0):
    """A flat bundle as a one-term complex in the given degree (v = 0)."""
    if germ.extra_s:
        raise DomainError("from_bundle takes a germ over B")
    size = germ.rank
    return FlatComplexGerm((degree,) * size, np.zeros((size, size), dtype=complex), _float_metric(germ),
                           germ.base_dim, germ.order, tuple(range(size)), label=germ.label)


def _block_metric(blocks):
    size = sum(block.shape[0] for block in blocks)
    first = blocks[0].flat[0]
    out = np.empty((size, size), dtype=object)
    for index in np.ndindex(size, size):
        out[index] = JetScalar(first.nvars, first.order, {}, ScalarMode.FLOAT)
    start = 0
    for block in blocks:
        n = block.shape[0]
        out[start:start + n, start:start + n] = block
        start += n
    return out


def random_two_term(base_dim, order=2, seed=1, rank=1):
    """
    Acyclic 0 → C^r → C^r → 0 with random Hermitian metric jets and an
    invertible constant v (a random matrix plus 2·I).
    """
    from core.flat_bundle import random_germ

    g0 = random_germ(rank, base_dim, order, ScalarMode.FLOAT, seed, Field.COMPLEX)
    g1 = random_germ(rank, base_dim, order, ScalarMode.FLOAT, seed + 1, Field.COMPLEX)
    rng = np.random.default_rng(seed)
    block = 0.5 * (rng.normal(size=(rank, rank)) + 1j * rng.normal(size=(rank, rank))) + 2 * np.eye(rank)
    v = np.zeros((2 * rank, 2 * rank), dtype=complex)
    v[rank:, :rank] = block
    return FlatComplexGerm((0,) * rank + (1,) * rank, v, _block_metric([g0.metric, g1.metric]),
                           base_dim, order, label=f"two-term(seed={seed})")


def split_with_trivial(cx, degree=0, seed=7, rank=1):
    """cx ⊕ (a random-metric bundle with v = 0 in ``degree``), the new summand harmonic."""
    from core.flat_bundle import random_germ

    extra = random_germ(rank, cx.base_dim, cx.order, ScalarMode.FLOAT, seed, Field.COMPLEX)
    size = cx.size + rank
    v = np.zeros((size, size), dtype=complex)
    v[:cx.size, :cx.size] = cx.differential
    harmonic = tuple(cx.harmonic or ()) + tuple(range(cx.size, size))
    return FlatComplexGerm(cx.grading + (degree,) * rank, v, _block_metric([cx.metric, extra.metric]),
                           cx.base_dim, cx.order, harmonic, label=f"{cx.label}+trivial")


def extend_complex(cx, t0):
    """
    The complex over B x R+ with metrics s^i h^i on E^i, s expanded around
    t0. Its f-form at t = 1 restricts to f(C'_{t0}, h) on s = t0.
    """
    if cx.extra_s:
        raise DomainError("complex already carries an s coordinate")
    if t0 <= 0:
        raise DomainError(f"t0 must be positive, got {t0}")
    nvars = cx.base_dim + 1
    s = s_jet(nvars, cx.order, float(t0), ScalarMode.FLOAT)
    metric = np.empty(cx.metric.shape, dtype=object)
    for (i, j), entry in np.ndenumerate(cx.metric):
        metric[i, j] = lift_jet(entry) * (s ** cx.grading[i])
    return replace(cx, metric=metric, adjoint=None, extra_s=True, label=f"{cx.label}x(s~{t0:g})")


# ---------------------------------------------------------------- forms


class Superconnection:
    """
    D_t = ½(√t (v* - v) + ω) of a flat complex, with f(C'_t, h) and
    f^∧(C'_t, h) evaluated through FormArrays.

    Args:
        cx (FlatComplexGerm): the complex
    """

    def __init__(self, cx):
        if cx.order < 1:
            raise DomainError("superconnection forms need jets of order >= 1")
        self.cx = cx
        # ω = h⁻¹dh is known to order K - 1 only
        self.arrays = form_arrays(cx.signature, cx.order - 1)
        v_jets = np.empty((cx.size, cx.size), dtype=object)
        for (i, j), value in np.ndenumerate(cx.differential):
            v_jets[i, j] = JetScalar.constant(value, cx.nvars, cx.order, ScalarMode.FLOAT)
        self._difference = self.arrays.encode_matrix(cx.adjoint_jets - v_jets)
        self._connection = 0.5 * self.arrays.encode_matrix(omega(cx.bundle).entries, cx.grading)
        self._half_number = np.array(cx.grading, dtype=float) / 2

    def D(self, t):
        if t < 0:
            raise DomainError(f"t must be non-negative, got {t}")
        if t == 0:
            return self._connection
        return self._connection + (0.5 * math.sqrt(t)) * self._difference

    def f_vector(self, t, f=GAUSSIAN):
        arrays = self.arrays
        return arrays.normalize(arrays.supertrace(f.apply(arrays, self.D(t)), self.cx.grading), 0.5)

    def f_wedge_vector(self, t, f=GAUSSIAN):
        arrays = self.arrays
        value = self._half_number[:, None, None] * f.derivative(arrays, self.D(t))
        return arrays.normalize(arrays.supertrace(value, self.cx.grading), 0.0)

    def f_form(self, t, f=GAUSSIAN):
        """f(C'_t, h); t = 0 gives f(∇^E, h^E)."""
        return self.arrays.decode(self.f_vector(t, f))

    def f_wedge(self, t, f=GAUSSIAN):
        return self.arrays.decode(self.f_wedge_vector(t, f))

    def constant(self, value):
        vector = np.zeros(self.arrays.dim, dtype=complex)
        vector[0] = value
        return self.arrays.decode(vector)


def complex_f_form(cx, t=0.0, f=GAUSSIAN):
    return Superconnection(cx).f_form(t, f)


def harmonic_f_form(cx, f=GAUSSIAN):
    """f(∇^H, h^H), zero for an acyclic complex."""
    harmonic = cx.harmonic_complex()
    if harmonic is None:
        return Multivector.zero(cx.signature)
    return Superconnection(harmonic).f_form(0.0, f)


@dataclass
class TorsionForm:
    """T_f with its quadrature diagnostics and the (t, |integrand|) samples."""

    form: Multivector
    error_estimate: float
    evaluations: int
    details: str
    samples: list = field(default_factory=list)


def torsion_form(cx, f=GAUSSIAN, tolerance=TORSION_TOLERANCE, floor=QUADRATURE_FLOOR):
    """
    T_f = -∫_0^∞ [f^∧(C'_t) - d(H) f'(0)/2 - (d(E) - d(H)) f'(i√t/2)/2] dt/t.

    Raises:
        DomainError: non-acyclic complex without a harmonic frame
        ConvergenceError: the quadrature did not settle
    """
    if cx.extra_s:
        raise DomainError("torsion forms are taken over B")
    cx.harmonic_complex()
    sc = Superconnection(cx)
    d_e, d_h = cx.d_E, cx.d_H
    samples = []

    def integrand(t):
        counterterm = d_h * f.derivative_at(0) / 2 + (d_e - d_h) * f.derivative_at(0.5j * math.sqrt(t)) / 2
        vector = sc.f_wedge_vector(t, f)
        scale = max(float(np.max(np.abs(vector))), abs(counterterm))
        vector[0] -= counterterm
        vector[np.abs(vector) <= CANCELLATION_NOISE * scale] = 0
        samples.append((t, float(np.max(np.abs(vector)))))
        return sc.arrays.decode(-vector / t)

    rule = LogQuadrature(integrand, cx.signature, label=f"T_f({cx.label})", cutoff=TORSION_CUTOFF, floor=floor)
    result = rule.integrate(tolerance)
    logger.info("torsion form of %s: %s", cx.label, result.describe())
    return TorsionForm(result.form, result.error_estimate, result.evaluations, result.describe(),
                       sorted(set(samples)))


def anomaly_residual(cx, torsion=None, f=GAUSSIAN, floor=QUADRATURE_FLOOR):
    """|d T_f - (f(∇^E, h^E) - f(∇^H, h^H))| up to order K - 2."""
    if cx.order < 2:
        raise DomainError(f"d T_f needs jet order K >= 2, got K={cx.order}")
    torsion = torsion or torsion_form(cx, f, floor=floor)
    expected = complex_f_form(cx, 0.0, f) - harmonic_f_form(cx, f)
    # T_f is known to order K - 1, so d T_f to K - 2
    return form_residual(d(torsion.form), expected, order=cx.order - 2)


def richardson_small_t(function, t):
    """(8F(t/4) - 6F(t/2) + F(t))/3, exact for F quadratic in t."""
    return (function(t / 4).scale(8.0) - function(t / 2).scale(6.0) + function(t)).scale(1.0 / 3.0)


def richardson_derivative(function, t, step=DIFFERENCE_STEP):
    """(4 D(h/2) - D(h))/3 with D(h) = (F(t+h) - F(t-h))/2h and h = step·t."""
    h = step * t

    def central(width):
        return (function(t + width) - function(t - width)).scale(1.0 / (2 * width))

    return (central(h / 2).scale(4.0) - central(h)).scale(1.0 / 3.0)


def extended_transgression(cx, t0, f=GAUSSIAN):
    """
    The f-form of the complex extended over B x R+ around s = t0, with its
    slice at s = t0 and its ds component there.

    Returns:
        tuple: (form, slice, ds_component)
    """
    extended = extend_complex(cx, t0)
    form = Superconnection(extended).f_form(1.0, f)
    _, ds_part = split_ds(form)
    return form, restrict_s(form), slice_s(ds_part, cx.base_dim)


def _imaginary_part(form):
    return (form - form.conjugate()).magnitude() / 2


def _even_part(form):
    return sum((form.form_degree_part(k).magnitude() for k in form.form_degrees() if k % 2 == 0), 0.0)


def _inputs(cx, **extra):
    return {"complex": cx.label, "m": cx.base_dim, "K": cx.order, "ranks": str(cx.ranks()), **extra}


def superconnection_checks(cx, t_values=(0.5, 2.0), tolerance=1e-8, f=GAUSSIAN):
    """
    f(C'_t, h) is real, odd and closed; the transgression formula in its
    extended-germ and finite-difference forms; the limits at t = 10⁻³ and
    t = 10³.

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport("superconnection")
    sc = Superconnection(cx)
    for t in t_values:
        inputs = _inputs(cx, t=t)
        form = sc.f_form(t, f)
        report.check(f"thmA.3/closed/t{t:g}", "Thm A.3, f(C'_t, h) is closed",
                     lambda form=form: form_residual(d(form)), tolerance, inputs)
        report.check(f"thmA.3/real/t{t:g}", "Thm A.3, f(C'_t, h) is real",
                     lambda form=form: _imaginary_part(form), tolerance, inputs)
        report.check(f"thmA.3/odd/t{t:g}", "Thm A.3, f(C'_t, h) has odd degree only",
                     lambda form=form: _even_part(form), tolerance, inputs)

        def extended(t=t):
            total, restricted, ds_part = extended_transgression(cx, t, f)
            closed = form_residual(d(total))
            slice_gap = form_residual(restricted, sc.f_form(t, f))
            ds_gap = form_residual(ds_part, sc.f_wedge(t, f).scale(1.0 / t))
            return max(closed, slice_gap, ds_gap), (
                f"closed {closed:.2e}, slice {slice_gap:.2e}, ds component {ds_gap:.2e}")

        report.check(f"thmA.8/eqA.17/t{t:g}", "Thm A.8, Eq (A.17) ∂_t f(C'_t) = (1/t) d f^∧ on B x R+",
                     extended, tolerance, inputs)
        report.check(f"thmA.8/eqA.17/difference/t{t:g}",
                     "Thm A.8, Eq (A.17) by central differences in t",
                     lambda t=t: form_residual(richardson_derivative(lambda u: sc.f_form(u, f), t),
                                               d(sc.f_wedge(t, f)).scale(1.0 / t)),
                     max(tolerance, 1e-7), inputs)

    inputs = _inputs(cx, t=LARGE_T)
    report.check("thmA.9/eqA.19/f", "Thm A.9, Eq (A.19) f(C'_t) → f(∇^H, h^H) as t → ∞",
                 lambda: form_residual(sc.f_form(LARGE_T, f), harmonic_f_form(cx, f)), 1e-6, inputs)
    report.check("thmA.9/eqA.19/f-wedge", "Thm A.9, Eq (A.19) f^∧(C'_t) → d(H) f'(0)/2 as t → ∞",
                 lambda: form_residual(sc.f_wedge(LARGE_T, f), sc.constant(cx.d_H * f.derivative_at(0) / 2)),
                 1e-6, inputs)
    inputs = _inputs(cx, t=SMALL_T)
    report.check("thmA.10/eqA.25/f", "Thm A.10, Eq (A.25) f(C'_t) → f(∇^E, h^E) as t → 0",
                 lambda: form_residual(richardson_small_t(lambda u: sc.f_form(u, f), SMALL_T), sc.f_form(0.0, f)),
                 1e-6, inputs)
    report.check("thmA.10/eqA.25/f-wedge", "Thm A.10, Eq (A.25) f^∧(C'_t) → d(E) f'(0)/2 as t → 0",
                 lambda: form_residual(richardson_small_t(lambda u: sc.f_wedge(u, f), SMALL_T),
                                       sc.constant(cx.d_E * f.derivative_at(0) / 2)),
                 1e-6, inputs)
    return report


def anomaly_check(cx, tolerance=1e-6, f=GAUSSIAN, floor=QUADRATURE_FLOOR):
    """
    T_f by quadrature and d T_f = f(∇^E, h^E) - f(∇^H, h^H); the integrand
    samples go to the "torsion" trace.

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport("torsion")
    inputs = _inputs(cx)
    state = {}

    def torsion():
        if "value" not in state:
            state["value"] = torsion_form(cx, f, floor=floor)
            for t, norm in state["value"].samples:
                report.add_trace("torsion", {"complex": cx.label, "t": t, "integrand": norm})
        return state["value"]

    report.check("thmA.14/eqA.28", "Thm A.14, Eq (A.28) d T_f = f(∇^E, h^E) - f(∇^H, h^H)",
                 lambda: (anomaly_residual(cx, torsion(), f), torsion().details), tolerance, inputs)
    report.check("remA.13/quadrature", "Remark A.13, the torsion integrand is integrable",
                 lambda: (torsion().error_estimate / max(1.0, torsion().form.magnitude()), torsion().details),
                 TORSION_TOLERANCE * 10, inputs)
    return report


def characteristic_form_check(germ, tolerance=1e-10):
    """
    For a flat bundle, f = z^{2j-1} gives f(∇, h) = (1/j) n_j^z(∇, h), and
    f(∇, h) for z·exp(z²) is real, odd and closed.

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport("superconnection/bundle")
    cx = from_bundle(germ)
    sc = Superconnection(cx)
    inputs = {"N": germ.rank, "m": germ.base_dim, "K": germ.order, "germ": germ.label}
    complex_germ = replace(germ, metric=cx.metric, mode=ScalarMode.FLOAT, field=Field.COMPLEX)
    for j in range(1, germ.rank + 1):
        def compare(j=j):
            expected = n_j_z(complex_germ, j, normalized=True).scale(1.0 / j)
            return form_residual(sc.f_form(0.0, odd_monomial(j)), expected)

        report.check(f"eqA.31/j{j}", "Eq (A.31) f(∇, h) = (1/j) n_j^z for f(z) = z^{2j-1}",
                     compare, tolerance, {**inputs, "j": j})
    form = sc.f_form(0.0)
    report.check("thmA.3/bundle", "Thm A.3, f(∇, h) is real, odd and closed",
                 lambda: max(form_residual(d(form)), _imaginary_part(form), _even_part(form)),
                 tolerance, inputs)

    # E in degree 1: D_0 = ½ω, stored sign-twisted, so every odd entry flips
    shifted = from_bundle(germ, degree=1)
    half_omega = omega(shifted.bundle).entries
    twisted = np.empty(half_omega.shape, dtype=object)
    for index, entry in np.ndenumerate(half_omega):
        twisted[index] = entry.scale(-0.5)
    D = AlgebraMatrix(twisted, shifted.grading)
    shifted_sc = Superconnection(shifted)
    report.check("thmA.3/algebra-matrix", "f(D_0) on an AlgebraMatrix against the superconnection of E[1]",
                 lambda: max(form_residual(f_form(D), shifted_sc.f_form(0.0)),
                             form_residual(f_form(D), -form)), tolerance, inputs)
    report.check("defA.7/algebra-matrix", "f^∧(D_0) on an AlgebraMatrix against the superconnection of E[1]",
                 lambda: form_residual(f_wedge_form(D), shifted_sc.f_wedge(0.0)), tolerance, inputs)
    return report


# ---------------------------------------------------------------- Koszul


def exterior_metric(metric, rank):
    """Gram-determinant metric det(h[I, J]) on the bitmask basis of Λ(C^N)."""
    size = 1 << rank
    first = metric.flat[0]
    out = np.empty((size, size), dtype=object)
    members = [[k for k in range(rank) if mask >> k & 1] for mask in range(size)]
    for a in range(size):
        for b in range(size):
            if len(members[a]) != len(members[b]):
                out[a, b] = JetScalar(first.nvars, first.order, {}, ScalarMode.FLOAT)
            elif not members[a]:
                out[a, b] = JetScalar.constant(1, first.nvars, first.order, ScalarMode.FLOAT)
            else:
                out[a, b] = jet_determinant(metric[np.ix_(members[a], members[b])])
    return out


class KoszulFamily:
    """
    Λ(V) over a flat bundle V with metric, and its Koszul complexes with
    differential √-1 x∧ at constant points x of V.

    Args:
        germ (FlatBundleGerm): V (a real germ is complexified)
    """

    def __init__(self, germ):
        if germ.extra_s:
            raise DomainError("Koszul complexes are built over B")
        self.germ = germ
        self.rank = germ.rank
        self.space = clifford_generators(germ.rank)
        self.grading = self.space.grading
        self.metric_v = _float_metric(germ)
        self.metric = exterior_metric(self.metric_v, germ.rank)
        inverse = jet_matrix_inverse(self.metric)
        nvars, order = germ.base_dim, germ.order
        self._adjoints = []
        for k in range(germ.rank):
            wedge_t = self.space.wedge[k].T.toarray()
            jets = np.empty(wedge_t.shape, dtype=object)
            for index, value in np.ndenumerate(wedge_t):
                jets[index] = JetScalar.constant(int(value), nvars, order, ScalarMode.FLOAT)
            self._adjoints.append(jet_matrix_product(jet_matrix_product(inverse, jets), self.metric))

    def differential(self, x):
        return 1j * self.space.exterior(x).toarray()

    def adjoint(self, x):
        """v* = -√-1 (x∧)* as jets, from the Gram metric."""
        total = np.empty((len(self.grading),) * 2, dtype=object)
        for index in np.ndindex(total.shape):
            total[index] = JetScalar(self.germ.base_dim, self.germ.order, {}, ScalarMode.FLOAT)
        for k, x_k in enumerate(x):
            if x_k:
                total = total + self._adjoints[k] * (-1j * np.conj(complex(x_k)))
        return total

    def contraction(self, x):
        """-√-1 i(ξ) with ξ = ⟨x, ·⟩_h, computed from h on V directly."""
        rank = self.rank
        size = len(self.grading)
        total = np.empty((size, size), dtype=object)
        for index in np.ndindex(total.shape):
            total[index] = JetScalar(self.germ.base_dim, self.germ.order, {}, ScalarMode.FLOAT)
        for k in range(rank):
            xi_k = sum((self.metric_v[l, k] * np.conj(complex(x[l])) for l in range(rank) if x[l]),
                       JetScalar(self.germ.base_dim, self.germ.order, {}, ScalarMode.FLOAT))
            interior = self.space.interior[k].toarray()
            for index, value in np.ndenumerate(interior):
                if value:
                    total[index] = total[index] + xi_k * (-1j * int(value))
        return total

    def complex_at(self, x, allow_zero=False):
        """
        The Koszul complex at the constant point x.

        Raises:
            DomainError: x = 0 unless ``allow_zero`` (the complex is acyclic only off zero)
        """
        x = tuple(complex(value) for value in x)
        if len(x) != self.rank:
            raise ShapeError(f"point with {len(x)} entries for a rank-{self.rank} bundle")
        zero = not any(x)
        if zero and not allow_zero:
            raise DomainError("the Koszul complex is acyclic only off the zero section")
        harmonic = tuple(range(len(self.grading))) if zero else None
        return FlatComplexGerm(self.grading, self.differential(x), self.metric, self.germ.base_dim,
                               self.germ.order, harmonic, self.adjoint(x), label=f"koszul({self.germ.label})")


def koszul_complex(germ, x0, allow_zero=False):
    return KoszulFamily(germ).complex_at(x0, allow_zero)


def lambda_omega(family):
    """Λ(ω) = Σ_kl ω_kl (e_k∧) i(e_l) as a plain matrix of 1-forms."""
    w = omega(replace(family.germ, metric=family.metric_v, mode=ScalarMode.FLOAT, field=Field.COMPLEX))
    sig = w.signature
    size = len(family.grading)
    out = np.empty((size, size), dtype=object)
    for index in np.ndindex(size, size):
        out[index] = Multivector.zero(sig)
    for k in range(family.rank):
        for l in range(family.rank):
            if w.entries[k, l].is_zero():
                continue
            operator = (family.space.wedge[k] @ family.space.interior[l]).toarray()
            for index, value in np.ndenumerate(operator):
                if value:
                    out[index] = out[index] + w.entries[k, l].scale(int(value))
    return out


def _jet_matrix_gap(a, b):
    return max((x - y).magnitude() for x, y in zip(np.asarray(a).flat, np.asarray(b).flat))


def exterior_f_form(germ, f=GAUSSIAN):
    """f(∇^{Λ(V)}, h^{Λ(V)}) = Σ_p (-1)^p f(∇^{Λ^p V}) from Gram-minor germs of each Λ^p V."""
    total = None
    antidual = dual_germ(float_germ(germ))
    for p in range(germ.rank + 1):
        power = lambda_power_germ(antidual, p)
        form = complex_f_form(from_bundle(power, degree=p), 0.0, f)
        total = form if total is None else total + form
    return total


def koszul_suite(germ, x0, t=1.0, tolerance=1e-6, f=GAUSSIAN, floor=QUADRATURE_FLOOR):
    """
    The Koszul superconnection √-1 x∧ + ∇ on Λ(V) at a constant point x0:
    v² = 0, [∇, x∧] = 0, the adjoint and ω of the Gram metric, exactness of
    f(∇^Λ, h^Λ) through the torsion form, and the zero section.

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport("koszul")
    family = KoszulFamily(germ)
    inputs = {"N": germ.rank, "m": germ.base_dim, "K": germ.order, "x0": str(tuple(x0)), "germ": germ.label}
    state = {}

    def cx():
        if "cx" not in state:
            state["cx"] = family.complex_at(x0)
        return state["cx"]

    report.check("defB.3/eqB.5", "Def B.3, Eq (B.5) (x∧)² = 0",
                 lambda: float(np.max(np.abs(cx().differential @ cx().differential))), 1e-12, inputs)

    def flat():
        sig = GeneratorSignature(germ.base_dim)
        residual = 0.0
        for value in cx().differential.flat:
            jet = JetScalar.constant(value, germ.base_dim, germ.order, ScalarMode.FLOAT)
            residual = max(residual, form_residual(d(Multivector.scalar(jet, sig))))
        return residual

    report.check("thmB.4/eqB.8", "Thm B.4, Eq (B.8) [∇^E, x∧] = 0", flat, 1e-12, inputs)
    report.check("thmB.7/eqB.9", "Thm B.7, Eq (B.9) (√-1 x∧)* = -√-1 i_x",
                 lambda: _jet_matrix_gap(cx().adjoint_jets, family.contraction(x0)), 1e-10, inputs)
    report.check("thmB.7/eqB.11", "Thm B.7, Eq (B.11) ω of Λ(V) is Λ(ω)",
                 lambda: max(form_residual(a, b) for a, b in
                             zip(omega(cx().bundle).entries.flat, lambda_omega(family).flat)),
                 1e-10, inputs)
    report.check("thmB.10/eqB.16", "Thm B.10, Eq (B.16) f(∇^E, h^E) = dψ off the zero section",
                 lambda: anomaly_residual(cx(), f=f, floor=floor), tolerance, inputs)

    def zero_section():
        zero = family.complex_at((0,) * germ.rank, allow_zero=True)
        value = complex_f_form(zero, t, f)
        return max(form_residual(value, complex_f_form(zero, 0.0, f)),
                   form_residual(value, exterior_f_form(germ, f)))

    report.check("thmB.10/eqB.17", "Thm B.10, Eq (B.17) s*f(∇^E, h^E) = f(∇^{Λ(V)}, h^{Λ(V)})",
                 zero_section, 1e-10, {**inputs, "t": t})
    return report


# ------------------------------------------------------------- scaling


def scaling_constants(rank):
    """
    (c_δ, c_ε) = (2 π^{-(N-1)}, ½ π^{-(N-1)}) times the printed sign
    (-1)^{(N-1)/2} and the orientation sign (-1)^{N(N-1)/2} between the
    paired order ψ_1ψ̂_1..ψ_Nψ̂_N and the block order ψ_1..ψ_N ψ̂_1..ψ̂_N
    used here. For odd N the two signs cancel.
    """
    if rank % 2 == 0:
        raise DomainError(f"the scaling relation needs odd N, got N={rank}")
    sign = (-1) ** ((rank - 1) // 2) * (-1) ** (rank * (rank - 1) // 2)
    return sign * 2 * math.pi ** (1 - rank), sign * 0.5 * math.pi ** (1 - rank)


def mode_forms(family, x, t, f=GAUSSIAN):
    """(f(C'_t), (1/t) f^∧(C'_t)) of the Koszul complex at x."""
    sc = Superconnection(family.complex_at(x, allow_zero=True))
    return sc.f_form(t, f), sc.f_wedge(t, f).scale(1.0 / t)


def scaling_residuals(germ, section_values, t, family=None):
    """
    Residuals of δ̃_t = c_δ I*δ_{t/4} and ε̃_t = c_ε I*ε_{t/4}, with δ̃, ε̃ from
    the Koszul complex of E* at the dual section and δ, ε from thom_forms.

    Returns:
        tuple: (delta residual, epsilon residual)
    """
    g = float_germ(germ)
    c_delta, c_epsilon = scaling_constants(g.rank)
    family = family or KoszulFamily(dual_germ(g))
    section = SectionSpec.flat(tuple(section_values), Frame.DUAL)
    delta_tilde, epsilon_tilde = mode_forms(family, section_values, t)
    delta = pull_delta(g, section, t / 4).value()
    epsilon = pull_epsilon(g, section, t / 4).value()
    return (form_residual(delta_tilde, delta.scale(c_delta)),
            form_residual(epsilon_tilde, epsilon.scale(c_epsilon)))


def scaling_check(germ, section_values, t=1.0, tolerance=1e-8):
    """
    The Koszul forms δ̃_t, ε̃_t against the Thom forms δ_{t/4}, ε_{t/4}; any
    component of δ̃_t outside degree 2N - 1 counts against the first check.

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport("scaling")
    inputs = {"N": germ.rank, "m": germ.base_dim, "K": germ.order, "t": t,
              "section": str(tuple(section_values)), "germ": germ.label}
    state = {}

    def residuals():
        if "value" not in state:
            state["value"] = scaling_residuals(germ, section_values, t)
        return state["value"]

    report.check("thmB.11/eqB.19", "Thm B.11, Eq (B.19) δ̃_t = 2 π^{-(N-1)} I*δ_{t/4} in block orientation",
                 lambda: residuals()[0], tolerance, inputs)
    report.check("thmB.11/eqB.20", "Thm B.11, Eq (B.20) ε̃_t = ½ π^{-(N-1)} I*ε_{t/4} in block orientation",
                 lambda: residuals()[1], tolerance, inputs)
    return report


# ------------------------------------------------------------- Fourier


def binomial_weight(rank):
    """Σ_p (-1)^p p C(N, p): -1 for N = 1 and 0 for N >= 2."""
    return sum((-1) ** p * p * comb(rank, p) for p in range(rank + 1))


def fourier_modes(germ, t, tolerance=1e-10, max_modes=MAX_MODES):
    """
    Dual lattice points μ (as flat-frame values) of the window that carries
    Σ μ*δ_{t/4} to ``tolerance``, at most ``max_modes`` of them in shell order.

    Returns:
        tuple: (list of (n, values), lattice window)
    """
    g = float_germ(germ)
    window = sum_pulled(g, DELTA, t / 4, tolerance=tolerance).window
    points = list(window.points)[:max_modes]
    scale = float(g.lattice_scale)
    modes = [(tuple(int(k) for k in n), tuple(2 * math.pi * int(k) / scale for k in n)) for n in points]
    return modes, replace(window, points=np.array(points))


def fourier_suite(germ, t=4.0, tolerance=1e-8, max_modes=MAX_MODES, workers=None):
    """
    Mode decomposition of f(C'_t, h^W) over the dual lattice: each mode
    against the scaled Thom forms, the sum against the lattice sum, the
    μ = 0 mode, the binomial identity and the large-t limits.

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport("fourier")
    g = float_germ(germ)
    rank = g.rank
    inputs = {"N": rank, "m": g.base_dim, "K": g.order, "t": t, "germ": g.label}
    family = KoszulFamily(dual_germ(g))
    state = {}

    def modes():
        if "modes" not in state:
            points, window = fourier_modes(g, t, max_modes=max_modes)
            forms = [mode_forms(family, values, t) for _, values in points]
            state["modes"] = (points, window, forms)
        return state["modes"]

    def per_mode():
        points, _, forms = modes()
        c_delta, c_epsilon = scaling_constants(rank)
        worst = 0.0
        for (n, _), (f_mode, e_mode) in zip(points, forms):
            section = SectionSpec.lattice_point(n, g.lattice_scale, dual=True)
            delta = pull_delta(g, section, t / 4).value().scale(c_delta)
            epsilon = pull_epsilon(g, section, t / 4).value().scale(c_epsilon)
            worst = max(worst, form_residual(f_mode, delta), form_residual(e_mode, epsilon))
        return worst, f"{len(points)} modes"

    def mode_sum():
        points, window, forms = modes()
        c_delta, c_epsilon = scaling_constants(rank)
        total_f = sum((pair[0] for pair in forms[1:]), forms[0][0])
        total_e = sum((pair[1] for pair in forms[1:]), forms[0][1])
        delta = sum_pulled(g, DELTA, t / 4, window=window, workers=workers).form.scale(c_delta)
        epsilon = sum_pulled(g, EPSILON, t / 4, window=window, workers=workers).form.scale(c_epsilon)
        return max(form_residual(total_f, delta), form_residual(total_e, epsilon))

    if rank % 2:
        report.check("eqB.49/modes", "Eq (B.49) each mode of f(C'_t, h^W) is μ*δ̃_t (and μ*ε̃_t)",
                     per_mode, tolerance, inputs)
        report.check("eqB.49/sum", "Eq (B.48)-(B.49) mode sum against Σ μ*δ_{t/4} over the same window",
                     mode_sum, tolerance, inputs)

    def mode_zero():
        zero = family.complex_at((0,) * rank, allow_zero=True)
        return form_residual(complex_f_form(zero, t), exterior_f_form(dual_germ(g)))

    report.check("eqB.52", "Eq (B.52) (2iπ)^{1/2} φ Tr_s[f(D_{t,0})] = f(∇^{Λ(E*)}, h^{Λ(E*)})",
                 mode_zero, 1e-10, inputs)
    expected = -1 if rank == 1 else 0
    report.check("eqB.54/binomial", "Eq (B.54) Σ_p (-1)^p p C(N, p) is -1 for N = 1 and 0 otherwise",
                 lambda: float(abs(binomial_weight(rank) - expected)), 0.0, {"N": rank}, exact=True)

    def wedge_zero():
        zero = Superconnection(family.complex_at((0,) * rank, allow_zero=True))
        return form_residual(zero.f_wedge(LARGE_T), zero.constant(binomial_weight(rank) / 2))

    report.check("eqB.53-B.54", "Eq (B.53)-(B.54) f^∧ of the μ = 0 mode is ½ Σ_p (-1)^p p C(N, p)",
                 wedge_zero, 1e-10, inputs)

    def large_t():
        shell = [n for n in itertools.product((-1, 0, 1), repeat=rank) if any(n)][:max_modes]
        worst = 0.0
        for n in shell:
            values = SectionSpec.lattice_point(n, g.lattice_scale, dual=True).values
            f_mode, e_mode = mode_forms(family, values, LARGE_T)
            worst = max(worst, f_mode.magnitude(), e_mode.magnitude() * LARGE_T)
        return worst, f"first shell, {len(shell)} modes at t={LARGE_T:g}"

    report.check("thmB.16/eqB.51", "Thm B.16, Eq (B.51) the μ ≠ 0 modes vanish as t → ∞",
                 large_t, 1e-10, {**inputs, "t": LARGE_T})
    return report
