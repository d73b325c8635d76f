"""
Fock Module for Superform Lab

This module provides the Clifford operators c_k = e_k∧ - i(e_k) and
ĉ_k = e_k∧ + i(e_k) on the exterior algebra Λ(C^N), their relations and
supertraces, and the identity relating the supertrace of a Gaussian in
(c, ĉ) to a Berezin integral over (ψ, ψ̂):

    Tr_s[exp(½⟨C, MC⟩ + ⟨J, C⟩)]
        = (-1)^{N(N+1)/2} 2^N det^{1/2}(sinh K / K) ∫^B exp(½⟨Ψ, MΨ⟩ + ⟨J, Ψ⟩)

with K = M·diag(1_N, -1_N); det^{1/2}(sinh K / K) reduces to
det^{1/2}(sin M / M) when M only couples c with ĉ.

The basis of Λ(C^N) is indexed by bitmasks (bit k set for e_k), ordered
as integers; the degree of a basis vector is its popcount.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import sparse

from core.errors import DomainError, ExactnessError, ParityError, ShapeError
from core.grassmann import GeneratorSignature, Multivector, berezin_single, exp_even
from core.jets import rational
from core.matrices import AlgebraMatrix, algebra_expm, sqrtdet_sinh_ratio, supertrace
from core.scalars import ScalarMode, coerce

logger = logging.getLogger(__name__)

# Largest N for which Λ(C^N) is built (dimension 2^N)
FOCK_CAP = 12


def _wedge_matrix(rank, k):
    """e_k∧ on the bitmask basis, with the sign of moving e_k past the lower generators."""
    bit = 1 << k
    rows, cols, data = [], [], []
    for mask in range(1 << rank):
        if mask & bit:
            continue
        rows.append(mask | bit)
        cols.append(mask)
        data.append(-1 if (mask & (bit - 1)).bit_count() % 2 else 1)
    return sparse.csr_matrix((data, (rows, cols)), shape=(1 << rank, 1 << rank), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class FockSpace:
    """
    Λ(C^N) with its exterior and interior multiplications.

    Args:
        rank (int): N
        wedge (tuple): sparse matrices of e_k∧
        interior (tuple): sparse matrices of i(e_k), the adjoints of e_k∧
    """

    rank: int
    wedge: tuple
    interior: tuple

    @property
    def dim(self):
        return 1 << self.rank

    @property
    def grading(self):
        return tuple(mask.bit_count() for mask in range(self.dim))

    def c(self, k):
        return self.wedge[k] - self.interior[k]

    def c_hat(self, k):
        return self.wedge[k] + self.interior[k]

    def generators(self):
        """C = (c_1, ..., c_N, ĉ_1, ..., ĉ_N)."""
        return [self.c(k) for k in range(self.rank)] + [self.c_hat(k) for k in range(self.rank)]

    def number_operator(self):
        """N acting by p on Λ^p."""
        return sparse.diags(np.array(self.grading, dtype=np.int64)).tocsr()

    def tau(self):
        return sparse.diags(np.array([(-1) ** g for g in self.grading], dtype=np.int64)).tocsr()

    def supertrace(self, operator):
        """Tr[τ A] of a numeric operator."""
        return (self.tau() @ operator).diagonal().sum()

    def exterior(self, x):
        """x∧ for a vector of numbers."""
        return sum((complex(x_k) * self.wedge[k] for k, x_k in enumerate(x) if x_k != 0),
                   sparse.csr_matrix((self.dim, self.dim), dtype=complex))

    def contraction(self, xi):
        """i(ξ) = Σ ξ_k i(e_k) for a covector ξ."""
        return sum((complex(xi_k) * self.interior[k] for k, xi_k in enumerate(xi) if xi_k != 0),
                   sparse.csr_matrix((self.dim, self.dim), dtype=complex))


def relation_residual(space):
    """
    Largest entry of c_i c_j + c_j c_i + 2δ_ij, ĉ_i ĉ_j + ĉ_j ĉ_i - 2δ_ij and
    c_i ĉ_j + ĉ_j c_i over all i, j (an integer).
    """
    identity = sparse.identity(space.dim, dtype=np.int64, format="csr")
    worst = 0
    for i in range(space.rank):
        for j in range(space.rank):
            delta = 2 * identity if i == j else 0 * identity
            blocks = (
                space.c(i) @ space.c(j) + space.c(j) @ space.c(i) + delta,
                space.c_hat(i) @ space.c_hat(j) + space.c_hat(j) @ space.c_hat(i) - delta,
                space.c(i) @ space.c_hat(j) + space.c_hat(j) @ space.c(i),
            )
            for block in blocks:
                if block.nnz:
                    worst = max(worst, int(abs(block).max()))
    return worst


@lru_cache(maxsize=None)
def clifford_generators(rank):
    """
    The Fock space of rank N with its Clifford operators; the relations are
    verified on construction.

    Raises:
        DomainError: N < 1 or N > FOCK_CAP, or a relation fails

    Example:
        >>> space = clifford_generators(1)
        >>> space.c(0).toarray().tolist(), space.c_hat(0).toarray().tolist()
        ([[0, -1], [1, 0]], [[0, 1], [1, 0]])
    """
    if not 1 <= rank <= FOCK_CAP:
        raise DomainError(f"Fock spaces are built for 1 <= N <= {FOCK_CAP}, got N={rank}")
    wedge = tuple(_wedge_matrix(rank, k) for k in range(rank))
    interior = tuple(w.T.tocsr() for w in wedge)
    space = FockSpace(rank, wedge, interior)
    residual = relation_residual(space)
    if residual:
        raise DomainError(f"Clifford relations fail by {residual} for N={rank}")
    logger.debug("Fock space of rank %d built (dimension %d)", rank, space.dim)
    return space


def top_supertrace(rank):
    """Tr_s[c_1 ... c_N ĉ_1 ... ĉ_N] as an integer."""
    space = clifford_generators(rank)
    product = sparse.identity(space.dim, dtype=np.int64, format="csr")
    for operator in space.generators():
        product = product @ operator
    return int(space.supertrace(product))


def top_supertrace_expected(rank):
    return (-1) ** (rank * (rank + 1) // 2) * 2 ** rank


# ------------------------------------------------------------- bridge


def fock_matrix(space, terms, signature, mode):
    """
    Σ coefficient ⊗ operator over the coefficient algebra, as a graded
    AlgebraMatrix on Λ(C^N).

    Args:
        space (FockSpace): the Fock space
        terms: iterable of (Multivector, sparse or dense integer operator)
        signature (GeneratorSignature): signature of the coefficients
        mode (ScalarMode): scalar mode of the coefficients
    """
    grading = space.grading
    total = AlgebraMatrix.zeros(space.dim, space.dim, signature, mode, grading)
    for coefficient, operator in terms:
        if coefficient.is_zero():
            continue
        dense = operator.toarray() if sparse.issparse(operator) else np.asarray(operator)
        total = total + AlgebraMatrix.tensor(coefficient, dense.astype(object), grading)
    return total


def _validate_bridge(rank, M, J):
    size = 2 * rank
    if M.shape != (size, size):
        raise ShapeError(f"M must be {size}x{size}, got {M.shape}")
    if len(J) != size:
        raise ShapeError(f"J must have {size} entries, got {len(J)}")
    if any(not (j.is_odd() or j.is_zero()) for j in J):
        raise ParityError("the entries of J must be odd")
    if any(j.signature != M.signature for j in J):
        raise ShapeError("J and M must share one signature")


def clifford_sinc_factor(rank, M):
    """
    det^{1/2}(sinh K / K) with K = M·diag(1_N, -1_N).

    Writing ĉ = √-1·e turns (c, ĉ) into one Euclidean Clifford system with
    M' = EME, E = diag(1_N, √-1·1_N), and M'² is similar to K². Where only
    the c-ĉ block of M is populated this is det^{1/2}(sin M / M).
    """
    K = np.empty(M.shape, dtype=object)
    for (k, l), entry in np.ndenumerate(M.entries):
        K[k, l] = -entry if l >= rank else entry
    return sqrtdet_sinh_ratio(AlgebraMatrix(K))


def bridge_sides(rank, M, J):
    """
    Both sides of the supertrace/Berezin identity.

    Args:
        rank (int): N
        M (AlgebraMatrix): skew-symmetric 2N x 2N, even entries
        J (list): 2N odd Multivectors over the signature of M

    Returns:
        tuple: (left, right) Multivectors over the signature of M

    Raises:
        ShapeError, ParityError: malformed M or J
    """
    _validate_bridge(rank, M, J)
    space = clifford_generators(rank)
    sig, mode = M.signature, M.mode
    half = rational(Fraction(1, 2), mode)
    C = space.generators()
    terms = [(J[k], C[k]) for k in range(2 * rank)]
    for k in range(2 * rank):
        for l in range(2 * rank):
            if not M.entries[k, l].is_zero():
                terms.append((M.entries[k, l].scale(half), C[k] @ C[l]))
    left = supertrace(algebra_expm(fock_matrix(space, terms, sig, mode)))

    big = GeneratorSignature(sig.base_dim, sig.extra_s, 2 * rank, 0)
    psi = [Multivector.generator(big, big.psi(k), mode) for k in range(2 * rank)]
    exponent = Multivector.zero(big, mode)
    for k in range(2 * rank):
        exponent = exponent + J[k].embed(big) * psi[k]
        for l in range(2 * rank):
            if not M.entries[k, l].is_zero():
                exponent = exponent + psi[k] * M.entries[k, l].embed(big).scale(half) * psi[l]
    integral = berezin_single(exp_even(exponent), "psi")
    right = (clifford_sinc_factor(rank, M) * integral).scale(top_supertrace_expected(rank))
    return left, right


def _random_coefficient(rng, mode):
    return coerce(Fraction(int(rng.integers(-3, 4)), 8), mode)


def random_bridge_data(rank, base_dim, mode=ScalarMode.EXACT, seed=1, numeric=False, with_m=True):
    """
    Reproducible (M, J) for the bridge identity.

    M has 2-form entries (plus a small numeric skew part when ``numeric``,
    float mode only) and J has 1-form entries, all in dx_1..dx_m.

    Raises:
        ExactnessError: ``numeric`` in exact mode
    """
    mode = ScalarMode(mode)
    if numeric and mode is ScalarMode.EXACT:
        raise ExactnessError("a numeric part of M needs float mode")
    rng = np.random.default_rng(seed)
    sig = GeneratorSignature(base_dim)
    size = 2 * rank
    M = AlgebraMatrix.zeros(size, size, sig, mode)
    pairs = [(a, b) for a in range(base_dim) for b in range(a + 1, base_dim)]
    for k in range(size):
        for l in range(k + 1, size):
            if not with_m:
                continue
            entry = Multivector.zero(sig, mode)
            for a, b in pairs:
                entry = entry + Multivector.monomial(sig, (sig.dx(a), sig.dx(b)), mode,
                                                     _random_coefficient(rng, mode))
            if numeric:
                entry = entry + Multivector.scalar(0.4 * rng.normal(), sig, mode)
            M.entries[k, l] = entry
            M.entries[l, k] = -entry
    J = []
    for _ in range(size):
        entry = Multivector.zero(sig, mode)
        for a in range(base_dim):
            entry = entry + Multivector.generator(sig, sig.dx(a), mode, _random_coefficient(rng, mode))
        J.append(entry)
    return M, J


def bridge_residual(rank, M, J):
    left, right = bridge_sides(rank, M, J)
    return (left - right).magnitude()


def bridge_identity_check(rank, base_dim=None, mode=ScalarMode.EXACT, seed=1, tolerance=1e-10):
    """
    Clifford relations, the top supertrace and the supertrace/Berezin
    identity on random data (M = 0, nilpotent M, and in float mode an M
    with a numeric part).

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    mode = ScalarMode(mode)
    base_dim = 2 * rank if base_dim is None else base_dim
    exact = mode is ScalarMode.EXACT
    tol = 0.0 if exact else tolerance
    report = VerificationReport("fock")
    inputs = {"N": rank, "m": base_dim, "mode": mode.value, "seed": seed}

    report.check("eqB.2/relations", "Eq (B.2) Clifford relations of c and ĉ",
                 lambda: float(relation_residual(clifford_generators(rank))), 0.0, {"N": rank}, exact=True)
    report.check("eqB.3/top-supertrace", "Eq (B.3) Tr_s[c_1..c_N ĉ_1..ĉ_N] = (-1)^{N(N+1)/2} 2^N",
                 lambda: float(abs(top_supertrace(rank) - top_supertrace_expected(rank))), 0.0,
                 {"N": rank}, exact=True)
    report.check("thmB.1/eqB.4/trivial", "Thm B.1, Eq (B.4) with M = 0",
                 lambda: bridge_residual(rank, *random_bridge_data(rank, base_dim, mode, seed, with_m=False)),
                 tol, inputs, exact)
    report.check("thmB.1/eqB.4", "Thm B.1, Eq (B.4) Tr_s of a Gaussian in (c, ĉ) as a Berezin integral",
                 lambda: bridge_residual(rank, *random_bridge_data(rank, base_dim, mode, seed)),
                 tol, inputs, exact)
    if not exact:
        report.check("thmB.1/eqB.4/numeric", "Thm B.1, Eq (B.4) with a numeric part in M",
                     lambda: bridge_residual(rank, *random_bridge_data(rank, base_dim, mode, seed, numeric=True)),
                     tolerance, inputs)
    return report
