"""
Exact Identities Module for Superform Lab

This module provides the ``exact-identities`` suite: the algebraic
identities that hold exactly over the Grassmann algebra and the
characteristic-form calculus. In exact mode every residual must be an
exact zero; in float mode the scenario tolerance applies.

The suite covers:
    - the Berezin normalisations and the Grassmann engine's algebraic laws,
    - Lemma 2.1 (Eqs 2.7-2.9),
    - the Newton identities of Thm 1.10 and the forms P^z of §1b,
    - the two expressions of the pulled-back volume form (Eqs 2.42-2.43),
    - Φ_j of Eq (1.31),
    - the Clifford/Fock identities (B.2)-(B.4).
"""

import logging
from fractions import Fraction

import numpy as np

from core.flat_bundle import (
    Field,
    P_even,
    P_z,
    ch_z_lambda,
    chern_character,
    dual_omega,
    n_j_z,
    n_j_z_closed_form,
    newton_suite,
    phi_j_cochain,
    random_germ,
    random_hermitian,
    random_unitary,
    todd,
    total_chern,
    transpose_sign_residual,
)
from core.fock import bridge_identity_check, clifford_generators, fock_matrix
from core.grassmann import (
    GeneratorSignature,
    Multivector,
    berezin_double,
    berezin_single,
    exp_even,
    interior_mult,
    tr_z,
)
from core.jet_forms import form_residual
from core.jets import rational
from core.matrices import AlgebraMatrix, antisym_to_form, det_even, pairing, sqrtdet_sinc, supertrace
from core.scalars import ScalarMode, imaginary_unit
from core.thom_forms import SectionSpec, pull_vol

logger = logging.getLogger(__name__)

# Random coefficients are k / COEFFICIENT_DENOMINATOR with |k| <= COEFFICIENT_RANGE
COEFFICIENT_RANGE = 3
COEFFICIENT_DENOMINATOR = 4

# Number of random triples for the algebraic laws
RANDOM_TRIALS = 3

# Terms per random homogeneous form
FORM_TERMS = 3

# Check id, residual key and reference of the algebraic laws
ALGEBRA_LAWS = (
    ("eq2.5/associativity", "associativity", "Eq (2.5) algebra: wedge associativity"),
    ("eq2.5/graded-commutativity", "graded-commutativity", "Eq (2.5) algebra: graded commutativity"),
    ("eq2.12/interior-square", "interior-square", "Eq (2.12): i_v ∘ i_v = 0"),
    ("eq2.14/exp-inverse", "exp-inverse", "Eq (2.14) algebra: exp(a) exp(-a) = 1"),
)


def random_coefficient(rng, mode):
    k = 0
    while k == 0:
        k = int(rng.integers(-COEFFICIENT_RANGE, COEFFICIENT_RANGE + 1))
    return rational(Fraction(k, COEFFICIENT_DENOMINATOR), mode)


def random_form(signature, degree, mode, rng, generators=None, terms=FORM_TERMS):
    """
    Random homogeneous element of degree ``degree`` in the chosen generators.

    Args:
        signature (GeneratorSignature): target signature
        degree (int): number of generators per monomial
        mode (ScalarMode): scalar mode
        rng (np.random.Generator): random source
        generators (list): generator indices to draw from (base 1-forms by default)
    """
    pool = list(range(signature.base_dim)) if generators is None else list(generators)
    total = Multivector.zero(signature, mode)
    if degree > len(pool):
        return total
    for _ in range(terms):
        chosen = sorted(rng.choice(len(pool), size=degree, replace=False)) if degree else []
        indices = [pool[i] for i in chosen]
        total = total + Multivector.monomial(signature, indices, mode, random_coefficient(rng, mode))
    return total


def random_antisymmetric(size, signature, mode, rng, degree=2):
    """Antisymmetric matrix of random even forms."""
    out = AlgebraMatrix.zeros(size, size, signature, mode)
    for i in range(size):
        for j in range(i + 1, size):
            entry = random_form(signature, degree, mode, rng)
            out.entries[i, j] = entry
            out.entries[j, i] = -entry
    return out


def random_symmetric_odd(size, signature, mode, rng):
    """Symmetric matrix of random 1-forms."""
    out = AlgebraMatrix.zeros(size, size, signature, mode)
    for i in range(size):
        for j in range(i, size):
            entry = random_form(signature, 1, mode, rng)
            out.entries[i, j] = entry
            out.entries[j, i] = entry
    return out


# ------------------------------------------------------------- Lemma 2.1


def lemma_signatures(base_dim, rank):
    return GeneratorSignature(base_dim, False, rank, rank), GeneratorSignature(base_dim, has_z=True)


def gaussian_weight(V):
    """exp(½⟨ψ, Vψ⟩ - ½⟨ψ̂, Vψ̂⟩)."""
    half = rational(Fraction(1, 2), V.mode)
    return exp_even((pairing(V, "psi", "psi") - pairing(V, "psihat", "psihat")).scale(half))


def lemma21_left(V, W):
    """∫ ⟨ψ, Wψ̂⟩ exp(½⟨ψ, Vψ⟩ - ½⟨ψ̂, Vψ̂⟩) over both blocks."""
    return berezin_double(pairing(W, "psi", "psihat") * gaussian_weight(V))


def lemma21_right(V, W, rank):
    """
    -π^{N-1} Tr_z det(V/(iπ) + zW), written as -(-i)^{N-1} Tr_z det(V + zW):
    the z-linear part of the determinant has N-1 factors from V.
    """
    sig = V.signature
    z = Multivector.generator(sig, sig.z, V.mode)
    det = det_even(V + W.scale(z))
    factor = Multivector.scalar(-1, sig, V.mode)
    minus_i = -imaginary_unit(V.mode)
    for _ in range(rank - 1):
        factor = factor.scale(minus_i)
    return tr_z(factor * det)


def lemma21_pairing_integral(V):
    """∫ ⟨ψ, ψ̂⟩ exp(½⟨ψ, Vψ⟩ - ½⟨ψ̂, Vψ̂⟩)."""
    identity = AlgebraMatrix.identity(V.shape[0], V.signature, V.mode)
    return berezin_double(pairing(identity, "psi", "psihat") * gaussian_weight(V))


def _embed(matrix, signature):
    return matrix.map(lambda entry: entry.embed(signature))


def lemma21_residuals(rank, base_dim, mode, rng, square=False):
    """
    Residuals of Eq (2.7) and of Eqs (2.8)/(2.9) for one random draw.

    With ``square`` V is taken as W'²/2 for a random symmetric odd W', the
    shape in which the lemma is applied to ω²/8.
    """
    base = GeneratorSignature(base_dim)
    fiber, with_z = lemma_signatures(base_dim, rank)
    W = random_symmetric_odd(rank, base, mode, rng)
    if square:
        root = random_symmetric_odd(rank, base, mode, rng)
        V = (root @ root).scale(rational(Fraction(1, 2), mode))
    else:
        V = random_antisymmetric(rank, base, mode, rng)
    left = lemma21_left(_embed(V, fiber), _embed(W, fiber))
    right = lemma21_right(_embed(V, with_z), _embed(W, with_z), rank)
    pairing_value = lemma21_pairing_integral(_embed(V, fiber))
    expected = Multivector.scalar(1 if rank == 1 else 0, pairing_value.signature, mode)
    return form_residual(left, right), form_residual(pairing_value, expected), left.magnitude()


# ------------------------------------------------------------- engine laws


def berezin_residuals(rank, mode):
    """Eq (2.1), the ψ-block vanishing, Eq (2.6) and the interleaved sign."""
    sig = GeneratorSignature.standard(1, rank)
    psis = [sig.psi(k) for k in range(rank)]
    hats = [sig.psihat(k) for k in range(rank)]
    single_sig = GeneratorSignature(1, False, rank, 0)
    top = Multivector.monomial(single_sig, [single_sig.psi(k) for k in range(rank)], mode)
    worst = form_residual(berezin_single(top), Multivector.scalar(1, single_sig.without_psi(), mode))
    if rank > 1:
        short = Multivector.monomial(single_sig, [single_sig.psi(0)], mode)
        worst = max(worst, berezin_single(short).magnitude())
    with_base = Multivector.monomial(single_sig, [0] + [single_sig.psi(k) for k in range(rank)], mode)
    worst = max(worst, form_residual(berezin_single(with_base),
                                     Multivector.generator(single_sig.without_psi(), 0, mode)))
    double_top = Multivector.monomial(sig, psis + hats, mode)
    target = Multivector.scalar(1, berezin_double(double_top).signature, mode)
    worst = max(worst, form_residual(berezin_double(double_top), target))
    interleaved = Multivector.monomial(sig, [g for pair in zip(psis, hats) for g in pair], mode)
    sign = -1 if (rank * (rank - 1) // 2) % 2 else 1
    worst = max(worst, form_residual(berezin_double(interleaved), target.scale(sign)))
    if rank > 1:
        worst = max(worst, berezin_double(Multivector.monomial(sig, [psis[0], hats[0]], mode)).magnitude())
    return worst


def tr_z_residual(mode):
    sig = GeneratorSignature(0, False, 1, 0, True)
    z = Multivector.generator(sig, sig.z, mode)
    psi = Multivector.generator(sig, sig.psi(0), mode)
    three = Multivector.scalar(3, sig, mode)
    cases = [(three + z.scale(5), Multivector.scalar(5, sig.without_z(), mode)),
             (z * psi, Multivector.generator(sig.without_z(), 0, mode)),
             (Multivector.scalar(7, sig, mode), Multivector.zero(sig.without_z(), mode))]
    return max(form_residual(tr_z(a), b) for a, b in cases)


def _parity(form):
    return 1 if form.is_odd() else 0


def algebra_law_residuals(base_dim, mode, rng):
    """
    Associativity, graded commutativity, i_v∘i_v = 0 and exp(a)exp(-a) = 1
    on random elements.

    Returns:
        dict: law name -> largest residual
    """
    rank = 2
    sig = GeneratorSignature.standard(base_dim, rank)
    pool = list(range(sig.count))
    worst = {"associativity": 0.0, "graded-commutativity": 0.0, "interior-square": 0.0, "exp-inverse": 0.0}
    for _ in range(RANDOM_TRIALS):
        a, b, c = (random_form(sig, int(rng.integers(1, 4)), mode, rng, pool) for _ in range(3))
        worst["associativity"] = max(worst["associativity"], form_residual((a * b) * c, a * (b * c)))
        sign = -1 if _parity(a) and _parity(b) else 1
        worst["graded-commutativity"] = max(worst["graded-commutativity"],
                                            form_residual(a * b, (b * a).scale(sign)))
        v = [random_coefficient(rng, mode) for _ in range(rank)]
        top = Multivector.monomial(sig, [sig.psi(k) for k in range(rank)] + [0], mode)
        worst["interior-square"] = max(worst["interior-square"],
                                       interior_mult(v, "psi", interior_mult(v, "psi", top + a)).magnitude())
        even = random_form(sig, 2, mode, rng, pool) + random_form(sig, 4, mode, rng, pool)
        unit = Multivector.scalar(1, sig, mode)
        worst["exp-inverse"] = max(worst["exp-inverse"],
                                   form_residual(exp_even(even) * exp_even(-even), unit))
    return worst


def supercommutator_residual(rank, base_dim, mode, rng):
    """Tr_s[ab - (-1)^{|a||b|} ba] for homogeneous a = α⊗X, b = β⊗Y on Λ(C^N)."""
    space = clifford_generators(rank)
    generators = space.generators()
    sig = GeneratorSignature(base_dim)
    worst = 0.0
    for _ in range(RANDOM_TRIALS):
        factors = []
        for _ in range(2):
            count = int(rng.integers(1, len(generators) + 1))
            chosen = sorted(rng.choice(len(generators), size=count, replace=False))
            operator = generators[chosen[0]]
            for k in chosen[1:]:
                operator = operator @ generators[k]
            coefficient = random_form(sig, int(rng.integers(0, 3)), mode, rng)
            if coefficient.is_zero():
                coefficient = Multivector.scalar(1, sig, mode)
            parity = (_parity(coefficient) + count) % 2
            factors.append((fock_matrix(space, [(coefficient, operator)], sig, mode), parity))
        (a, pa), (b, pb) = factors
        commutator = (a @ b) - (b @ a).scale(-1 if pa and pb else 1)
        worst = max(worst, supertrace(commutator).magnitude())
    return worst


def matrix_function_residuals(mode):
    """sqrtdet_sinc(0) = 1, det_even [[zθ1, c], [-c, zθ2]] = c², ½⟨ψ, Aψ⟩ for N = 2."""
    sig = GeneratorSignature(2, has_z=True)
    z = Multivector.generator(sig, sig.z, mode)
    theta = [Multivector.generator(sig, a, mode) for a in range(2)]
    c = Multivector.scalar(3, sig, mode)
    matrix = AlgebraMatrix.zeros(2, 2, sig, mode)
    matrix.entries[0, 0], matrix.entries[0, 1] = z * theta[0], c
    matrix.entries[1, 0], matrix.entries[1, 1] = -c, z * theta[1]
    worst = form_residual(det_even(matrix), Multivector.scalar(9, sig, mode))
    zero = AlgebraMatrix.zeros(2, 2, sig, mode)
    worst = max(worst, form_residual(sqrtdet_sinc(zero), Multivector.scalar(1, sig, mode)))
    fiber = GeneratorSignature(2, False, 2, 0)
    v = Multivector.monomial(fiber, [0, 1], mode)
    A = AlgebraMatrix.zeros(2, 2, fiber, mode)
    A.entries[0, 1], A.entries[1, 0] = v, -v
    expected = v * Multivector.monomial(fiber, [fiber.psi(0), fiber.psi(1)], mode)
    return max(worst, form_residual(antisym_to_form(A), expected))


# ------------------------------------------------------------- §1 forms


def lemma15_residual(germ):
    """(PQ)^z - P(0) Q^z - P^z Q(0) with P = c, Q = ch."""
    weight = germ.rank + 1
    P, Q = total_chern(weight), chern_character(germ.rank, weight)
    mode = germ.mode
    lhs = P_z(germ, P * Q)
    rhs = (P_z(germ, Q).scale(rational(P.value_at_zero(), mode))
           + P_z(germ, P).scale(rational(Q.value_at_zero(), mode)))
    return form_residual(lhs, rhs)


def dual_residual(germ):
    """P^z of the antidual plus P^z of the bundle, P = ch."""
    from core.flat_bundle import dual_germ

    P = chern_character(germ.rank, germ.rank + 1)
    return form_residual(P_z(dual_germ(germ), P) + P_z(germ, P))


def dual_omega_trace_residual(germ):
    """Tr ω_{dual}^{2j-1} = -Tr ω^{2j-1}, j = 1..N."""
    from core.flat_bundle import omega

    worst = 0.0
    for j in range(1, germ.rank + 1):
        k = 2 * j - 1
        worst = max(worst, form_residual(dual_omega(germ).power(k).trace() + omega(germ).power(k).trace()))
    return worst


def phi_cochain_residuals(rank, rng):
    """Φ_1 = Tr, antisymmetry under a repeated argument and unitary invariance of Φ_2."""
    size = max(rank, 2)
    matrices = [random_hermitian(rng, size) for _ in range(3)]
    trace = abs(phi_j_cochain(1, matrices[0]) - np.trace(matrices[0]))
    repeated = abs(phi_j_cochain(2, matrices[0], matrices[1], matrices[0]))
    k = random_unitary(rng, size)
    moved = [k @ m @ k.conj().T for m in matrices]
    invariance = abs(phi_j_cochain(2, *moved) - phi_j_cochain(2, *matrices))
    return trace, repeated, invariance


# ------------------------------------------------------------- suite


def exact_identities(scenario):
    """
    Run the exact-identity suite for one scenario.

    Args:
        scenario (Scenario): rank, base dimension, jet order, mode and seed

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport("exact-identities", scenario.to_payload())
    mode = scenario.scalar_mode
    exact = mode is ScalarMode.EXACT
    tol = 0.0 if exact else scenario.tolerance
    rank, base_dim, order = scenario.n, scenario.m, scenario.order
    inputs = {"N": rank, "m": base_dim, "K": order, "mode": mode.value, "seed": scenario.seed}
    rng = np.random.default_rng(scenario.seed)
    logger.info("exact identities: N=%d m=%d K=%d %s", rank, base_dim, order, mode.value)

    report.check("eq2.1-2.6/berezin", "Eqs (2.1), (2.6) Berezin normalisations and block vanishing",
                 lambda: berezin_residuals(rank, mode), tol, inputs, exact)
    report.check("eq1.13/tr-z", "Eq (1.13) Tr_z[α_0 + zα_1] = α_1", lambda: tr_z_residual(mode), tol, inputs, exact)
    laws = {}

    def law(name):
        if not laws:
            laws.update(algebra_law_residuals(base_dim, mode, rng))
        return laws[name]

    for check_id, name, reference in ALGEBRA_LAWS:
        report.check(check_id, reference, lambda name=name: law(name), tol, inputs, exact)
    report.check("eqA.2/supercommutator", "Eq (A.2): Tr_s vanishes on supercommutators",
                 lambda: supercommutator_residual(min(rank, 2), base_dim, mode, rng), tol, inputs, exact)
    report.check("thmB.1/matrix-functions", "Thm B.1: det of even matrices, det^{1/2}(sin M/M) at 0; Eq (2.10)",
                 lambda: matrix_function_residuals(mode), tol, inputs, exact)

    lemma = {}

    def lemma21(square):
        if square not in lemma:
            lemma[square] = lemma21_residuals(rank, base_dim, mode, np.random.default_rng(scenario.seed + 17),
                                              square)
        return lemma[square]

    def eq27(square):
        residual, _, size = lemma21(square)
        return residual, f"|left side| = {size:.6g}"

    report.check("lem2.1/eq2.7", "Lemma 2.1, Eq (2.7), random V and W", lambda: eq27(False), tol, inputs, exact)
    report.check("lem2.1/eq2.7/omega-square", "Lemma 2.1, Eq (2.7) with V = W'²/2",
                 lambda: eq27(True), tol, inputs, exact)
    if rank == 1:
        report.check("lem2.1/eq2.9", "Lemma 2.1, Eq (2.9) ∫⟨ψ, ψ̂⟩ e^{...} = 1 for N = 1",
                     lambda: lemma21(False)[1], tol, inputs, exact)
    else:
        report.check("lem2.1/eq2.8", "Lemma 2.1, Eq (2.8) ∫⟨ψ, ψ̂⟩ e^{...} = 0 with V = W'²/2",
                     lambda: lemma21(True)[1], tol, inputs, exact)
        # nonzero for odd N >= 3 unless the invariants of V vanish
        report.check("lem2.1/eq2.8/generic-V", "Lemma 2.1, Eq (2.8) for a generic antisymmetric V",
                     lambda: lemma21(False)[1], tol, inputs, exact, informational=True)

    germ = random_germ(rank, base_dim, order, mode, scenario.seed, lattice_scale=scenario.lattice_scale)
    germ_inputs = {**inputs, "germ": germ.label}
    report.merge(newton_suite(germ, scenario.seed, scenario.tolerance))
    report.check("lem1.3/eq1.10", "Lemma 1.3, Eq (1.10) P(∇, h) = P(0) for P = Td",
                 lambda: form_residual(P_even(germ, todd(rank + 1)),
                                       Multivector.scalar(1, germ.signature, mode)), tol, germ_inputs, exact)
    for j in range(1, rank + 2):
        report.check(f"eq1.15/j{j}", "Eq (1.15) n_j^z closed form against Eq (1.14)",
                     lambda j=j: form_residual(n_j_z(germ, j), n_j_z_closed_form(germ, j)),
                     tol, {**germ_inputs, "j": j}, exact)
    report.check(f"eq1.20/j{rank + 1}", "Eq (1.20) n_j^z = 0 for j > N",
                 lambda: form_residual(n_j_z_closed_form(germ, rank + 1)), tol, germ_inputs, exact)
    report.check("lem1.5/eq1.16", "Lemma 1.5, Eq (1.16) (PQ)^z = P(0)Q^z + P^z Q(0)",
                 lambda: lemma15_residual(germ), tol, germ_inputs, exact)
    report.check("lem1.7/eq1.17", "Lemma 1.7, Eq (1.17) P^z of the antidual = -P^z",
                 lambda: dual_residual(germ), tol, germ_inputs, exact)
    report.check("lem1.7/eq1.18", "Lemma 1.7, Eq (1.18) Tr ω_{dual}^{2j-1} = -Tr ω^{2j-1}",
                 lambda: dual_omega_trace_residual(germ), tol, germ_inputs, exact)
    for j in (2, 3):
        report.check(f"lem2.6/transpose/j{j}", "Lemma 2.6 proof, (hω^j)ᵀ = (-1)^{j(j-1)/2} hω^j",
                     lambda j=j: transpose_sign_residual(germ, j), tol, {**germ_inputs, "j": j}, exact)

    complex_germ = random_germ(rank, base_dim, order, mode, scenario.seed + 1, field=Field.COMPLEX)
    report.check("thm1.11/eq1.26", "Thm 1.11, Eq (1.26) ch^z(Λ(F̄*)) = n_N^z / N",
                 lambda: form_residual(ch_z_lambda(complex_germ),
                                       n_j_z(complex_germ, rank).scale(rational(Fraction(1, rank), mode))),
                 tol, {**inputs, "germ": complex_germ.label, "field": "complex"}, exact)

    unimodular = random_germ(rank, base_dim, order, mode, scenario.seed + 2, unimodular=True)
    section = SectionSpec.flat([int(k) for k in rng.integers(-2, 3, size=rank)])
    report.check("thm2.13/eq2.42-2.43", "Thm 2.13, Eq (2.42) Berezin formula = Eq (2.43) product formula",
                 lambda: form_residual(pull_vol(unimodular, section, method="berezin").form,
                                       pull_vol(unimodular, section).form),
                 tol, {**inputs, "germ": unimodular.label, "section": list(section.values)}, exact)

    cochain = {}

    def phi(k):
        if not cochain:
            cochain["values"] = phi_cochain_residuals(rank, np.random.default_rng(scenario.seed))
        return cochain["values"][k]

    float_tol = scenario.tolerance
    report.check("eq1.31/j1-trace", "Eq (1.31) Φ_1(M) = Tr M", lambda: phi(0), float_tol, inputs)
    report.check("eq1.31/antisymmetry", "Eq (1.31) Φ_2 with a repeated argument vanishes",
                 lambda: phi(1), float_tol, inputs)
    report.check("eq1.31/unitary-invariance", "Eq (1.31) Φ_2(kMk*) = Φ_2(M)", lambda: phi(2), float_tol, inputs)

    report.merge(bridge_identity_check(rank, mode=mode, seed=scenario.seed, tolerance=scenario.tolerance))
    return report
