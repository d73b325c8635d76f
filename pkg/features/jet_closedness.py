"""
Jet Closedness Module for Superform Lab

This module provides the ``jets`` suite: the jet calculus itself (d∘d = 0,
the Leibniz rule, the chain rule for jet exponentials), the extension of a
germ to B x R+, and the closedness of every characteristic and pulled-back
form up to jet order K-1.

Form-calculus checks run in the scenario's scalar mode. Closedness of the
pulled-back Thom forms and of the lattice sums runs on the float image of
the germ at the scenario tolerance.
"""

import logging
from fractions import Fraction

import numpy as np

from core.flat_bundle import (
    P_z,
    chern_character,
    flatness_residual,
    metric_variation_residual,
    n_j_z,
    omega,
    random_germ,
    total_chern,
)
from core.grassmann import GeneratorSignature, Multivector
from core.jet_forms import (
    ScaleMode,
    d,
    extend_base,
    form_residual,
    function_form,
    lift_jet,
    restrict_s,
    s_jet,
)
from core.jets import JetScalar, jet_exp, jet_inverse, monomials, rational
from core.lattice_sums import float_germ, sum_pulled
from core.scalars import ScalarMode
from core.thom_forms import DELTA, RHO, Frame, SectionSpec, pull_delta, pull_delta_generic, pull_rho

logger = logging.getLogger(__name__)

# Numerators of random jet coefficients are drawn from -JET_RANGE..JET_RANGE over JET_DENOMINATOR
JET_RANGE = 3
JET_DENOMINATOR = 4

# Base value of s on extended germs
EXTENSION_POINT = Fraction(3, 2)


def random_jet(rng, nvars, order, mode, constant=True):
    """Jet with random small rational coefficients (no constant term when ``constant`` is False)."""
    terms = {}
    for exps in monomials(nvars, order):
        if not constant and sum(exps) == 0:
            continue
        k = int(rng.integers(-JET_RANGE, JET_RANGE + 1))
        if k:
            terms[exps] = rational(Fraction(k, JET_DENOMINATOR), mode)
    return JetScalar(nvars, order, terms, mode)


def random_jet_form(rng, signature, order, mode, degree):
    """Random base form of one degree with jet coefficients."""
    total = Multivector.zero(signature, mode)
    base = signature.base_dim
    if degree > base:
        return total
    for _ in range(2):
        indices = [int(a) for a in sorted(rng.choice(base, size=degree, replace=False))]
        mask_form = Multivector.monomial(signature, indices, mode)
        total = total + mask_form * function_form(random_jet(rng, base, order, mode), signature)
    return total


def lift_form(form, signature):
    """Pull a form over B back to B x R+."""
    return form.map_coefficients(lambda value: lift_jet(value) if isinstance(value, JetScalar) else value) \
        .embed(signature)


def imaginary_part(form):
    """Largest imaginary part among the jet coefficients of ``form``."""
    worst = 0.0
    for value in form.terms.values():
        values = value.terms.values() if isinstance(value, JetScalar) else (value,)
        for v in values:
            worst = max(worst, abs(complex(v).imag))
    return worst


# ------------------------------------------------------------- calculus


def product_rule_oracle(mode):
    """d(x1 x2) against x2 dx1 + x1 dx2 on a 2-dimensional base."""
    sig = GeneratorSignature(2)
    x1, x2 = (JetScalar.variable(a, 2, 2, mode) for a in range(2))
    dx1, dx2 = (Multivector.generator(sig, a, mode) for a in range(2))
    expected = dx1 * function_form(x2, sig) + dx2 * function_form(x1, sig)
    return form_residual(d(function_form(x1 * x2, sig)), expected)


def leibniz_residual(rng, base_dim, order, mode):
    """d(a∧b) - da∧b - (-1)^{|a|} a∧db for a random 1-form a and 0-form b, and for two 1-forms."""
    sig = GeneratorSignature(base_dim)
    worst = 0.0
    for degree_a, degree_b in ((1, 0), (1, 1), (0, 2)):
        a = random_jet_form(rng, sig, order, mode, degree_a)
        b = random_jet_form(rng, sig, order, mode, degree_b)
        sign = -1 if degree_a % 2 else 1
        worst = max(worst, form_residual(d(a * b), d(a) * b + (a * d(b)).scale(sign)))
    return worst


def d_squared_residual(rng, base_dim, order, mode):
    sig = GeneratorSignature(base_dim)
    return max(form_residual(d(d(random_jet_form(rng, sig, order, mode, degree)))) for degree in (0, 1))


def chain_rule_residual(rng, base_dim, order, mode):
    """d e^p = e^p dp for a random jet p vanishing at the base point."""
    sig = GeneratorSignature(base_dim)
    p = random_jet(rng, base_dim, order, mode, constant=False)
    exp_p = function_form(jet_exp(p), sig)
    return form_residual(d(exp_p), exp_p * d(function_form(p, sig)))


def extension_residuals(germ):
    """
    On the scale-up extension: ω' - ρ*ω - (ds/s) I, (ω')² - ρ*ω², and the
    s = s0 restriction of P^z against P^z of the germ.

    Returns:
        tuple: three residuals
    """
    mode = germ.mode
    s0 = EXTENSION_POINT if mode is ScalarMode.EXACT else float(EXTENSION_POINT)
    extended = extend_base(germ, ScaleMode.SCALE_UP, s0)
    sig = extended.signature
    w_ext = omega(extended)
    w = omega(germ).map(lambda entry: lift_form(entry, sig))
    s = s_jet(extended.nvars, germ.order, s0, mode)
    ds_over_s = Multivector.generator(sig, sig.ds, mode) * function_form(jet_inverse(s), sig)
    gap = 0.0
    for i in range(germ.rank):
        for j in range(germ.rank):
            expected = w.entries[i, j] + (ds_over_s if i == j else Multivector.zero(sig, mode))
            gap = max(gap, form_residual(w_ext.entries[i, j], expected))
    square = w_ext @ w_ext
    lifted_square = w @ w
    square_gap = max(form_residual(a, b) for a, b in zip(square.entries.flat, lifted_square.entries.flat))
    polynomial = chern_character(germ.rank, germ.rank + 1)
    restriction = form_residual(restrict_s(P_z(extended, polynomial)), P_z(germ, polynomial))
    return gap, square_gap, restriction


# ------------------------------------------------------------- pullbacks


def lattice_points(rank):
    """Integer points e_1 and (1, -1, 1, ...), without repeats."""
    first = tuple(1 if k == 0 else 0 for k in range(rank))
    alternating = tuple(1 if k % 2 == 0 else -1 for k in range(rank))
    return [first] if first == alternating else [first, alternating]


def dual_sections(rank, scale):
    return [SectionSpec.lattice_point(n, scale, dual=True) for n in lattice_points(rank)]


def primal_sections(rank, scale):
    return [SectionSpec.lattice_point(n, scale) for n in lattice_points(rank)]


def nonflat_section(germ):
    """λ_k = k + 1 + x_1, a polynomial dual section that is not flat."""
    jets = [JetScalar.variable(0, germ.nvars, germ.order, germ.mode, center=k + 1.0) for k in range(germ.rank)]
    return SectionSpec.polynomial(jets, Frame.DUAL)


# ------------------------------------------------------------- suite


def jet_closedness(scenario):
    """
    Run the jet-closedness suite for one scenario.

    Args:
        scenario (Scenario): rank, base dimension, jet order, mode, seed and times

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport("jets", scenario.to_payload())
    mode = scenario.scalar_mode
    exact = mode is ScalarMode.EXACT
    tol = 0.0 if exact else scenario.tolerance
    rank, base_dim, order = scenario.n, scenario.m, scenario.order
    inputs = {"N": rank, "m": base_dim, "K": order, "mode": mode.value, "seed": scenario.seed}
    rng = np.random.default_rng(scenario.seed)
    logger.info("jet closedness: N=%d m=%d K=%d t=%s", rank, base_dim, order, list(scenario.t))

    report.check("eq2.18/product-rule", "Eq (2.18) d(x1 x2) = x2 dx1 + x1 dx2",
                 lambda: product_rule_oracle(mode), tol, {"mode": mode.value}, exact)
    report.check("eq2.18/d-squared", "Eq (2.18) d∘d = 0 up to order K-1",
                 lambda: d_squared_residual(rng, base_dim, order, mode), tol, inputs, exact)
    report.check("eq2.18/leibniz", "Eq (2.18) d is an odd derivation",
                 lambda: leibniz_residual(rng, base_dim, order, mode), tol, inputs, exact)
    report.check("eq2.18/chain-rule", "d e^p = e^p dp for p(0) = 0",
                 lambda: chain_rule_residual(rng, base_dim, order, mode), tol, inputs, exact)

    germ = random_germ(rank, base_dim, order, mode, scenario.seed, lattice_scale=scenario.lattice_scale)
    germ_inputs = {**inputs, "germ": germ.label}
    extension = {}

    def extended(k):
        if not extension:
            extension["values"] = extension_residuals(germ)
        return extension["values"][k]

    report.check("eq1.8/flatness", "Eq (1.8) ∇^u ω = dω + ω² = 0", lambda: flatness_residual(germ),
                 tol, germ_inputs, exact)
    report.check("eq2.35/omega-prime", "Eq (2.35) ω' = ρ*ω + (ds/s) I on the scale-up extension",
                 lambda: extended(0), tol, germ_inputs, exact)
    report.check("eq2.36/omega-prime-square", "Eq (2.36) (ω')² = ρ*ω²", lambda: extended(1), tol, germ_inputs, exact)
    report.check("eq2.19/restriction", "Eq (2.19) extension restricted to s = s0 leaves P^z unchanged",
                 lambda: extended(2), tol, germ_inputs, exact)

    polynomials = (("ch", chern_character(rank, rank + 1)), ("c", total_chern(rank + 1)))
    for name, polynomial in polynomials:
        report.check(f"lem1.6/closed/{name}", f"Lemma 1.6, d P^z = 0 for P = {name}",
                     lambda polynomial=polynomial: form_residual(d(P_z(germ, polynomial))),
                     tol, {**germ_inputs, "P": name}, exact)
    other = random_germ(rank, base_dim, order, mode, scenario.seed + 3)
    variation = {}

    def varied(k):
        if not variation:
            variation["values"] = metric_variation_residual(germ, other, chern_character(rank, rank + 1))
        return variation["values"][k]

    variation_inputs = {**germ_inputs, "other": other.label}
    report.check("lem1.6/variation/closed", "Lemma 1.6, P^z of an interpolating metric family is closed",
                 lambda: varied(0), tol, variation_inputs, exact)
    report.check("lem1.6/variation/transgression", "Lemma 1.6, ∂_u X = d_x T along the metric family",
                 lambda: varied(1), tol, variation_inputs, exact)

    g = float_germ(germ)
    float_inputs = {**germ_inputs, "mode": ScalarMode.FLOAT.value}
    report.check("lem1.6/real", "Lemma 1.6, P^z is real for real P",
                 lambda: imaginary_part(P_z(g, chern_character(rank, rank + 1))), scenario.tolerance, float_inputs)
    for j in range(2, rank + 1, 2):
        report.check(f"lem2.6/n{j}-vanishes", "Lemma 2.6, n_j^z = 0 for even j on a real bundle",
                     lambda j=j: form_residual(n_j_z(g, j)), scenario.tolerance, {**float_inputs, "j": j})

    unimodular = float_germ(random_germ(rank, base_dim, order, mode, scenario.seed + 2, unimodular=True,
                                        lattice_scale=scenario.lattice_scale))
    for t in scenario.t:
        for section in dual_sections(rank, g.lattice_scale):
            section_inputs = {**float_inputs, "t": t, "section": section.describe()}
            report.check(f"thm2.9/eq2.27/t{t:g}", "Thm 2.9a, d(μ*δ_t) = 0 for a flat dual section",
                         lambda t=t, section=section: form_residual(d(pull_delta(g, section, t).form)),
                         scenario.tolerance, section_inputs)
        for section in primal_sections(rank, unimodular.lattice_scale):
            section_inputs = {**float_inputs, "t": t, "section": section.describe(), "germ": unimodular.label}
            report.check(f"thm2.15/eq2.48/t{t:g}", "Thm 2.15a, d(m*ρ_t) = 0 for a lattice section",
                         lambda t=t, section=section: form_residual(d(pull_rho(unimodular, section, t).form)),
                         scenario.tolerance, section_inputs)
        report.check(f"thm2.16/eq2.60/t{t:g}", "Thm 2.16, Eq (2.60) d Σ μ*δ_t = 0",
                     lambda t=t: form_residual(d(sum_pulled(g, DELTA, t).form)), scenario.tolerance,
                     {**float_inputs, "t": t})
        if rank % 2:
            report.check(f"thm2.18/eq2.67/t{t:g}", "Thm 2.18, Eq (2.67) d Σ m*ρ_t = 0",
                         lambda t=t: form_residual(d(sum_pulled(unimodular, RHO, t).form)), scenario.tolerance,
                         {**float_inputs, "t": t, "germ": unimodular.label})

    t = scenario.t[0]
    section = nonflat_section(g)
    # a non-flat section is not expected to give a closed form
    report.check("rem2.11/non-flat", "Remark 2.11, d(λ*δ_t) for a non-flat section",
                 lambda: (form_residual(d(pull_delta_generic(g, section, t).form)),
                          "nonzero values confirm that flatness is needed"),
                 scenario.tolerance, {**float_inputs, "t": t, "section": section.describe()}, informational=True)
    return report
