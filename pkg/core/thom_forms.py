"""
Thom Forms Module for Superform Lab

This module provides the Mathai-Quillen forms α_t, β_t, the flat-case forms
δ_t, ε_t, the volume form Vol with its contraction i_x Vol, and the
auxiliary forms ρ_t, σ_t, always pulled back along a section of the fiber
bundle (forms on the total space are never built on their own).

Conventions:
    - ψ_a (and ψ̂_a) are the flat-frame basis vectors e_a of the fiber V,
      with Gram matrix G. Pairings are positional:
      ⟨ψ, Aψ̂⟩ = Σ ψ_b (A G⁻¹)_{bd} ψ̂_d.
    - A Berezin integral over one block carries √det G, over both blocks
      det G; for G = I this is the normalisation ∫ψ_1..ψ_N ψ̂_1..ψ̂_N = 1.
    - The Gaussian factor e^{-t|λ|²} is split: its value at the base point
      stays symbolic in ``PulledForm.log_prefactor``; the x-dependent rest
      is expanded as a jet and folded into the form.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np
from scipy import integrate

from core.errors import DomainError, ExactnessError, ShapeError
from core.flat_bundle import Field, FlatBundleGerm, dual_germ, omega
from core.grassmann import (
    GeneratorSignature,
    Multivector,
    berezin_double,
    berezin_single,
    exp_even,
    interior_mult,
    split_ds,
)
from core.jet_forms import (
    ScaleMode,
    base_signature,
    d,
    evaluate_at_zero,
    extend_base,
    form_residual,
    function_form,
    lift_jet,
    restrict_s,
    s_jet,
    slice_s,
)
from core.jets import JetScalar, jet_exp, jet_inverse, jet_power, jet_sqrt, rational
from core.matrices import AlgebraMatrix
from core.scalars import ScalarMode, coerce, power_scalar

logger = logging.getLogger(__name__)

ALPHA = "alpha"
BETA = "beta"
DELTA = "delta"
EPSILON = "epsilon"
VOL = "vol"
I_X_VOL = "i_x_vol"
RHO = "rho"
SIGMA = "sigma"

# Relative tolerance used when validating lattice membership of float sections
LATTICE_TOLERANCE = 1e-9


class Frame(str, Enum):
    PRIMAL = "primal"  # a section of E
    DUAL = "dual"      # a section of E*


class SectionKind(str, Enum):
    FLAT_CONSTANT = "flat_constant"
    POLYNOMIAL = "polynomial"


class LatticeKind(str, Enum):
    LATTICE = "lattice"            # c Z^N
    DUAL_LATTICE = "dual_lattice"  # (2π/c) Z^N


@dataclass(frozen=True)
class SectionSpec:
    """
    A section of E or E* written in the flat frame.

    Args:
        values (tuple): base scalars (flat_constant) or JetScalars (polynomial)
        kind (SectionKind): flat constant or polynomial
        frame (Frame): primal (E) or dual (E*)
        lattice (LatticeKind): membership to validate, or None
        lattice_scale: c, used only when ``lattice`` is set
    """

    values: tuple
    kind: SectionKind = SectionKind.FLAT_CONSTANT
    frame: Frame = Frame.PRIMAL
    lattice: LatticeKind = None
    lattice_scale: object = 1

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ShapeError("a section needs at least one component")
        is_jet = [isinstance(v, JetScalar) for v in self.values]
        if self.kind is SectionKind.FLAT_CONSTANT and any(is_jet):
            raise DomainError("flat sections have constant entries")
        if self.kind is SectionKind.POLYNOMIAL and not all(is_jet):
            raise DomainError("polynomial sections need a jet per component")
        if self.lattice is not None:
            step = (float(self.lattice_scale) if self.lattice is LatticeKind.LATTICE
                    else 2 * math.pi / float(self.lattice_scale))
            for value in self.values:
                ratio = complex(value) / step
                if abs(ratio.imag) > LATTICE_TOLERANCE or abs(ratio.real - round(ratio.real)) > LATTICE_TOLERANCE:
                    raise DomainError(f"{value} is not a point of the {self.lattice.value}")

    @classmethod
    def flat(cls, values, frame=Frame.PRIMAL):
        return cls(tuple(values), SectionKind.FLAT_CONSTANT, Frame(frame))

    @classmethod
    def polynomial(cls, jets, frame=Frame.PRIMAL):
        return cls(tuple(jets), SectionKind.POLYNOMIAL, Frame(frame))

    @classmethod
    def lattice_point(cls, n, scale=1, dual=False):
        """
        The point c·n of Λ = cZ^N, or (2π/c)·n of Λ* when ``dual``.

        Example:
            >>> SectionSpec.lattice_point((1, 0), scale=2).values
            (2, 0)
        """
        if dual:
            step = 2 * math.pi / float(scale)
            return cls(tuple(k * step for k in n), SectionKind.FLAT_CONSTANT, Frame.DUAL,
                       LatticeKind.DUAL_LATTICE, scale)
        scale_q = Fraction(scale) if not isinstance(scale, float) else scale
        return cls(tuple(k * scale_q for k in n), SectionKind.FLAT_CONSTANT, Frame.PRIMAL,
                   LatticeKind.LATTICE, scale)

    @property
    def rank(self):
        return len(self.values)

    @property
    def is_flat(self):
        return self.kind is SectionKind.FLAT_CONSTANT

    def is_zero(self):
        return self.is_flat and all(v == 0 for v in self.values)

    def scalars(self, mode):
        if not self.is_flat:
            raise DomainError("only flat sections have constant values")
        return [coerce(v, mode) for v in self.values]

    def jets(self, germ):
        """The components as jets over the coordinates of ``germ``."""
        if self.rank != germ.rank:
            raise ShapeError(f"section of rank {self.rank} on a rank-{germ.rank} bundle")
        if self.is_flat:
            return [germ.jet(coerce(v, germ.mode)) for v in self.values]
        out = []
        for jet in self.values:
            if jet.mode is not germ.mode:
                raise DomainError("section and germ in different scalar modes")
            if jet.nvars == germ.nvars - 1 and germ.extra_s:
                jet = lift_jet(jet)
            if jet.nvars != germ.nvars:
                raise ShapeError(f"section jets over {jet.nvars} variables, germ has {germ.nvars}")
            out.append(jet.with_order(min(jet.order, germ.order)))
        return out

    def lifted(self):
        """The same section pulled back to B x R+."""
        if self.is_flat:
            return self
        return replace(self, values=tuple(lift_jet(j) for j in self.values))

    def describe(self):
        if self.is_flat:
            return {"frame": self.frame.value, "values": [str(v) for v in self.values]}
        return {"frame": self.frame.value, "kind": self.kind.value}


@dataclass
class PulledForm:
    """
    The pullback of one of the forms along a section.

    The represented form is ``constant * exp(log_prefactor) * form``, where
    ``log_prefactor`` is the base-point value of the Gaussian exponent
    (exact in exact mode) and ``constant`` collects irrational factors such
    as π^{-N/2} (a float, or 1).
    """

    form: Multivector
    family: str
    t: object
    log_prefactor: object = 0
    constant: object = 1
    section: dict = field(default_factory=dict)

    def value(self):
        """The form with every prefactor multiplied in (float mode)."""
        form = self.form
        if form.mode is ScalarMode.EXACT:
            form = to_float(form)
        factor = complex(self.constant) * complex(np.exp(complex(self.log_prefactor)))
        return form.scale(factor)

    def same_prefactor(self, other, tolerance=1e-12):
        return (abs(complex(self.log_prefactor) - complex(other.log_prefactor)) <= tolerance
                and abs(complex(self.constant) - complex(other.constant)) <= tolerance)


def to_float(form):
    """Convert an exact form (jets included) to float mode."""
    out = {}
    for mask, value in form.terms.items():
        if isinstance(value, JetScalar):
            value = value.to_mode(ScalarMode.FLOAT)
        else:
            value = coerce(value, ScalarMode.FLOAT)
        out[mask] = value
    return Multivector._raw(form.signature, out, ScalarMode.FLOAT)


# ------------------------------------------------------------- fiber data


class FiberGeometry:
    """
    ψ-block data of a flat bundle V: its metric G, the form ω of V and the
    standard pairings, embedded in a signature with the requested blocks.
    """

    def __init__(self, germ, psi=True, psihat=True):
        self.germ = germ
        self.rank = germ.rank
        self.mode = germ.mode
        self.signature = GeneratorSignature(germ.base_dim, germ.extra_s,
                                            germ.rank if psi else 0, germ.rank if psihat else 0)
        self.omega = omega(germ, self.signature)

    @cached_property
    def omega_squared(self):
        return self.omega @ self.omega

    @cached_property
    def inverse_matrix(self):
        return AlgebraMatrix.from_scalars(self.germ.inverse, self.signature, self.mode)

    @cached_property
    def det(self):
        return self.germ.det

    @cached_property
    def sqrt_det(self):
        return jet_sqrt(self.germ.det)

    def scalar(self, value):
        return Multivector.scalar(value, self.signature, self.mode)

    def half(self):
        return rational(Fraction(1, 2), self.mode)

    def psi(self, k):
        return Multivector.generator(self.signature, self.signature.psi(k), self.mode)

    def psihat(self, k):
        return Multivector.generator(self.signature, self.signature.psihat(k), self.mode)

    def block(self, name):
        make = self.psi if name == "psi" else self.psihat
        return [make(k) for k in range(self.rank)]

    def pairing(self, matrix, left, right):
        """⟨left, A right⟩ = Σ left_b (A G⁻¹)_{bd} right_d."""
        weighted = matrix @ self.inverse_matrix
        lhs, rhs = self.block(left), self.block(right)
        total = Multivector.zero(self.signature, self.mode)
        for b in range(self.rank):
            for e in range(self.rank):
                entry = weighted.entries[b, e]
                if entry.is_zero():
                    continue
                total = total + lhs[b] * entry * rhs[e]
        return total

    @cached_property
    def curvature(self):
        """R^u = -⅛⟨ψ, ω²ψ⟩."""
        return self.pairing(self.omega_squared, "psi", "psi").scale(rational(Fraction(-1, 8), self.mode))

    @cached_property
    def omega_hat(self):
        """ω̂ = ⟨ψ, ωψ̂⟩."""
        return self.pairing(self.omega, "psi", "psihat")

    @cached_property
    def omega_hat_squared(self):
        """ω̂² = ½⟨ψ̂, ω²ψ̂⟩ (a ψ̂-only element, not the square of ω̂)."""
        return self.pairing(self.omega_squared, "psihat", "psihat").scale(self.half())

    @cached_property
    def psi_psihat(self):
        identity = AlgebraMatrix.identity(self.rank, self.signature, self.mode)
        return self.pairing(identity, "psi", "psihat")

    def vector(self, coefficients, name):
        """Σ_b c_b · block_b with even coefficients (scalars, jets or 2-forms)."""
        total = Multivector.zero(self.signature, self.mode)
        for c, generator in zip(coefficients, self.block(name)):
            total = total + (c * generator if isinstance(c, Multivector) else generator.scale(c))
        return total

    def quadratic(self, jets):
        """|λ|² = λᵀ G λ (λ̄ᵀ G λ for complex bundles)."""
        total = self.germ.jet(0)
        for a, la in enumerate(jets):
            for b, lb in enumerate(jets):
                total = total + la.conjugate() * self.germ.metric[a, b] * lb
        return total

    def connection_image(self, jets):
        """u = dλ + ½ωλ as a list of 1-forms in the signature."""
        base = base_signature(self.germ.base_dim, self.germ.extra_s)
        half = self.half()
        out = []
        for a in range(self.rank):
            term = d(function_form(jets[a], base)).embed(self.signature)
            for b in range(self.rank):
                entry = self.omega.entries[a, b]
                if not entry.is_zero():
                    term = term + entry.scale(jets[b] * half)
            out.append(term)
        return out

    def omega_section(self, jets):
        """The 1-forms (ωλ)_a."""
        out = []
        for a in range(self.rank):
            term = Multivector.zero(self.signature, self.mode)
            for b in range(self.rank):
                entry = self.omega.entries[a, b]
                if not entry.is_zero():
                    term = term + entry.scale(jets[b])
            out.append(term)
        return out


def _gaussian(exponent):
    """Split exp(E) for a jet E into (E(0), exp(E - E(0)))."""
    head = exponent.constant_term()
    return head, jet_exp(exponent - head)


def _reciprocal(value, mode):
    if isinstance(value, JetScalar):
        return jet_inverse(value)
    return coerce(1, mode) / value


def _sqrt_t(t, mode):
    if isinstance(t, JetScalar):
        return jet_sqrt(t)
    return power_scalar(t, Fraction(1, 2), mode)


def _t_power(t, exponent, mode):
    if isinstance(t, JetScalar):
        return jet_power(t, exponent)
    return power_scalar(t, exponent, mode)


def _check_t(t):
    value = t.constant_term() if isinstance(t, JetScalar) else t
    if isinstance(value, complex):
        value = value.real
    elif hasattr(value, "re"):
        value = value.re
    if value <= 0:
        raise DomainError(f"t must be positive, got {t}")


def _mode_t(t, mode):
    """t as a base scalar of ``mode`` (floats are refused in exact mode)."""
    if isinstance(t, JetScalar):
        return t
    if ScalarMode(mode) is ScalarMode.EXACT and isinstance(t, float):
        raise ExactnessError(f"float t={t} in exact mode; pass a Fraction")
    return coerce(t, mode)


def _mq_constant(rank, mode):
    """(-1)^{N(N+1)/2} split into the exact sign and the float factor π^{-N/2}."""
    sign = -1 if (rank * (rank + 1) // 2) % 2 else 1
    return sign, math.pi ** (-rank / 2)


def _require_real(germ):
    if germ.field is not Field.REAL:
        raise DomainError("this form is defined for real flat bundles")


# ------------------------------------------------------------- α and β


def _alpha_parts(germ, section, t):
    _check_t(t)
    t = _mode_t(t, germ.mode)
    geo = FiberGeometry(germ, psihat=False)
    jets = section.jets(germ)
    root = _sqrt_t(t, germ.mode)
    u = geo.connection_image(jets)
    exponent = -(geo.curvature.scale(geo.half())) - geo.vector(u, "psi").scale(root)
    body = exp_even(exponent)
    head, rest = _gaussian(geo.quadratic(jets) * (-t))
    return geo, jets, root, body, head, rest


def pull_alpha(germ, section, t):
    """
    λ*α_t = (-1)^{N(N+1)/2} π^{-N/2} √det G ∫ψ exp(-A_t), A_t built from the
    unitary connection: A_t = R/2 + √t (dλ + ½ωλ)·ψ + t|λ|².

    Args:
        germ (FlatBundleGerm): the bundle V = E
        section (SectionSpec): flat or polynomial primal section
        t: positive time (a perfect square in exact mode)

    Returns:
        PulledForm: the N-form part of λ*α_t
    """
    geo, jets, root, body, head, rest = _alpha_parts(germ, section, t)
    sign, constant = _mq_constant(germ.rank, germ.mode)
    form = berezin_single(body).scale(geo.sqrt_det * rest).scale(sign)
    return PulledForm(form, ALPHA, t, head, constant, section.describe())


def pull_beta(germ, section, t):
    """λ*β_t = -(-1)^{N(N+1)/2} π^{-N/2} ∫ψ (x / 2√t) exp(-A_t)."""
    geo, jets, root, body, head, rest = _alpha_parts(germ, section, t)
    sign, constant = _mq_constant(germ.rank, germ.mode)
    x = geo.vector(jets, "psi")
    factor = _reciprocal(root * 2, germ.mode)
    integrand = x * body
    form = berezin_single(integrand).scale(geo.sqrt_det * rest).scale(factor).scale(-sign)
    return PulledForm(form, BETA, t, head, constant, section.describe())


# ------------------------------------------------------------- δ and ε


def _validate_dual(germ, section):
    _require_real(germ)
    if not section.is_flat:
        raise DomainError("δ_t and ε_t pull back along flat sections only")
    if section.frame is not Frame.DUAL:
        raise DomainError("δ_t and ε_t need a section of the dual bundle")


def _dual_geometry(germ, section):
    _validate_dual(germ, section)
    return FiberGeometry(dual_germ(germ))


def _delta_epsilon_direct(geo, jets, t, family):
    """Direct evaluation of δ_t or ε_t at a (possibly non-flat) section of V."""
    mode = geo.mode
    root = _sqrt_t(t, mode)
    inverse_root = _reciprocal(root, mode)
    quarter = rational(Fraction(1, 4), mode)
    u = geo.connection_image(jets)
    exponent = (-(geo.curvature.scale(geo.half()))
                - geo.omega_hat_squared.scale(rational(Fraction(1, 8), mode))
                - geo.vector(u, "psi").scale(root))
    body = exp_even(exponent)
    head, rest = _gaussian(geo.quadratic(jets) * (-t))
    core = geo.omega_hat.scale(quarter) - geo.vector(jets, "psihat").scale(root)
    if family == DELTA:
        integrand = core * body
    else:
        x = geo.vector(jets, "psi")
        inverse_t = inverse_root * inverse_root
        first = geo.psi_psihat.scale(inverse_t * quarter)
        second = x.scale(inverse_root * geo.half()) * core
        integrand = -((first + second) * body)
    return berezin_double(integrand).scale(geo.det * rest), head


def pull_delta(germ, section, t, method="expansion"):
    """
    μ*δ_t for a flat section μ of E*.

    Args:
        germ (FlatBundleGerm): real germ of E; δ lives on V = E*
        section (SectionSpec): flat dual-frame section
        t: positive time
        method (str): "expansion" (precomputed polynomial in μ) or "direct"

    Returns:
        PulledForm: a pure (2N-1)-form
    """
    _check_t(t)
    _validate_dual(germ, section)
    if method == "expansion":
        return section_expansion(germ, DELTA).evaluate(section, t)
    geo = FiberGeometry(dual_germ(germ))
    form, head = _delta_epsilon_direct(geo, section.jets(geo.germ), _mode_t(t, germ.mode), DELTA)
    return PulledForm(form, DELTA, t, head, 1, section.describe())


def pull_epsilon(germ, section, t, method="expansion"):
    """μ*ε_t for a flat section μ of E*; a pure (2N-2)-form."""
    _check_t(t)
    _validate_dual(germ, section)
    if method == "expansion":
        return section_expansion(germ, EPSILON).evaluate(section, t)
    geo = FiberGeometry(dual_germ(germ))
    form, head = _delta_epsilon_direct(geo, section.jets(geo.germ), _mode_t(t, germ.mode), EPSILON)
    return PulledForm(form, EPSILON, t, head, 1, section.describe())


def extended_delta(germ, section, s0):
    """
    δ'_1 on B x R+ for a flat dual section: the metric of E* is s·h⁻¹, so
    its slice at s = s0 is μ*δ_{s0} and its ds component μ*ε_{s0}.

    Returns:
        tuple: (form, Gaussian exponent at the base point)
    """
    _validate_dual(germ, section)
    extended = extend_base(dual_germ(germ), ScaleMode.SCALE_UP, s0)
    geo = FiberGeometry(extended)
    return _delta_epsilon_direct(geo, section.jets(extended), coerce(1, germ.mode), DELTA)


def pull_delta_generic(germ, section, t):
    """
    δ_t pulled back along an arbitrary (non-flat) section of E*, with
    ∇x ↦ dλ + ½ωλ. Closed only for flat sections.
    """
    _check_t(t)
    _require_real(germ)
    geo = FiberGeometry(dual_germ(germ))
    form, head = _delta_epsilon_direct(geo, section.jets(geo.germ), _mode_t(t, germ.mode), DELTA)
    return PulledForm(form, DELTA, t, head, 1, section.describe())


# ------------------------------------------------------------- Vol and i_x Vol


def _require_unimodular(germ):
    _require_real(germ)
    if not germ.unimodular:
        raise DomainError("Vol needs a germ whose metric preserves the flat volume (unimodular)")


def _vol_sign(rank):
    return -1 if (rank * (rank - 1) // 2) % 2 else 1


def _vol_product(omega_matrix, jets, signature, mode):
    """(ωλ)_1 ∧ ... ∧ (ωλ)_N."""
    result = Multivector.scalar(1, signature, mode)
    for a in range(omega_matrix.shape[0]):
        factor = Multivector.zero(signature, mode)
        for b, jet in enumerate(jets):
            entry = omega_matrix.entries[a, b]
            if not entry.is_zero():
                factor = factor + entry.scale(jet)
        result = result * factor
    return result


def pull_vol(germ, section, method="product"):
    """
    λ*Vol for a flat primal section.

    ``method="product"`` wedges the 1-forms (ωλ)_a; ``method="berezin"``
    evaluates (-1)^{N(N-1)/2} ∫ψ exp(Σ_a (ωλ)_a ψ_a) with the flat η.
    """
    _require_unimodular(germ)
    if not section.is_flat or section.frame is not Frame.PRIMAL:
        raise DomainError("Vol pulls back along flat sections of E")
    jets = section.jets(germ)
    if method == "product":
        form = _vol_product(omega(germ), jets, germ.signature, germ.mode)
    elif method == "berezin":
        geo = FiberGeometry(germ, psihat=False)
        exponent = geo.vector(geo.omega_section(jets), "psi")
        form = berezin_single(exp_even(exponent)).scale(_vol_sign(germ.rank))
    else:
        raise DomainError(f"unknown Vol method {method!r}")
    return PulledForm(form, VOL, None, 0, 1, section.describe())


def pull_i_x_vol(germ, section):
    """λ*(i_x Vol) = (-1)^{N(N-1)/2} ∫ψ (Σλ_b ψ_b) exp(Σ_a (ωλ)_a ψ_a)."""
    _require_unimodular(germ)
    jets = section.jets(germ)
    geo = FiberGeometry(germ, psihat=False)
    integrand = geo.vector(jets, "psi") * exp_even(geo.vector(geo.omega_section(jets), "psi"))
    form = berezin_single(integrand).scale(_vol_sign(germ.rank))
    return PulledForm(form, I_X_VOL, None, 0, 1, section.describe())


# ------------------------------------------------------------- ρ and σ


def _rho_kernel(geo, jets, t):
    """√det G ∫ψ̂ (x̂/√t) exp(-ω̂²/8), a base form of degree N-1."""
    mode = geo.mode
    root = _sqrt_t(t, mode)
    inverse_root = _reciprocal(root, mode)
    weight = exp_even(-(geo.omega_hat_squared.scale(rational(Fraction(1, 8), mode))))
    integrand = geo.vector(jets, "psihat") * weight
    return berezin_single(integrand, block="psihat").scale(geo.sqrt_det * inverse_root)


def _rho_sigma_direct(germ, section, t, family):
    _require_unimodular(germ)
    if not section.is_flat or section.frame is not Frame.PRIMAL:
        raise DomainError("ρ_t and σ_t pull back along flat sections of E")
    mode = germ.mode
    t = _mode_t(t, mode)
    jets = section.jets(germ)
    geo = FiberGeometry(germ, psi=False)
    kernel = _rho_kernel(geo, jets, t)
    quarter_over_t = _reciprocal(t * 4, mode)
    head, rest = _gaussian(geo.quadratic(jets) * (-quarter_over_t))
    n = germ.rank
    if family == RHO:
        left = pull_vol(germ, section).form
        power = _t_power(t, -n, mode)
        sign = 1
    else:
        left = pull_i_x_vol(germ, section).form
        power = _t_power(t, -n - 1, mode)
        sign = -1
    form = (left * kernel).scale(power * rest).scale(sign)
    return form, head


def pull_rho(germ, section, t, method="direct"):
    """
    m*ρ_t = e^{-|m|²/4t} t^{-N} (m*Vol) ∫ψ̂ (x̂/√t) e^{-ω̂²/8}, |m|² with h.

    Args:
        method (str): "direct" or "expansion" (precomputed polynomial in m)
    """
    _check_t(t)
    if method == "expansion":
        return section_expansion(germ, RHO).evaluate(section, t)
    form, head = _rho_sigma_direct(germ, section, t, RHO)
    return PulledForm(form, RHO, t, head, 1, section.describe())


def pull_sigma(germ, section, t, method="direct"):
    """m*σ_t = -e^{-|m|²/4t} t^{-N-1} (m*i_x Vol) ∫ψ̂ (x̂/√t) e^{-ω̂²/8}."""
    _check_t(t)
    if method == "expansion":
        return section_expansion(germ, SIGMA).evaluate(section, t)
    form, head = _rho_sigma_direct(germ, section, t, SIGMA)
    return PulledForm(form, SIGMA, t, head, 1, section.describe())


# ------------------------------------------------------------- expansions


def multinomial_powers(elements, max_degree):
    """
    {α: Π_a e_a^{α_a} / α_a!} for pairwise commuting even elements, over
    multi-indices with |α| <= max_degree; vanishing products are dropped.
    """
    ladders = []
    for element in elements:
        ladder = [Multivector.scalar(1, element.signature, element.mode)]
        while len(ladder) <= max_degree:
            nxt = ladder[-1] * element
            if nxt.is_zero():
                break
            ladder.append(nxt.scale(rational(Fraction(1, len(ladder)), element.mode)))
        ladders.append(ladder)
    out = {}
    for alpha in itertools.product(*(range(len(ladder)) for ladder in ladders)):
        if sum(alpha) > max_degree:
            continue
        term = ladders[0][alpha[0]]
        for ladder, k in zip(ladders[1:], alpha[1:]):
            if term.is_zero():
                break
            term = term * ladder[k]
        if not term.is_zero():
            out[alpha] = term
    return out


def _shift(alpha, *indices):
    alpha = list(alpha)
    for index in indices:
        alpha[index] += 1
    return tuple(alpha)


class SectionExpansion:
    """
    A pulled-back form as an explicit polynomial in the flat section:

        form(λ, t) = exp(g(λ, t)) Σ_k t^{k/2} Σ_β λ^β D_{k,β}

    with the Gaussian exponent g = -t|λ|² (``gaussian="t"``) or
    g = -|λ|²/4t (``gaussian="inverse"``). The coefficient forms D are
    computed once per germ; evaluating at a lattice point is then cheap.
    """

    def __init__(self, family, geometry, gaussian, frame):
        self.family = family
        self.geometry = geometry
        self.gaussian = gaussian
        self.frame = frame
        self.series = {}

    def add(self, k, beta, form):
        if form.is_zero():
            return
        bucket = self.series.setdefault(k, {})
        bucket[beta] = bucket[beta] + form if beta in bucket else form

    def scale(self, factor):
        for bucket in self.series.values():
            for beta in bucket:
                bucket[beta] = bucket[beta].scale(factor)
        return self

    def evaluate(self, section, t):
        geo = self.geometry
        mode = geo.mode
        if not section.is_flat or section.frame is not self.frame:
            raise DomainError(f"{self.family} expansion needs a flat {self.frame.value} section")
        _check_t(t)
        tm = _mode_t(t, mode)
        values = section.scalars(mode)
        jets = [geo.germ.jet(v) for v in values]
        q = geo.quadratic(jets)
        if self.gaussian == "t":
            exponent = q * (-tm)
        else:
            exponent = q * (-(coerce(1, mode) / (tm * 4)))
        head, rest = _gaussian(exponent)
        base = base_signature(geo.germ.base_dim, geo.germ.extra_s)
        total = Multivector.zero(base, mode)
        for k, bucket in sorted(self.series.items()):
            power = power_scalar(tm, Fraction(k, 2), mode)
            for beta, form in bucket.items():
                monomial = power
                for v, e in zip(values, beta):
                    if e:
                        monomial = monomial * v ** e
                if monomial != 0:
                    total = total + form.scale(monomial)
        return PulledForm(total.scale(rest), self.family, t, head, 1, section.describe())


def _delta_epsilon_expansions(geo):
    """Build the δ and ε expansions of V from the F_α = E0 L_α blocks."""
    mode = geo.mode
    n = geo.rank
    quarter = rational(Fraction(1, 4), mode)
    eighth = rational(Fraction(1, 8), mode)
    e0 = exp_even(-(geo.curvature.scale(geo.half()))
                  - geo.omega_hat_squared.scale(eighth))
    half = geo.half()
    psis = geo.block("psi")
    hats = geo.block("psihat")
    ells = []
    for a in range(n):
        ell = Multivector.zero(geo.signature, mode)
        for b in range(n):
            entry = geo.omega.entries[b, a]
            if not entry.is_zero():
                ell = ell + entry * psis[b]
        ells.append(ell.scale(half))
    omega_hat_quarter = geo.omega_hat.scale(quarter)
    delta = SectionExpansion(DELTA, geo, "t", Frame.DUAL)
    epsilon = SectionExpansion(EPSILON, geo, "t", Frame.DUAL)
    for alpha, ell_power in multinomial_powers(ells, n).items():
        order = sum(alpha)
        sign = -1 if order % 2 else 1
        block = e0 * ell_power
        delta.add(order, alpha, berezin_double(omega_hat_quarter * block).scale(sign))
        epsilon.add(order - 2, alpha, berezin_double(geo.psi_psihat * block).scale(-sign * quarter))
        for a in range(n):
            shifted = _shift(alpha, a)
            delta.add(order + 1, shifted, berezin_double(hats[a] * block).scale(-sign))
            epsilon.add(order - 1, shifted,
                        berezin_double(psis[a] * geo.omega_hat * block).scale(-sign * eighth))
            for c in range(n):
                epsilon.add(order, _shift(alpha, a, c),
                            berezin_double(psis[a] * hats[c] * block).scale(sign * half))
    return delta.scale(geo.det), epsilon.scale(geo.det)


def _rho_sigma_expansions(germ):
    """ρ and σ as polynomials of degree N+1 in m, from the Berezin forms of Vol and i_x Vol."""
    mode = germ.mode
    n = germ.rank
    vol_geo = FiberGeometry(germ, psihat=False)
    columns = []
    for b in range(n):
        column = Multivector.zero(vol_geo.signature, mode)
        for a in range(n):
            entry = vol_geo.omega.entries[a, b]
            if not entry.is_zero():
                column = column + entry * vol_geo.psi(a)
        columns.append(column)
    sign = _vol_sign(n)
    powers = multinomial_powers(columns, n)
    vol_terms, ix_terms = {}, {}
    for beta, power in powers.items():
        if sum(beta) == n:
            vol_terms[beta] = berezin_single(power).scale(sign)
        if sum(beta) == n - 1:
            for b in range(n):
                key = _shift(beta, b)
                part = berezin_single(vol_geo.psi(b) * power).scale(sign)
                ix_terms[key] = ix_terms[key] + part if key in ix_terms else part
    hat_geo = FiberGeometry(germ, psi=False)
    weight = exp_even(-(hat_geo.omega_hat_squared.scale(rational(Fraction(1, 8), mode))))
    kernels = [berezin_single(hat_geo.psihat(a) * weight, block="psihat").scale(hat_geo.sqrt_det)
               for a in range(n)]
    rho = SectionExpansion(RHO, hat_geo, "inverse", Frame.PRIMAL)
    sigma = SectionExpansion(SIGMA, hat_geo, "inverse", Frame.PRIMAL)
    for a, kernel in enumerate(kernels):
        for beta, form in vol_terms.items():
            rho.add(-(2 * n + 1), _shift(beta, a), form * kernel)
        for beta, form in ix_terms.items():
            sigma.add(-(2 * n + 3), _shift(beta, a), -(form * kernel))
    return rho, sigma


@lru_cache(maxsize=32)
def _expansions(germ, kind):
    logger.debug("building %s expansions for %s", kind, germ.label)
    if kind == "delta_epsilon":
        return _delta_epsilon_expansions(FiberGeometry(dual_germ(germ)))
    return _rho_sigma_expansions(germ)


def section_expansion(germ, family):
    """
    The cached SectionExpansion of ``family`` (delta, epsilon, rho, sigma) on ``germ``.

    Note:
        The cache is keyed by germ identity; germs are immutable.
    """
    if family in (DELTA, EPSILON):
        _require_real(germ)
        delta, epsilon = _expansions(germ, "delta_epsilon")
        return delta if family == DELTA else epsilon
    if family in (RHO, SIGMA):
        _require_unimodular(germ)
        rho, sigma = _expansions(germ, "rho_sigma")
        return rho if family == RHO else sigma
    raise DomainError(f"no section expansion for {family!r}")


# ------------------------------------------------------------- checks


def lift_germ(germ, s0):
    """``germ`` pulled back to B x R+ unchanged (no dependence on s)."""
    metric = np.empty(germ.metric.shape, dtype=object)
    for index, entry in np.ndenumerate(germ.metric):
        metric[index] = lift_jet(entry)
    return replace(germ, metric=metric, extra_s=True, s0=s0)


def _exact_mode(germ):
    return germ.mode is ScalarMode.EXACT


def _rho_extended(germ, section, s0):
    """ρ'_1 on B x R+: Vol' from ω - ds/s, kernel from h, t replaced by the coordinate s."""
    _require_unimodular(germ)
    mode = germ.mode
    scaled = extend_base(germ, ScaleMode.SCALE_DOWN, s0)
    lifted = lift_germ(germ, scaled.s0)
    s = s_jet(lifted.nvars, lifted.order, s0, mode)
    jets = section.jets(lifted)
    vol = _vol_product(omega(scaled), jets, scaled.signature, mode)
    geo = FiberGeometry(lifted, psi=False)
    kernel = _rho_kernel(geo, jets, s)
    head, rest = _gaussian(geo.quadratic(jets) * (-jet_inverse(s * 4)))
    form = (vol * kernel).scale(jet_power(s, -germ.rank) * rest)
    return form, head


def transgression_check(germ, family, section, t0, tolerance=1e-10):
    """
    Closedness on B x R+ and the t-transgression of one family.

    The primed form is built on the extended germ (metric s·h for α,
    s·h⁻¹ on E* for δ, h/s on the volume side for ρ) and split as
    X + ds∧T; X at s = t0 must be the family's form at t0 and T the
    transgression form (β, ε or σ) at t0.

    Returns:
        VerificationReport
    """
    from utils.report import VerificationReport

    report = VerificationReport(f"transgression/{family}")
    exact = _exact_mode(germ)
    tol = 0.0 if exact else tolerance
    inputs = {"N": germ.rank, "m": germ.base_dim, "K": germ.order, "t0": str(t0), "germ": germ.label}
    s0 = Fraction(t0) if exact and not isinstance(t0, float) else t0
    state = {}

    if family == ALPHA:
        reference, check_id = "Thm 2.4b, Eqs (2.16), (2.21)-(2.22)", "thm2.4/eq2.21"

        def build():
            extended = extend_base(germ, ScaleMode.SCALE_UP, s0)
            primed = pull_alpha(extended, section.lifted(), 1)
            return primed.form, primed.log_prefactor, pull_alpha(germ, section, s0), pull_beta(germ, section, s0)
    elif family == DELTA:
        reference, check_id = "Thm 2.9b, Eqs (2.28), (2.39)-(2.41)", "thm2.9/eq2.40"

        def build():
            form, head = extended_delta(germ, section, s0)
            return (form, head, pull_delta(germ, section, s0, method="direct"),
                    pull_epsilon(germ, section, s0, method="direct"))
    elif family == RHO:
        reference, check_id = "Thm 2.15b, Eqs (2.49), (2.54)-(2.56)", "thm2.15/eq2.55"

        def build():
            form, head = _rho_extended(germ, section, s0)
            return form, head, pull_rho(germ, section, s0), pull_sigma(germ, section, s0)
    else:
        raise DomainError(f"unknown transgression family {family!r}")

    def primed():
        if "primed" not in state:
            state["primed"] = build()
        return state["primed"]

    def closed():
        return form_residual(d(primed()[0]))

    def spatial():
        form, head, at_t0, _ = primed()
        if not at_t0.same_prefactor(PulledForm(form, family, t0, head, at_t0.constant)):
            raise DomainError("Gaussian prefactors of the slice and the family form differ")
        return form_residual(restrict_s(form), at_t0.form)

    def transgression():
        form, _, _, partner = primed()
        _, t_part = split_ds(form)
        return form_residual(slice_s(t_part, germ.base_dim), partner.form)

    report.check(f"{check_id}/closed", reference + ", d' closedness", closed, tol, inputs, exact)
    report.check(f"{check_id}/slice", reference + ", s = t0 slice", spatial, tol, inputs, exact)
    report.check(f"{check_id}/ds-component", reference + ", ds component", transgression, tol, inputs, exact)
    return report


def nabla_x_hat_residual(germ, section):
    """
    λ*(∇^u x̂) - ½ λ*(i_x ω̂) for a flat dual section, where i_x contracts
    ψ_b with the covector (Gλ)_b.
    """
    geo = _dual_geometry(germ, section)
    jets = section.jets(geo.germ)
    lhs = geo.vector(geo.connection_image(jets), "psihat")
    covector = [sum((geo.germ.metric[b, a] * jets[a] for a in range(geo.rank)), geo.germ.jet(0))
                for b in range(geo.rank)]
    rhs = interior_mult(covector, "psi", geo.omega_hat).scale(geo.half())
    return form_residual(lhs, rhs)


def alpha_profile(t, lam):
    """Coefficient of dλ in α_t on the trivial rank-1 bundle, at fiber point ``lam``."""
    germ = FlatBundleGerm.from_metric([[1]], 1, ScalarMode.FLOAT, order=1)
    section = SectionSpec.polynomial([JetScalar.variable(0, 1, 1, ScalarMode.FLOAT, center=lam)])
    pulled = pull_alpha(germ, section, t)
    # deep in the tail the dλ coefficient underflows and drops out of the form
    return complex(evaluate_at_zero(pulled.value()).coefficient(1)).real


def alpha_normalisation(t):
    """∫_R of the rank-1 α_t profile, which is identically 1."""
    value, _ = integrate.quad(lambda lam: alpha_profile(t, lam), -np.inf, np.inf, epsabs=1e-12)
    return value
