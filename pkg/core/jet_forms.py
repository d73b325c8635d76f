"""
Jet Forms Module for Superform Lab

This module provides differential forms on a base germ: multivectors over
the base generators (dx_1..dx_m and optionally ds) whose coefficients are
JetScalars. It contains the exterior derivative, restriction to a slice
s = s0, and the B x R+ extension device used by every transgression check.

The jet variable with index a is paired with the generator with index a,
so dx_a belongs to x_{a+1} and ds (index m) to the trailing variable s.
"""

import logging
from dataclasses import replace
from enum import Enum
from fractions import Fraction

import numpy as np

from core.errors import DomainError
from core.grassmann import GeneratorSignature, Multivector, _remove_bits, reorder_sign
from core.jets import JetScalar, jet_inverse
from core.scalars import ScalarMode

logger = logging.getLogger(__name__)


class ScaleMode(str, Enum):
    """How the metric depends on the extra coordinate s."""

    SCALE_UP = "metric_scale_up"      # s * h
    SCALE_DOWN = "metric_scale_down"  # h / s


def jet_shape(form):
    """(nvars, order) of the first jet coefficient, or None for a jet-free form."""
    for value in form.terms.values():
        if isinstance(value, JetScalar):
            return value.nvars, value.order
    return None


def form_order(form):
    """Smallest truncation order among the coefficients (None if no jets)."""
    orders = [v.order for v in form.terms.values() if isinstance(v, JetScalar)]
    return min(orders) if orders else None


def function_form(jet, signature):
    """A 0-form with the given jet coefficient."""
    return Multivector(signature, {0: jet}, jet.mode)


def d(form):
    """
    Exterior derivative Σ_a dx_a ∧ ∂_a (plus ds ∧ ∂_s on an extended germ).

    The coefficients of the result carry order K-1.

    Example:
        >>> sig = GeneratorSignature(2)
        >>> x1 = JetScalar.variable(0, 2, 2, ScalarMode.EXACT)
        >>> d(function_form(x1, sig)).terms
        {1: JetScalar(K=1, 1*x^(0, 0))}
    """
    sig = form.signature
    out = {}
    for mask, value in form.terms.items():
        if not isinstance(value, JetScalar):
            continue
        for a in range(min(value.nvars, sig.n_base)):
            bit = 1 << a
            if mask & bit:
                continue
            derivative = value.derivative(a)
            if not derivative:
                continue
            if reorder_sign(bit, mask) < 0:
                derivative = -derivative
            key = mask | bit
            out[key] = out[key] + derivative if key in out else derivative
    result = Multivector._raw(sig, {m: v for m, v in out.items() if v}, form.mode)
    shape = jet_shape(form)
    if shape is not None:
        # constant coefficients contribute nothing but fix the order of the result
        if shape[1] < 1:
            raise DomainError("d of a form with order-0 jet coefficients is not determined")
        result = truncate_form(result, shape[1] - 1)
    return result


def truncate_form(form, order):
    out = {}
    for mask, value in form.terms.items():
        if isinstance(value, JetScalar):
            value = value.truncate(order)
            if not value:
                continue
        out[mask] = value
    return Multivector._raw(form.signature, out, form.mode)


def evaluate_at_zero(form):
    """Replace every jet coefficient by its value at the base point."""
    out = {}
    for mask, value in form.terms.items():
        if isinstance(value, JetScalar):
            value = value.constant_term()
        if value != 0:
            out[mask] = value
    return Multivector._raw(form.signature, out, form.mode)


def slice_s(form, index):
    """Set the trailing jet variable (s - s0) to zero in every coefficient."""
    out = {}
    for mask, value in form.terms.items():
        if isinstance(value, JetScalar):
            value = value.substitute(index, 0).drop_variable(index)
            if not value:
                continue
        out[mask] = value
    return Multivector._raw(form.signature, out, form.mode)


def restrict_s(form):
    """
    Restrict a form on an extended germ to the slice s = s0, ds = 0.

    The s coordinate is stored as the jet variable centred at s0, so the
    slice is the substitution of zero for that variable.
    """
    sig = form.signature
    if not sig.extra_s:
        raise DomainError("restrict_s needs a form with the ds generator")
    kept = {_remove_bits(mask, sig.ds, 1): value for mask, value in form.terms.items()
            if not mask >> sig.ds & 1}
    return slice_s(Multivector._raw(sig.without_s(), kept, form.mode), sig.base_dim)


def lift_jet(jet):
    """Pull a jet on B back to B x R+ (adds the trailing s variable)."""
    return jet.add_variable()


def s_jet(nvars, order, s0, mode):
    """The coordinate s = s0 + σ as a jet in the trailing variable σ."""
    if ScalarMode(mode) is ScalarMode.EXACT:
        if isinstance(s0, float):
            s0 = Fraction(s0).limit_denominator(10 ** 6)
    return JetScalar.variable(nvars - 1, nvars, order, mode, center=s0)


def extend_base(germ, mode, s0):
    """
    Extend a germ over B to B x R+, with s expanded around s0.

    Args:
        germ: FlatBundleGerm without an s coordinate
        mode (ScaleMode): SCALE_UP gives the metric s*h, SCALE_DOWN gives h/s
        s0: positive base value of s

    Returns:
        FlatBundleGerm with ``extra_s`` set

    Raises:
        DomainError: s0 <= 0 or germ already extended
    """
    mode = ScaleMode(mode)
    if germ.extra_s:
        raise DomainError("germ already carries an s coordinate")
    if s0 <= 0:
        raise DomainError(f"s0 must be positive, got {s0}")
    nvars = germ.base_dim + 1
    s = s_jet(nvars, germ.order, s0, germ.mode)
    factor = s if mode is ScaleMode.SCALE_UP else jet_inverse(s)
    metric = np.empty(germ.metric.shape, dtype=object)
    for index, entry in np.ndenumerate(germ.metric):
        metric[index] = lift_jet(entry) * factor
    logger.debug("extended germ rank %d with %s at s0=%s", germ.rank, mode.value, s0)
    return replace(germ, metric=metric, extra_s=True, s0=s.constant_term(), unimodular=False)


def _common_order(forms):
    orders = [o for o in (form_order(f) for f in forms) if o is not None]
    return min(orders) if orders else None


def form_residual(a, b=None, order=None):
    """
    Largest coefficient magnitude of a - b after truncation to ``order``.

    Without ``order`` the operands' common order is used, taken before the
    subtraction: a difference that cancels to zero has no jet left to say
    how far it is valid. Exact mode returns 0 only for an exact zero.
    """
    if order is None:
        order = _common_order((a,) if b is None else (a, b))
    diff = a if b is None else a - b
    if order is not None:
        if order < 0:
            raise DomainError(f"cannot compare forms at jet order {order}")
        diff = truncate_form(diff, order)
    return diff.magnitude()


def base_signature(base_dim, extra_s=False):
    return GeneratorSignature(base_dim, extra_s)
