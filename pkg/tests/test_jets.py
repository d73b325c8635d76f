from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.errors import DomainError, ExactnessError
from core.grassmann import GeneratorSignature, Multivector
from core.jet_forms import d, form_residual, function_form
from core.jets import JetScalar, jet_exp, jet_inverse, jet_sqrt, monomials
from core.scalars import ScalarMode

EXACT = ScalarMode.EXACT
NVARS, ORDER = 2, 3

coefficients = st.lists(st.integers(-4, 4), min_size=len(monomials(NVARS, ORDER)),
                        max_size=len(monomials(NVARS, ORDER)))


def jet_from(values):
    return JetScalar(NVARS, ORDER, dict(zip(monomials(NVARS, ORDER), values)), EXACT)


def test_monomials_are_graded():
    assert monomials(2, 1) == [(0, 0), (1, 0), (0, 1)]
    assert len(monomials(3, 2)) == 10


def test_exp_and_inverse():
    x = JetScalar.variable(0, NVARS, ORDER, EXACT)
    assert jet_exp(x) * jet_exp(-x) == 1
    assert jet_inverse(1 + x) * (1 + x) == 1
    assert jet_exp(x).coefficient((3, 0)) == Fraction(1, 6)


def test_exact_exp_needs_zero_constant_term():
    with pytest.raises(ExactnessError):
        jet_exp(JetScalar.constant(1, NVARS, ORDER, EXACT))


def test_inverse_of_a_nilpotent_jet_fails():
    with pytest.raises(DomainError):
        jet_inverse(JetScalar.variable(1, NVARS, ORDER, EXACT))


def test_square_root_of_a_perfect_square():
    p = JetScalar.variable(0, NVARS, ORDER, EXACT, center=4)
    root = jet_sqrt(p)
    assert root.constant_term() == 2
    assert root * root == p


def test_derivative_lowers_the_order():
    x = JetScalar.variable(0, NVARS, ORDER, EXACT)
    derivative = (x * x).derivative(0)
    assert derivative.order == ORDER - 1
    assert derivative == x * 2


def test_exterior_derivative_of_a_coordinate():
    sig = GeneratorSignature(2)
    x1 = JetScalar.variable(0, 2, 2, EXACT)
    assert d(function_form(x1, sig)).coefficient(1) == JetScalar.constant(1, 2, 1, EXACT)


@given(coefficients, coefficients)
def test_product_rule(a, b):
    f, g = jet_from(a), jet_from(b)
    for index in range(NVARS):
        assert (f * g).derivative(index) == f.derivative(index) * g + f * g.derivative(index)


@given(coefficients)
def test_d_squared_vanishes(a):
    sig = GeneratorSignature(NVARS)
    form = function_form(jet_from(a), sig)
    assert d(d(form)).is_zero()
    assert form_residual(d(d(form))) == 0


def test_order_zero_jets_have_no_derivative():
    constant = JetScalar.constant(1, NVARS, 0, EXACT)
    with pytest.raises(DomainError):
        constant.derivative(0)
    with pytest.raises(DomainError):
        d(function_form(constant, GeneratorSignature(NVARS)))


def test_residual_is_taken_at_the_operands_order():
    sig = GeneratorSignature(1)
    x1 = JetScalar.variable(0, 1, 1, EXACT)
    x2 = JetScalar.variable(0, 1, 2, EXACT)
    # the x² term lies past the order of the left side
    assert form_residual(function_form(x1, sig), function_form(x2 + x2 * x2, sig)) == 0


def test_residual_against_a_zero_form_uses_the_given_order():
    sig = GeneratorSignature(1)
    x = JetScalar.variable(0, 1, 2, EXACT)
    zero = Multivector.zero(sig, EXACT)
    square = function_form(x * x, sig)
    assert form_residual(zero, square) == 1
    assert form_residual(zero, square, order=1) == 0
    with pytest.raises(DomainError):
        form_residual(zero, square, order=-1)
