import math

import pytest
from scipy import special

from core.errors import ConvergenceError
from core.grassmann import GeneratorSignature, Multivector
from core.jets import JetScalar
from core.quadrature import FormVector, LogQuadrature, compensated_sum
from core.scalars import ScalarMode

SCALARS = GeneratorSignature(0)


def scalar(value):
    return Multivector.scalar(complex(value), SCALARS)


@pytest.mark.parametrize("power", [0.0, 0.5, 2.0])
def test_gamma_integrals(power):
    rule = LogQuadrature(lambda t: scalar(t ** power * math.exp(-t)), SCALARS)
    result = rule.integrate(1e-12)
    assert result.form.scalar_part().real == pytest.approx(special.gamma(power + 1), rel=1e-10)
    assert result.evaluations > 0
    assert "subintervals" in result.describe()


@pytest.mark.parametrize("size", [1e-11, 1e-20])
def test_small_integrals_keep_their_relative_accuracy(size):
    rule = LogQuadrature(lambda t: scalar(size * t ** 2 * math.exp(-t)), SCALARS)
    result = rule.integrate(1e-10)
    assert result.form.scalar_part().real == pytest.approx(2 * size, rel=1e-9)


def test_integrand_below_the_floor_integrates_to_zero():
    # rounding noise that never decays, as left by cancelling counterterms
    rule = LogQuadrature(lambda t: scalar(5e-18 / t), SCALARS, label="noise", floor=1e-15)
    result = rule.integrate(1e-10)
    assert result.form.is_zero()
    assert result.subintervals == 0
    assert "below the floor" in result.describe()


def test_non_decaying_integrand_does_not_converge():
    rule = LogQuadrature(lambda t: scalar(1.0), SCALARS, label="constant")
    with pytest.raises(ConvergenceError, match="constant"):
        rule.integrate(1e-10)


def test_jet_valued_integrand():
    sig = GeneratorSignature(2)
    x = JetScalar.variable(0, 2, 2, ScalarMode.FLOAT)

    def integrand(t):
        coefficient = (x * t + 1.0).scale(math.exp(-t))
        return Multivector(sig, {0: coefficient, 3: coefficient.scale(2.0)}, ScalarMode.FLOAT)

    form = LogQuadrature(integrand, sig).integrate(1e-12).form
    # ∫(xt + 1)e^{-t} dt = x + 1
    assert form.coefficient(0).coefficient((0, 0)) == pytest.approx(1.0, rel=1e-10)
    assert form.coefficient(0).coefficient((1, 0)) == pytest.approx(1.0, rel=1e-10)
    assert form.coefficient(3).coefficient((1, 0)) == pytest.approx(2.0, rel=1e-10)
    assert form.coefficient(0).order == 2


def test_form_vector_layout_uses_the_lowest_order():
    sig = GeneratorSignature(1)
    high = Multivector(sig, {0: JetScalar.variable(0, 1, 3, ScalarMode.FLOAT)}, ScalarMode.FLOAT)
    low = Multivector(sig, {1: JetScalar.constant(2.0, 1, 1, ScalarMode.FLOAT)}, ScalarMode.FLOAT)
    layout = FormVector.for_forms(sig, [high, low])
    assert layout.shape == (1, 1)
    assert layout.decode(layout.encode(low)) == low


def test_compensated_sum_keeps_small_terms():
    forms = [scalar(1e16), scalar(1.0), scalar(-1e16)]
    assert compensated_sum(forms, SCALARS).scalar_part() == 1.0


def test_compensated_sum_of_nothing_is_zero():
    assert compensated_sum([], SCALARS).is_zero()
