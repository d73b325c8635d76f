from fractions import Fraction

import pytest

from core.errors import ExactnessError, ScalarModeError
from core.scalars import GaussianRational, ScalarMode, coerce, exp_scalar, power_scalar


def test_gaussian_rational_product():
    assert GaussianRational(Fraction(1, 2), 1) * GaussianRational(0, 2) == GaussianRational(-2, 1)


def test_gaussian_rational_division_is_exact():
    value = GaussianRational(1, 1) / GaussianRational(1, -1)
    assert value == GaussianRational(0, 1)


def test_gaussian_rational_mixes_with_plain_rationals():
    assert Fraction(1, 3) + GaussianRational(Fraction(2, 3)) == 1
    assert 2 * GaussianRational(0, Fraction(1, 2)) == GaussianRational(0, 1)


def test_exact_mode_refuses_floats():
    with pytest.raises(ScalarModeError):
        coerce(1.0, ScalarMode.EXACT)
    with pytest.raises(ScalarModeError):
        GaussianRational(1) + 0.5


def test_float_mode_coerces_to_complex():
    assert coerce(Fraction(1, 4), ScalarMode.FLOAT) == 0.25 + 0j
    assert coerce(GaussianRational(1, 2), ScalarMode.FLOAT) == 1 + 2j


def test_exp_is_exact_only_at_zero():
    assert exp_scalar(0, ScalarMode.EXACT) == 1
    with pytest.raises(ExactnessError):
        exp_scalar(1, ScalarMode.EXACT)


def test_rational_power_of_a_square():
    assert power_scalar(GaussianRational(Fraction(9, 4)), Fraction(1, 2), ScalarMode.EXACT) == Fraction(3, 2)
