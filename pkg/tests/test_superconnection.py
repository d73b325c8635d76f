import pytest

from core.errors import DomainError
from core.flat_bundle import Field, random_germ
from core.grassmann import GeneratorSignature, Multivector
from core.scalars import ScalarMode
from core.superconnection import (
    GAUSSIAN,
    FlatComplexGerm,
    anomaly_residual,
    characteristic_form_check,
    euler_weight,
    extend_complex,
    koszul_complex,
    koszul_suite,
    odd_monomial,
    random_two_term,
    richardson_derivative,
    richardson_small_t,
    split_with_trivial,
    torsion_form,
)
from features.torsion_checks import koszul_point

SCALARS = GeneratorSignature(0)


@pytest.fixture
def two_term():
    return random_two_term(1, order=2, seed=3)


def polynomial(*coefficients):
    return lambda t: Multivector.scalar(sum(c * t ** k for k, c in enumerate(coefficients)), SCALARS)


def test_euler_weight():
    assert euler_weight({0: 1, 1: 1}) == -1
    assert euler_weight({0: 2, 1: 3, 2: 1}) == -1


def test_odd_functions():
    assert GAUSSIAN.derivative_at(0) == 1.0
    assert odd_monomial(2).derivative_at(2) == 12
    with pytest.raises(DomainError):
        odd_monomial(0)


def test_two_term_complex_is_acyclic(two_term):
    assert two_term.cohomology() == {0: 0, 1: 0}
    assert (two_term.d_E, two_term.d_H) == (-1, 0)
    assert two_term.harmonic_complex() is None


def test_split_complex_keeps_the_trivial_summand(two_term):
    split = split_with_trivial(two_term, degree=1)
    assert split.cohomology() == {0: 0, 1: 1}
    assert split.d_H == -1
    assert split.harmonic_complex().size == 1


def test_differential_must_raise_the_degree(two_term):
    with pytest.raises(DomainError):
        FlatComplexGerm(two_term.grading, two_term.differential.T, two_term.metric,
                        two_term.base_dim, two_term.order)


def test_extension_needs_positive_time(two_term):
    with pytest.raises(DomainError):
        extend_complex(two_term, 0.0)


def test_koszul_complex_is_acyclic_off_the_zero_section():
    germ = random_germ(1, 1, 1, ScalarMode.FLOAT, seed=2)
    assert koszul_complex(germ, (1.0,)).cohomology() == {0: 0, 1: 0}
    with pytest.raises(DomainError):
        koszul_complex(germ, (0.0,))
    assert koszul_complex(germ, (0.0,), allow_zero=True).cohomology() == {0: 1, 1: 1}


def test_anomaly_formula_on_the_two_term_complex(two_term):
    assert anomaly_residual(two_term) < 1e-6


def test_richardson_derivative_is_exact_on_cubics():
    value = richardson_derivative(polynomial(1.0, 0.0, 0.0, 1.0), 2.0)
    assert value.scalar_part() == pytest.approx(12.0, rel=1e-10)


def test_richardson_small_t_removes_linear_and_quadratic_terms():
    value = richardson_small_t(polynomial(1.0, 2.0, 5.0), 0.1)
    assert value.scalar_part() == pytest.approx(1.0, rel=1e-12)


def test_bundle_forms_agree_across_both_routes():
    germ = random_germ(2, 1, 2, ScalarMode.FLOAT, seed=4, field=Field.COMPLEX)
    report = characteristic_form_check(germ)
    assert report.passed, [(c.check_id, c.residual) for c in report.failures()]
    assert {"thmA.3/algebra-matrix", "defA.7/algebra-matrix"} <= {c.check_id for c in report.checks}


def test_anomaly_needs_jets_of_order_two():
    with pytest.raises(DomainError):
        anomaly_residual(random_two_term(1, order=1, seed=3))


@pytest.mark.parametrize("rank", [1, 2])
def test_koszul_suite_off_the_zero_section(rank):
    germ = random_germ(rank, 2 * rank - 1, 2, ScalarMode.FLOAT, seed=2)
    report = koszul_suite(germ, koszul_point(rank), 1.0, 1e-6)
    assert report.passed, [(c.check_id, c.residual, c.details) for c in report.failures()]


def test_koszul_torsion_integrand_at_rounding_level_is_zero():
    germ = random_germ(2, 3, 2, ScalarMode.FLOAT, seed=2)
    torsion = torsion_form(koszul_complex(germ, koszul_point(2)))
    assert torsion.form.magnitude() < 1e-10
