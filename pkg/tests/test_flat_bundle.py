from fractions import Fraction

import numpy as np
import pytest

from core.errors import DomainError, ShapeError
from core.flat_bundle import (
    FlatBundleGerm,
    chern_character,
    chern_class,
    flatness_residual,
    n_j_z,
    n_j_z_closed_form,
    newton_scalar_residual,
    newton_suite,
    phi_j_cochain,
    random_germ,
    random_unitary,
    todd,
    transpose_sign_residual,
)
from core.jet_forms import form_residual
from core.scalars import ScalarMode

EXACT = ScalarMode.EXACT


@pytest.fixture(scope="module")
def germ():
    return random_germ(2, 3, order=2, mode=EXACT, seed=7)


def test_unimodular_germ_has_unit_determinant():
    g = random_germ(2, 3, mode=EXACT, seed=7, unimodular=True)
    assert g.det == 1


def test_random_germ_is_reproducible():
    a = random_germ(2, 2, mode=EXACT, seed=11)
    b = random_germ(2, 2, mode=EXACT, seed=11)
    assert all(x == y for x, y in zip(a.metric.flat, b.metric.flat))


def test_metric_must_be_positive():
    with pytest.raises(DomainError):
        FlatBundleGerm.from_metric([[-1]], 1)


def test_flat_connection_is_flat(germ):
    assert flatness_residual(germ) == 0
    assert transpose_sign_residual(germ, 2) == 0


def test_newton_suite_is_exact(germ):
    report = newton_suite(germ, seed=7)
    assert report.passed, [(c.check_id, c.details) for c in report.failures()]


@pytest.mark.parametrize("j", [1, 2, 3])
def test_power_sum_forms_match_the_trace_formula(germ, j):
    assert form_residual(n_j_z(germ, j), n_j_z_closed_form(germ, j)) == 0


def test_chern_class_two():
    # c_2 = (n_1² - n_2)/2
    assert chern_class(2).terms == {(2, 0): Fraction(1, 2), (0, 1): Fraction(-1, 2)}


def test_polynomial_constants():
    assert todd(3).value_at_zero() == 1
    assert chern_character(3, 2).value_at_zero() == 3
    assert chern_class(1).value_at_zero() == 0


def test_phi_cochain_of_one_matrix_is_the_trace():
    matrix = np.array([[1, 2], [3, 4]])
    assert phi_j_cochain(1, matrix) == 5
    with pytest.raises(ShapeError):
        phi_j_cochain(2, matrix, matrix)


def test_random_unitary():
    u = random_unitary(np.random.default_rng(3), 3)
    assert np.allclose(u @ u.conj().T, np.eye(3), atol=1e-12)


def test_scalar_newton_identity():
    assert newton_scalar_residual([0.5, -1.0, 2.0]) < 1e-10


@pytest.mark.parametrize("rank, base_dim, options", [
    (2, 3, {"seed": 7}),
    (3, 3, {"seed": 1, "unimodular": True}),
    (2, 2, {"seed": 1, "frame": False}),
])
def test_flatness_at_order_two(rank, base_dim, options):
    # diagonal entries of dω cancel to exact zeros here
    assert flatness_residual(random_germ(rank, base_dim, order=2, mode=EXACT, **options)) == 0


def test_flatness_needs_order_two():
    with pytest.raises(DomainError):
        flatness_residual(random_germ(1, 1, order=1, mode=EXACT))
