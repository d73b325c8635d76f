import math

import numpy as np
import pytest

from core.errors import DomainError
from core.flat_bundle import random_germ
from core.fock import (
    bridge_identity_check,
    bridge_sides,
    clifford_generators,
    clifford_sinc_factor,
    random_bridge_data,
    relation_residual,
    top_supertrace,
    top_supertrace_expected,
)
from core.grassmann import GeneratorSignature
from core.matrices import AlgebraMatrix, sqrtdet_sinc
from core.scalars import ScalarMode
from core.superconnection import binomial_weight, scaling_constants, scaling_residuals
from features.fock_checks import scaling_section
from utils.report import EXACT_ZERO


def test_rank_one_clifford_matrices():
    space = clifford_generators(1)
    assert space.c(0).toarray().tolist() == [[0, -1], [1, 0]]
    assert space.c_hat(0).toarray().tolist() == [[0, 1], [1, 0]]
    assert space.grading == (0, 1)


@pytest.mark.parametrize("rank", [1, 2, 3, 4])
def test_clifford_relations(rank):
    assert relation_residual(clifford_generators(rank)) == 0


@pytest.mark.parametrize("rank", [1, 2, 3, 4])
def test_top_supertrace(rank):
    assert top_supertrace(rank) == top_supertrace_expected(rank)


def test_top_supertrace_values():
    assert top_supertrace(1) == -2
    assert top_supertrace(2) == -4
    assert top_supertrace(3) == 8


def test_fock_rank_bounds():
    with pytest.raises(DomainError):
        clifford_generators(0)


def test_binomial_weight():
    assert binomial_weight(1) == -1
    assert all(binomial_weight(rank) == 0 for rank in range(2, 8))


def test_scaling_constants_need_odd_rank():
    c_delta, c_epsilon = scaling_constants(1)
    assert (c_delta, c_epsilon) == (2.0, 0.5)
    assert scaling_constants(3) == pytest.approx((2 / math.pi ** 2, 0.5 / math.pi ** 2))
    with pytest.raises(DomainError):
        scaling_constants(2)


@pytest.mark.parametrize("rank", [1, 2])
def test_bridge_identity_is_exact(rank):
    report = bridge_identity_check(rank, mode=ScalarMode.EXACT, seed=3)
    assert report.passed, [(c.check_id, c.details) for c in report.failures()]
    residuals = {c.check_id: c.residual for c in report.checks}
    assert residuals["thmB.1/eqB.4"] == EXACT_ZERO
    assert residuals["eqB.3/top-supertrace"] == EXACT_ZERO


@pytest.mark.parametrize("rank, expected", [(1, -1), (2, 0), (3, 0)])
def test_number_operator_supertrace(rank, expected):
    space = clifford_generators(rank)
    assert space.number_operator().diagonal().tolist() == list(space.grading)
    assert space.supertrace(space.number_operator()) == expected


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_bridge_identity_with_a_numeric_part(rank):
    M, J = random_bridge_data(rank, 2 * rank, ScalarMode.FLOAT, seed=3, numeric=True)
    left, right = bridge_sides(rank, M, J)
    assert (left - right).magnitude() < 1e-8 * max(1.0, left.magnitude())


def numeric_skew(rank, blocks, seed=5):
    """Skew 2N x 2N scalar matrix with entries only in the given (row block, column block) pairs."""
    rng = np.random.default_rng(seed)
    values = np.zeros((2 * rank, 2 * rank))
    for k in range(2 * rank):
        for l in range(k + 1, 2 * rank):
            if (k >= rank, l >= rank) in blocks:
                values[k, l] = 0.5 * rng.normal()
                values[l, k] = -values[k, l]
    return AlgebraMatrix.from_scalars(values, GeneratorSignature(0), ScalarMode.FLOAT)


def test_sinc_factor_is_sin_m_over_m_when_only_c_meets_c_hat():
    M = numeric_skew(2, {(False, True)})
    expected = sqrtdet_sinc(M).scalar_part()
    assert clifford_sinc_factor(2, M).scalar_part() == pytest.approx(expected, rel=1e-10)


def test_sinc_factor_on_the_c_block_is_sin_theta_over_theta():
    theta = 1.1
    values = np.zeros((4, 4))
    values[0, 1], values[1, 0] = theta, -theta
    M = AlgebraMatrix.from_scalars(values, GeneratorSignature(0), ScalarMode.FLOAT)
    # exp(θ c_1 c_2) = cos θ + sin θ c_1 c_2, against θ ψ_1 ψ_2 on the Berezin side
    assert clifford_sinc_factor(2, M).scalar_part() == pytest.approx(math.sin(theta) / theta, rel=1e-12)


@pytest.mark.parametrize("rank", [1, 3])
def test_koszul_forms_scale_to_the_thom_forms(rank):
    germ = random_germ(rank, 2 * rank - 1, 1, ScalarMode.FLOAT, seed=1)
    delta_residual, epsilon_residual = scaling_residuals(germ, scaling_section(rank), 1.0)
    assert delta_residual < 1e-8
    assert epsilon_residual < 1e-8
