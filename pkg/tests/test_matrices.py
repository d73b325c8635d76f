from fractions import Fraction

import pytest

import math

from core.errors import DomainError, ExactnessError, ParityError, ShapeError
from core.grassmann import GeneratorSignature, Multivector
from core.matrices import (
    AlgebraMatrix,
    bernoulli_number,
    det_even,
    det_local,
    inverse_even,
    permutation_sign,
    sqrtdet_sinc,
    sqrtdet_sinh_ratio,
    supertrace,
)
from core.scalars import ScalarMode

EXACT = ScalarMode.EXACT
FLOAT = ScalarMode.FLOAT


@pytest.fixture
def pairs():
    """ψ_k ψ̂_k for k = 1, 2: commuting even nilpotents."""
    sig = GeneratorSignature.standard(0, 2)
    return sig, [Multivector.monomial(sig, (sig.psi(k), sig.psihat(k)), EXACT) for k in range(2)]


def test_bernoulli_numbers():
    assert bernoulli_number(1) == Fraction(1, 2)
    assert bernoulli_number(2) == Fraction(1, 6)
    assert bernoulli_number(4) == Fraction(-1, 30)
    assert bernoulli_number(5) == 0


@pytest.mark.parametrize("perm, sign", [((0, 1, 2), 1), ((1, 0, 2), -1), ((1, 2, 0), 1), ((2, 1, 0), -1)])
def test_permutation_sign(perm, sign):
    assert permutation_sign(perm) == sign


def test_det_even_of_scalars():
    sig = GeneratorSignature(0)
    matrix = AlgebraMatrix.from_scalars([[2, 1], [4, 3]], sig, EXACT)
    assert det_even(matrix) == 2


def test_det_even_of_nilpotent_diagonal(pairs):
    sig, (e1, e2) = pairs
    matrix = AlgebraMatrix.zeros(2, 2, sig, EXACT)
    matrix.entries[0, 0] = e1
    matrix.entries[1, 1] = e2
    assert det_even(matrix) == e1 * e2


def test_det_even_refuses_odd_entries():
    sig = GeneratorSignature.standard(0, 1)
    matrix = AlgebraMatrix.identity(1, sig, EXACT)
    matrix.entries[0, 0] = Multivector.generator(sig, sig.psi(0), EXACT)
    with pytest.raises(ParityError):
        det_even(matrix)


def test_supertrace_of_the_identity_counts_the_grading():
    sig = GeneratorSignature(0)
    assert supertrace(AlgebraMatrix.identity(2, sig, EXACT, grading=(0, 1))).is_zero()
    assert supertrace(AlgebraMatrix.identity(3, sig, EXACT, grading=(0, 0, 1))) == 1
    with pytest.raises(ShapeError):
        supertrace(AlgebraMatrix.identity(2, sig, EXACT))


def test_sqrtdet_sinc_at_zero_is_one():
    sig = GeneratorSignature(0)
    assert sqrtdet_sinc(AlgebraMatrix.zeros(2, 2, sig, EXACT)) == 1


def test_sqrtdet_sinc_needs_a_skew_matrix():
    sig = GeneratorSignature(0)
    with pytest.raises(ShapeError):
        sqrtdet_sinc(AlgebraMatrix.identity(2, sig, EXACT))


def test_matrix_power_and_trace(pairs):
    sig, (e1, e2) = pairs
    matrix = AlgebraMatrix.zeros(2, 2, sig, EXACT)
    matrix.entries[0, 1] = e1
    matrix.entries[1, 0] = e2
    # [[0, e1], [e2, 0]]² = diag(e1 e2, e2 e1)
    assert (matrix @ matrix).trace() == (e1 * e2).scale(2)
    assert matrix.power(4).is_zero()


def rotation(angle, size=2, mode=FLOAT):
    values = [[0] * size for _ in range(size)]
    values[0][1], values[1][0] = angle, -angle
    return AlgebraMatrix.from_scalars(values, GeneratorSignature(0), mode)


@pytest.mark.parametrize("angle", [0.3, 2.0, 4.0, 7.5])
def test_sqrtdet_sinc_of_a_rotation_generator(angle):
    # eigenvalues ±i·angle, so sin M / M has eigenvalue sinh(angle)/angle twice
    value = sqrtdet_sinc(rotation(angle)).scalar_part()
    assert value == pytest.approx(math.sinh(angle) / angle, rel=1e-12)


@pytest.mark.parametrize("angle", [0.3, 2.0, 3.0])
def test_sqrtdet_sinh_ratio_of_a_rotation_generator(angle):
    value = sqrtdet_sinh_ratio(rotation(angle, size=4)).scalar_part()
    assert value == pytest.approx(math.sin(angle) / angle, rel=1e-12)


def test_sqrtdet_sinc_with_a_numeric_part_is_not_exact():
    with pytest.raises(ExactnessError):
        sqrtdet_sinc(rotation(1, mode=EXACT))


def test_det_local_agrees_with_leibniz(pairs):
    sig, (e1, e2) = pairs
    matrix = AlgebraMatrix.from_scalars([[2, 1], [4, 3]], sig, EXACT)
    matrix.entries[0, 0] = matrix.entries[0, 0] + e1
    matrix.entries[1, 0] = matrix.entries[1, 0] + e2
    assert det_local(matrix) == det_even(matrix)


def test_det_local_needs_an_invertible_numeric_part(pairs):
    sig, (e1, _) = pairs
    matrix = AlgebraMatrix.zeros(2, 2, sig, EXACT)
    matrix.entries[0, 0] = e1
    with pytest.raises(DomainError):
        det_local(matrix)


def test_inverse_of_an_even_element(pairs):
    sig, (e1, e2) = pairs
    element = Multivector.scalar(2, sig, EXACT) + e1 + e1 * e2
    assert element * inverse_even(element) == 1
