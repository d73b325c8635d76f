import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.errors import ParityError, ShapeError, SignatureMismatchError
from core.grassmann import (
    GeneratorSignature,
    Multivector,
    berezin_double,
    berezin_single,
    exp_even,
    interior_mult,
    reorder_sign,
    split_ds,
    tr_z,
)
from core.scalars import ScalarMode

EXACT = ScalarMode.EXACT

# Five generators: enough for every sign pattern of a triple product
SMALL = GeneratorSignature(5)

terms = st.dictionaries(st.integers(0, 31), st.integers(-3, 3), max_size=4)


def test_generators_anticommute(fiber_signature, generator):
    p1, p2 = generator(fiber_signature.psi(0)), generator(fiber_signature.psi(1))
    assert p1 * p2 == -(p2 * p1)
    assert (p1 * p1).is_zero()


def test_monomial_sign_of_non_canonical_order(fiber_signature):
    sig = fiber_signature
    forward = Multivector.monomial(sig, (sig.psi(0), sig.psi(1)), EXACT)
    backward = Multivector.monomial(sig, (sig.psi(1), sig.psi(0)), EXACT)
    assert backward == -forward
    assert Multivector.monomial(sig, (sig.psi(0), sig.psi(0)), EXACT).is_zero()


def test_reorder_sign():
    assert reorder_sign(0b01, 0b10) == 1
    assert reorder_sign(0b10, 0b01) == -1
    assert reorder_sign(0b110, 0b001) == 1


@given(st.integers(0, (1 << 12) - 1), st.integers(0, (1 << 12) - 1))
def test_reorder_sign_counts_transpositions(a, b):
    bits_a = [i for i in range(12) if a >> i & 1]
    bits_b = [j for j in range(12) if b >> j & 1]
    count = sum(1 for i in bits_a for j in bits_b if i > j)
    assert reorder_sign(a, b) == (-1) ** count


def test_signature_cap():
    with pytest.raises(ShapeError):
        GeneratorSignature.standard(20, 3)


def test_berezin_single_takes_the_top_coefficient():
    sig = GeneratorSignature.standard(1, 1, psihat=False)
    base = GeneratorSignature(1)
    dx = Multivector.generator(base, 0, EXACT)
    assert berezin_single(Multivector.monomial(sig, (sig.dx(0), sig.psi(0)), EXACT)) == dx
    assert berezin_single(Multivector.monomial(sig, (sig.psi(0), sig.dx(0)), EXACT)) == -dx
    assert berezin_single(Multivector.scalar(1, sig, EXACT)).is_zero()


def test_berezin_double_of_the_canonical_top(fiber_signature):
    sig = fiber_signature
    top = Multivector.monomial(sig, (sig.psi(0), sig.psi(1), sig.psihat(0), sig.psihat(1)), EXACT)
    result = berezin_double(top)
    assert result == Multivector.scalar(1, GeneratorSignature(1), EXACT)


def test_tr_z_reads_z_on_the_left():
    sig = GeneratorSignature(1, has_z=True)
    z_dx = Multivector.monomial(sig, (sig.z, sig.dx(0)), EXACT)
    assert tr_z(z_dx) == Multivector.generator(GeneratorSignature(1), 0, EXACT)
    assert tr_z(Multivector.generator(sig, sig.dx(0), EXACT)).is_zero()


def test_exp_even_of_a_nilpotent_pair(fiber_signature):
    sig = fiber_signature
    pair = Multivector.monomial(sig, (sig.psi(0), sig.psihat(0)), EXACT)
    assert exp_even(pair) == Multivector.scalar(1, sig, EXACT) + pair
    assert exp_even(pair) * exp_even(-pair) == Multivector.scalar(1, sig, EXACT)


def test_exp_even_refuses_odd_input(generator, fiber_signature):
    with pytest.raises(ParityError):
        exp_even(generator(fiber_signature.psi(0)))


def test_interior_multiplication_on_a_generator(fiber_signature, generator):
    sig = fiber_signature
    result = interior_mult([2, 0], "psi", generator(sig.psi(0)))
    assert result == Multivector.scalar(2, sig, EXACT)
    with pytest.raises(ShapeError):
        interior_mult([1], "psi", generator(sig.psi(0)))


def test_split_ds_round_trips_the_transgression_part():
    sig = GeneratorSignature(1, extra_s=True)
    form = Multivector.monomial(sig, (sig.ds, sig.dx(0)), EXACT)
    spatial, transgression = split_ds(form)
    assert spatial.is_zero()
    # ds ∧ dx = ds ∧ T with T = dx
    assert transgression == Multivector.generator(GeneratorSignature(1), 0, EXACT)


def test_embed_matches_generators_by_label(fiber_signature):
    dx = Multivector.generator(GeneratorSignature(1), 0, EXACT)
    assert dx.embed(fiber_signature) == Multivector.generator(fiber_signature, fiber_signature.dx(0), EXACT)
    with pytest.raises(SignatureMismatchError):
        Multivector.generator(fiber_signature, fiber_signature.psi(0), EXACT).embed(GeneratorSignature(1))


@given(st.integers(0, 31), st.integers(0, 31))
def test_graded_commutativity_of_monomials(a, b):
    x = Multivector(SMALL, {a: 1}, EXACT)
    y = Multivector(SMALL, {b: 1}, EXACT)
    sign = -1 if (a.bit_count() * b.bit_count()) % 2 else 1
    assert x * y == (y * x).scale(sign)


@settings(max_examples=60)
@given(terms, terms, terms)
def test_product_is_associative(a, b, c):
    x, y, z = (Multivector(SMALL, t, EXACT) for t in (a, b, c))
    assert (x * y) * z == x * (y * z)


@given(terms, st.lists(st.integers(-2, 2), min_size=2, max_size=2))
def test_interior_multiplication_squares_to_zero(a, v):
    sig = GeneratorSignature.standard(1, 2, psihat=False)
    form = Multivector(sig, {mask % 8: value for mask, value in a.items()}, EXACT)
    assert interior_mult(v, "psi", interior_mult(v, "psi", form)).is_zero()
