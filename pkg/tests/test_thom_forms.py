import math

import pytest

from core.errors import DomainError
from core.jets import JetScalar
from core.scalars import ScalarMode
from core.flat_bundle import random_germ
from core.lattice_sums import float_germ
from core.thom_forms import LatticeKind, SectionSpec, alpha_normalisation, alpha_profile
from features.thom_transgression import (
    delta_oracle_residual,
    epsilon_oracle_residual,
    odd_rank_alpha_magnitude,
    parity_residual,
    trivial_bundle_residual,
)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_rank_one_delta_matches_the_hand_expansion(t):
    assert delta_oracle_residual(t) < 1e-10


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_rank_one_epsilon_matches_the_hand_expansion(t):
    assert epsilon_oracle_residual(t) < 1e-10


def test_vol_and_rho_vanish_without_omega():
    assert trivial_bundle_residual(1.0) < 1e-12


def test_alpha_has_unit_fiber_integral():
    assert alpha_normalisation(1.0) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("lam", [233.07, 300.0, -1e3])
def test_alpha_profile_is_zero_deep_in_the_tail(lam):
    assert alpha_profile(1.0, lam) == 0.0


def test_alpha_profile_peak():
    assert alpha_profile(2.0, 0.0) == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-12)


def pair(rank, base_dim, seed=1):
    germ = float_germ(random_germ(rank, base_dim, 1, ScalarMode.FLOAT, seed))
    unimodular = float_germ(random_germ(rank, base_dim, 1, ScalarMode.FLOAT, seed + 2, unimodular=True))
    return germ, unimodular


def test_delta_family_vanishes_for_even_rank():
    germ, unimodular = pair(2, 3)
    assert parity_residual(germ, unimodular, 1.0) < 1e-10


def test_odd_rank_parity_is_not_a_vanishing_statement():
    germ, unimodular = pair(1, 1)
    with pytest.raises(DomainError):
        parity_residual(germ, unimodular, 1.0)
    assert odd_rank_alpha_magnitude(germ, 1.0) > 0.0


def test_lattice_points():
    assert SectionSpec.lattice_point((1, 0), scale=2).values == (2, 0)
    dual = SectionSpec.lattice_point((1, -1), scale=2, dual=True)
    assert dual.values == pytest.approx((math.pi, -math.pi))


def test_section_validation():
    jet = JetScalar.variable(0, 1, 1, ScalarMode.FLOAT)
    with pytest.raises(DomainError):
        SectionSpec.flat([jet])
    with pytest.raises(DomainError):
        SectionSpec((0.5,), lattice=LatticeKind.LATTICE, lattice_scale=1)
