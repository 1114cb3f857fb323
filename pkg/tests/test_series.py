from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from prtower.cyclotomic import CyclotomicElement
from prtower.padic import PadicContext, PadicScalar
from prtower.series import PowerSeries, PsiZeroSeries

CTX = PadicContext(3, 30, degree_cap=40)


def series(coeffs, D=40):
    return PowerSeries.from_values(CTX, list(coeffs), D)


def test_phi_of_pi():
    assert PowerSeries.pi(CTX).phi() == series([0, 3, 3, 1])


def test_phi_of_one_plus_pi():
    x = PowerSeries.one_plus_pi_power(CTX, 1)
    assert x.phi() == PowerSeries.one_plus_pi_power(CTX, 3)


def test_q_times_pi_is_phi_pi():
    q = PowerSeries.q_n(CTX, 1)
    assert q == series([3, 3, 1])
    assert q * PowerSeries.pi(CTX) == PowerSeries.pi(CTX).phi()


def test_psi_examples():
    assert PowerSeries.one_plus_pi_power(CTX, 3).psi() == PowerSeries.one_plus_pi_power(CTX, 1).truncate(13)
    assert PowerSeries.pi(CTX).psi().truncate(10) == series([-1], 10)
    assert PowerSeries.q_n(CTX, 1).psi().truncate(10) == series([1], 10)


def test_partial_examples():
    for i in (1, 2, 5):
        x = PowerSeries.one_plus_pi_power(CTX, i)
        assert x.partial(1) == x.scale(i).truncate(x.D - 1)
    t = PowerSeries.log_one_plus_pi(CTX)
    assert t.partial(1) == series([1], t.D - 1)


def test_partial_inverse_on_psi_zero_side():
    h = PsiZeroSeries(CTX, {2: 1})
    assert h.partial_inv(1).to_series(20) == PowerSeries.one_plus_pi_power(CTX, 2, 20).scale(Fraction(1, 2))


def test_mu_and_t():
    assert PowerSeries.mu(CTX).coefficient_fraction(0) == 1
    t = PowerSeries.log_one_plus_pi(CTX, 6)
    expected = [0, 1, Fraction(-1, 2), Fraction(1, 3), Fraction(-1, 4), Fraction(1, 5)]
    assert all(t.coefficient(i) == PadicScalar.from_fraction(CTX, c) for i, c in enumerate(expected))


def test_eval_at_zeta():
    z9 = CyclotomicElement.zeta_power(CTX, 2, 1)
    assert PowerSeries.one_plus_pi_power(CTX, 1).eval_at_zeta(2) == z9
    assert PowerSeries.q_n(CTX, 2).eval_at_zeta(2).is_zero()
    assert PowerSeries.q_n(CTX, 1).eval_at_zeta(1).is_zero()
    assert not PowerSeries.q_n(CTX, 1).eval_at_zeta(2).is_zero()


coeff_lists = st.lists(st.integers(min_value=-50, max_value=50), min_size=1, max_size=12)


@settings(max_examples=40, deadline=None)
@given(coeff_lists, coeff_lists)
def test_phi_is_a_ring_map(a, b):
    x, y = series(a, 30), series(b, 30)
    assert (x * y).phi() == x.phi() * y.phi()
    assert (x + y).phi() == x.phi() + y.phi()


@settings(max_examples=40, deadline=None)
@given(coeff_lists)
def test_psi_left_inverse_of_phi(a):
    # degree <= 11, so phi(x) is exact below pi^40
    x = series(a, 40)
    back = x.phi().psi()
    assert back == x.truncate(back.D)


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.integers(min_value=1, max_value=20).filter(lambda i: i % 3),
                       st.integers(min_value=-20, max_value=20), min_size=1, max_size=5))
def test_psi_kills_prime_to_p_exponents(terms):
    h = PsiZeroSeries(CTX, terms).to_series(30)
    assert h.psi().is_zero()


@settings(max_examples=30, deadline=None)
@given(coeff_lists.filter(lambda a: a[0] % 3))
def test_inverse(a):
    x = series(a, 30)
    assert x * x.inverse() == series([1], 30)
