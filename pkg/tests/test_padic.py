from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from prtower.errors import DomainError, PrecisionExhausted
from prtower.padic import PadicContext, PadicScalar, lemma_A1_check, padic_log_unit, vp

CTX = PadicContext(3, 30)


def test_valuation_and_unit():
    x = PadicScalar.from_int(CTX, 18)
    assert x.valuation() == 2
    assert x.unit[0] == 2


def test_inverse_of_one():
    assert PadicScalar.from_int(CTX, 1).inverse() == PadicScalar.from_int(CTX, 1)


def test_sigma_is_identity_for_nu1():
    x = PadicScalar.from_fraction(CTX, Fraction(7, 9))
    assert x.sigma() == x


def test_log_examples():
    assert padic_log_unit(PadicScalar.from_int(CTX, 1)).is_zero()
    assert padic_log_unit(PadicScalar.from_int(CTX, 4)).valuation() == 1
    assert padic_log_unit(PadicScalar.from_int(CTX, 10)).valuation() == 2


def test_log_is_additive():
    a, b = PadicScalar.from_int(CTX, 4), PadicScalar.from_int(CTX, 7)
    lhs = padic_log_unit(a * b)
    rhs = padic_log_unit(a) + padic_log_unit(b)
    assert (lhs - rhs).is_zero() or (lhs - rhs).valuation() >= CTX.N - 4


def test_context_validation():
    with pytest.raises(DomainError):
        PadicContext(4, 10)
    with pytest.raises(DomainError):
        PadicContext(3, 10, u=10)  # v_3(10 - 1) = 2


def test_lemma_A1_goldens():
    rep = lemma_A1_check(1, 2, CTX)
    assert rep.valuation == 3 and rep.valuation_ok
    assert lemma_A1_check(1, 1, CTX).congruence_ok
    with pytest.raises(DomainError):
        lemma_A1_check(0, 1, CTX)


def test_lemma_A1_printed_truncation_is_reported_separately():
    rep = lemma_A1_check(1, 2, CTX)
    assert rep.congruence_ok and not rep.truncated_congruence_ok


def test_lemma_A1_needs_precision():
    with pytest.raises(PrecisionExhausted):
        lemma_A1_check(1, 8, PadicContext(3, 10))


fractions = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**4)


@settings(max_examples=60, deadline=None)
@given(fractions, fractions)
def test_ring_axioms(a, b):
    x, y = PadicScalar.from_fraction(CTX, a), PadicScalar.from_fraction(CTX, b)
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) * x == x * x + y * x
    assert (x * y).to_fraction() == PadicScalar.from_fraction(CTX, a * b).to_fraction()


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=10**9))
def test_valuation_matches_integer(n):
    assert PadicScalar.from_int(CTX, n).valuation() == vp(n, 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=10**6).filter(lambda n: n % 3))
def test_inverse(n):
    x = PadicScalar.from_int(CTX, n)
    assert x * x.inverse() == PadicScalar.from_int(CTX, 1)


def test_unramified_degree_two():
    ctx = PadicContext(3, 20, nu=2)
    x = ctx.scalar((2, 1))
    assert x * x.inverse() == ctx.scalar(1)
    assert x.sigma(2) == x
