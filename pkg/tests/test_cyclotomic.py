from hypothesis import given, settings, strategies as st

from prtower.cyclotomic import CyclotomicElement, rank_trace_zero
from prtower.padic import PadicContext
from prtower.series import PowerSeries, PsiZeroSeries

CTX = PadicContext(3, 30, degree_cap=60)


def zeta(n, j=1, ctx=CTX):
    return CyclotomicElement.zeta_power(ctx, n, j)


def test_trace_goldens():
    assert zeta(2).trace_down().is_zero()
    assert zeta(1).trace_down() == CyclotomicElement.constant(CTX, 0, -1)
    c = CyclotomicElement.constant(CTX, 2, 5)
    assert c.trace_down() == CyclotomicElement.constant(CTX, 1, 15)


def test_zeta_has_order_p_power():
    z = zeta(2)
    acc = CyclotomicElement.constant(CTX, 2, 1)
    for _ in range(9):
        acc = acc * z
    assert acc == CyclotomicElement.constant(CTX, 2, 1)


def test_preimage():
    x = zeta(2)
    assert x.is_trace_zero()
    assert x.preimage().to_series(40).eval_at_zeta(2) == x
    assert zeta(1).preimage().to_series(20).eval_at_zeta(1) == zeta(1)
    y = zeta(2) + zeta(2, 2)
    assert y.preimage().terms == {1: 1, 2: 1}


def test_decompose_goldens():
    parts = zeta(2).decompose()
    assert parts[1] == zeta(2) and parts[0].is_zero()
    parts = CyclotomicElement.constant(CTX, 3, 7).decompose()
    assert parts[0] == CyclotomicElement.constant(CTX, 1, 7)
    assert all(x.is_zero() for x in parts[1:])


def test_rank_formula():
    for p in (3, 5, 7):
        for n in (2, 3):
            assert rank_trace_zero(p, n) == p ** (n - 2) * (p - 1) ** 2


elements = st.dictionaries(st.integers(min_value=0, max_value=8), st.integers(min_value=-30, max_value=30),
                           max_size=6)


@settings(max_examples=40, deadline=None)
@given(elements)
def test_decompose_recombines(terms):
    x = CyclotomicElement.from_zeta_powers(CTX, 2, terms)
    parts = x.decompose()
    total = parts[0].embed(2) + parts[1]
    assert total == x
    assert parts[1].is_trace_zero()


@settings(max_examples=40, deadline=None)
@given(elements, elements)
def test_trace_is_additive_and_linear(a, b):
    x = CyclotomicElement.from_zeta_powers(CTX, 2, a)
    y = CyclotomicElement.from_zeta_powers(CTX, 2, b)
    assert (x + y).trace_down() == x.trace_down() + y.trace_down()
    assert x.embed(2).trace_down() == x.trace_down()


@settings(max_examples=30, deadline=None)
@given(elements)
def test_trace_of_embedded_is_multiplication_by_p(a):
    x = CyclotomicElement.from_zeta_powers(CTX, 1, {k % 3: v for k, v in a.items()})
    assert x.embed(2).trace_down() == x.scale(3)
