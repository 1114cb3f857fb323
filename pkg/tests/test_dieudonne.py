import random
from fractions import Fraction

import pytest

from prtower.dieudonne import (DieudonneModule, char_poly, newton_slopes, constants, det_one_minus_phi, det_valuation_part,
                               is_k_polynomial, k_polynomial, mat_mul, mat_scale, min_val,
                               modular_form_module, random_module, slopes)
from prtower.errors import DomainError
from prtower.padic import PadicContext

F = Fraction


def test_modular_form_matrix():
    m = modular_form_module(3, 2, 0)
    assert [list(r) for r in m.phi] == [[0, -1], [F(1, 3), 0]]
    sq = mat_mul(m.matrix(), m.matrix())
    assert sq == [[F(-1, 3), 0], [0, F(-1, 3)]]


def test_slopes():
    assert slopes(modular_form_module(3, 2, 0)) == [F(-1, 2), F(-1, 2)]
    ctx = PadicContext(3, 20)
    # the identity has eigenvalue 1 and is not an admissible module; its slopes come from the polynomial
    assert newton_slopes(char_poly([[F(1), F(0)], [F(0), F(1)]]), 3) == [0, 0]
    assert sorted(slopes(DieudonneModule.build(ctx, [[F(2, 3), 0], [0, 2]], [0, 1]))) == [-1, 0]


@pytest.mark.parametrize("p,k", [(3, 2), (5, 2), (5, 4), (7, 6)])
def test_modular_form_constants(p, k):
    c = constants(modular_form_module(p, k, 0), 1)
    assert c.s1 == c.s2 == k // 2 - 1
    if c.s1_exact is not None:
        assert c.s1_exact == c.s1


def test_rank_one_constants():
    ctx = PadicContext(3, 20)
    c = constants(DieudonneModule.build(ctx, [[2]], [1]), 1)
    assert (c.s1, c.s2) == (0, 0)


@pytest.mark.parametrize("p,k,a_p", [(5, 4, 0), (7, 4, 49), (7, 6, 0)])
def test_k_polynomials(p, k, a_p):
    m = modular_form_module(p, k, a_p)
    QT = [F(p) ** (k - 1), -F(a_p), 1]
    assert is_k_polynomial(m, QT, k // 2)
    q1 = k_polynomial(m, 1)
    assert q1 == [p, -F(a_p) / F(p) ** (k // 2 - 1), 1]
    assert is_k_polynomial(m, q1, 1)


def test_det_part():
    for e in (1,):
        d = det_one_minus_phi(modular_form_module(3, 2, 0))
        assert det_valuation_part(d, 3) == F(1, 3 ** e)


def test_p_phi_powers_bounded():
    for p, k in ((5, 4), (7, 6)):
        m = modular_form_module(p, k, 0)
        pm = mat_scale(m.matrix(), p)
        acc = pm
        for _ in range(12):
            assert min_val(acc, p) >= 1 - k // 2
            acc = mat_mul(acc, pm)


def test_weight_range_enforced():
    ctx = PadicContext(3, 20)
    with pytest.raises(DomainError):
        DieudonneModule.build(ctx, [[1, 0], [0, F(1, 27)]], [0, 3])
    with pytest.raises(DomainError):
        modular_form_module(5, 3, 0)


def test_json_round_trip():
    ctx = PadicContext(5, 30)
    m = modular_form_module(5, 4, 0, ctx=ctx)
    back = DieudonneModule.from_json(m.to_json(), ctx)
    assert back.phi == m.phi and back.weights == m.weights


def test_random_modules_are_admissible():
    rng = random.Random(3)
    for p in (3, 5, 7):
        ctx = PadicContext(p, 30)
        for d in (1, 2, 3):
            m = random_module(ctx, d, rng)
            assert m.b - m.a <= p - 1
            assert constants(m).r >= 1
