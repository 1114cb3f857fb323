from fractions import Fraction

import pytest

from prtower.errors import DivergenceDetected, DomainError, NotInvertible
from prtower.padic import PadicContext
from prtower.series import PowerSeries
from prtower.wach import (WachData, cor43_check, first_iterate, residual, series_identity,
                          smat_valuation, solve_M)

CTX = PadicContext(3, 30, degree_cap=60)


@pytest.fixture(scope="module")
def antidiagonal():
    w = WachData.build(CTX, [[0, 1], [1, 0]], [0, 1])
    M, rep = solve_M(w)
    return w, M, rep


def test_rank_one_weight_zero_is_trivial():
    w = WachData.build(CTX, [[2]], [0])
    M, rep = solve_M(w)
    assert M[0][0] == PowerSeries.constant(CTX, 1, 60)
    assert rep.residual_valuation == float("inf")


def test_first_iterate_golden():
    w = WachData.build(CTX, [[0, 1], [1, 0]], [0, 1])
    M1 = first_iterate(w, 12)
    q = PowerSeries.q_n(CTX, 1, 12)
    assert M1[0][0] == q.scale(Fraction(1, 3))
    assert M1[1][1] == PowerSeries.mu(CTX, 12).inverse()
    assert M1[0][1].is_zero() and M1[1][0].is_zero()


def test_antidiagonal_solves(antidiagonal):
    w, M, rep = antidiagonal
    assert rep.residual_valuation >= CTX.N - rep.loss_bound
    assert smat_valuation(residual(w, M)) >= CTX.N - rep.loss_bound
    assert rep.congruence_ok and rep.congruence_order >= 1
    assert rep.iterations <= rep.iteration_cap


def test_cor43(antidiagonal):
    w, M, _ = antidiagonal
    assert cor43_check(M, 1, w.r_d) and cor43_check(M, 2, w.r_d)


def test_cor43_identity_and_corrupted(antidiagonal):
    I = series_identity(CTX, 2, 60)
    assert cor43_check(I, 1, 1)
    w, M, _ = antidiagonal
    bumped = [list(row) for row in M]
    bumped[0][1] = bumped[0][1] + PowerSeries.constant(CTX, 1, 60)
    assert not cor43_check(bumped, 1, w.r_d)


def test_congruence_flag_for_weight_two_block():
    # a weight-r block behaves like (t/pi)^r, which is only 1 mod pi
    w = WachData.build(CTX, [[1, 0], [0, 2]], [0, 2])
    M, rep = solve_M(w)
    assert rep.residual_valuation >= CTX.N - rep.loss_bound
    assert not rep.congruence_ok


def test_divergence_is_detected():
    w = WachData.build(CTX, [[1, 1], [0, 1]], [0, 3], strict=False)
    with pytest.raises(DivergenceDetected):
        solve_M(w)


def test_strict_validation():
    with pytest.raises(DomainError):
        WachData.build(CTX, [[1, 0], [0, 1]], [1, 2])
    with pytest.raises(DomainError):
        WachData.build(CTX, [[1, 0], [0, 1]], [0, 3])
    with pytest.raises(NotInvertible):
        WachData.build(CTX, [[1, 0], [0, 3]], [0, 1])


def test_json_round_trip():
    w = WachData.build(CTX, [[0, 1], [1, 0]], [0, 1])
    assert WachData.from_json(CTX, w.to_json()) == w
