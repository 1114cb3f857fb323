from fractions import Fraction

import pytest

from helpers import instances, solved
from prtower.cyclotomic import CyclotomicElement
from prtower.dieudonne import DieudonneModule, modular_form_module
from prtower.errors import DomainError
from prtower.padic import PadicContext, PadicScalar
from prtower.series import PowerSeries
from prtower.solver import (ModuleSeries, delta_j, dual_eval, g_tilde, instance_from_json, solve,
                            theta_direct, theta_via_solver, tw)

CTX = PadicContext(3, 40, degree_cap=80)


@pytest.fixture(scope="module")
def rank1():
    module = DieudonneModule.build(CTX, [[2]], [1])
    return ModuleSeries.from_psi_zero(module, [{1: 1}], CTX)


def z(n, j=1):
    return CyclotomicElement.zeta_power(CTX, n, j)


def test_delta_j(rank1):
    assert all(delta_j(rank1, j) == [1] for j in range(4))
    pi_part = ModuleSeries(rank1.module, [PowerSeries.pi(CTX, 80)])
    assert delta_j(pi_part, 0) == [0]


def test_g_tilde_vanishing_order(rank1):
    gt = g_tilde(rank1, 1)
    assert gt.pi_order() == 2
    # pi - t = pi^2/2 - ...
    assert gt.comps[0].coefficient(2) == PadicScalar.from_fraction(CTX, Fraction(1, 2))


def test_g_tilde_range(rank1):
    with pytest.raises(DomainError):
        g_tilde(rank1, 3)


def test_solve_zero(rank1):
    G, rep = solve(ModuleSeries.zero(rank1.module, CTX, 80))
    assert G.is_zero()


def test_solve_rank1_residual(rank1):
    G, rep = solve(rank1)
    assert rep.residual_valuation >= CTX.N - 2
    assert rep.psi_ok


def test_solve_is_linear(rank1):
    other = ModuleSeries.from_psi_zero(rank1.module, [{2: 3, 4: -1}], CTX)
    G1, _ = solve(rank1)
    G2, _ = solve(other)
    G12, _ = solve(rank1 + other)
    assert (G12 - G1 - G2).is_zero(CTX.N - 4)


def test_twist_goldens(rank1):
    assert tw(rank1, 0) is rank1
    g2 = ModuleSeries.from_psi_zero(rank1.module, [{2: 1}], CTX)
    down = tw(g2, -1)
    assert down.twist == -1
    assert down.comps[0] == PowerSeries.one_plus_pi_power(CTX, 2, 80).scale(2)
    back = tw(tw(g2, 1), -1)
    assert back.twist == 0 and (back - g2).is_zero()


def test_theta_direct_goldens(rank1):
    assert theta_direct(rank1, 1).value[0] == z(1) - 2
    assert theta_direct(rank1, 2).value[0] == z(2) + z(1).embed(2).scale(2) - 4
    zero = ModuleSeries.zero(rank1.module, CTX, 80)
    assert theta_direct(zero, 2).is_zero()


def test_theta_via_solver_matches(rank1):
    for n in (1, 2):
        assert theta_direct(rank1, n).agreement(theta_via_solver(rank1, n)) >= CTX.N - 4


def test_theta_rank2_modular():
    ctx = PadicContext(5, 40, degree_cap=80)
    module = modular_form_module(5, 4, 0, ctx=ctx)
    g = ModuleSeries.from_psi_zero(module, [{1: 1}, {}], ctx)
    assert theta_direct(g, 1).agreement(theta_via_solver(g, 1)) >= ctx.N - 4


def test_dual_eval_goldens(rank1):
    x = rank1
    assert dual_eval(x, 1, 1)[0] == z(1)
    t = ModuleSeries(rank1.module, [PowerSeries.log_one_plus_pi(CTX, 80)])
    # log(zeta) = 0; the truncated log series is accurate to about D/[F_n:F] digits
    for n in (1, 2):
        assert dual_eval(t, 0, n)[0].valuation() >= 80 // (2 * 3 ** (n - 1)) - 4
    q = PowerSeries.q_n(CTX, 2, 80) * PowerSeries.one_plus_pi_power(CTX, 1, 80)
    assert dual_eval(ModuleSeries(rank1.module, [q]), 0, 2)[0].is_zero()


def test_instance_from_json():
    doc = {"module": {"p": 3, "phi": [["2"]], "weights": [1]}, "g": [{"1": "1"}], "N": 30, "D": 60}
    module, g = instance_from_json(doc)
    assert module.rank == 1 and g.D == 60


@pytest.mark.parametrize("k", range(0, 21, 4))
def test_random_instances(k):
    inst = instances()[k]
    r = solved(inst)
    assert r["report"].psi_ok
    assert all(v >= inst.g.ctx.N for v in r["trace_defect"].values())
