import pytest

from prtower.dieudonne import DieudonneModule, modular_form_module
from prtower.errors import DomainError, LevelMismatch
from prtower.padic import PadicContext
from prtower.qsystems import generate, perturbed, verify, verify_scheduled
from prtower.solver import ModuleSeries


@pytest.fixture(scope="module")
def modular():
    ctx = PadicContext(5, 40, degree_cap=60)
    module = modular_form_module(5, 4, 0, ctx=ctx)
    g = ModuleSeries.from_psi_zero(module, [{1: 1}, {}], ctx)
    return g, generate(g, [5, 0, 1], 0, 3)


def test_modular_family(modular):
    _, qs = modular
    rep = verify(qs)
    assert rep.ok and rep.q_relation_ok == {1: True}
    assert set(rep.trace_step_ok) == {1, 2}


def test_schedules(modular):
    _, qs = modular
    assert qs.schedules["b_poly"] == {1: 2, 2: 3, 3: 4}
    assert all(verify_scheduled(qs, [125, 0, 1], "b_poly").values())
    assert all(verify_scheduled(qs, [5, 0, 1], "r_poly").values())


def test_perturbed_family_fails(modular):
    _, qs = modular
    rep = verify(perturbed(qs, 1))
    assert not rep.trace_step_ok[1] and not rep.q_relation_ok[1]


def test_rank_one_single_term():
    ctx = PadicContext(3, 30, degree_cap=60)
    g = ModuleSeries.from_psi_zero(DieudonneModule.build(ctx, [[2]], [1]), [{1: 1}], ctx)
    qs = generate(g, [-6, 1], 0, 3)
    rep = verify(qs)
    assert rep.ok and rep.q_relation_ok == {1: True, 2: True}


def test_zero_family():
    ctx = PadicContext(3, 30, degree_cap=60)
    g = ModuleSeries.zero(DieudonneModule.build(ctx, [[2]], [1]), ctx, 60)
    qs = generate(g, [-6, 1], 0, 2)
    assert all(v.is_zero() for v in qs.family.values())


def test_rejects_non_annihilating_polynomial(modular):
    g, _ = modular
    with pytest.raises(DomainError):
        generate(g, [1, 0, 1], 0, 2)


def test_level_cap(modular):
    g, _ = modular
    with pytest.raises(LevelMismatch):
        generate(g, [5, 0, 1], 0, 9)
