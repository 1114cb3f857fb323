"""Q-systems on tangent values.

A family d_n = theta(Tw_{-m} g, n) satisfies Tr_{n+1/n} d_{n+1} = p phi(d_n), so
sum_i a_i Tr_{n+i/n} d_{n+i} = Q(p phi) d_n vanishes whenever Q annihilates
p phi on the twisted module.  The integrality exponents that turn d_n into
cohomology classes are carried along as metadata: the b-polynomial schedule
r + s - 1 and the r-polynomial schedule r + s - 1 + (r - b) n, each on top of
the factor p^((b_m - 1) n) relating the two normalizations of the
exponential map (b_m = top weight of the twisted module).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import inf

from .cyclotomic import CyclotomicElement
from .dieudonne import constants, mat_scale, min_val, poly_at_matrix
from .errors import DomainError, LevelMismatch
from .solver import (ModuleSeries, TangentVector, _apply_matrix_cyc, _cyc_reprec, _default_r,
                     _twisted_module, theta_direct, tw)


@dataclass
class QSystem:
    polynomial_Q: list
    m: int
    family: dict
    matrix: list
    annihilation_level_k: int = 1
    schedules: dict = field(default_factory=dict)
    top_weight: int = 0
    N: int = 0

    @property
    def n_max(self) -> int:
        return max(self.family) if self.family else 0

    @property
    def p(self) -> int:
        v = next(iter(self.family.values()))
        return v.value[0].p

    def to_json(self) -> dict:
        return {"Q": [str(a) for a in self.polynomial_Q], "m": self.m,
                "annihilation_level_k": self.annihilation_level_k,
                "top_weight": self.top_weight, "schedules": self.schedules,
                "family": {str(n): v.to_json() for n, v in sorted(self.family.items())}}


def _family_guard(M, p: int, n_max: int) -> int:
    vM = min_val(M, p)
    return 4 + 2 * max(0, -int(vM)) if vM != inf else 4


def generate(g: ModuleSeries, Q, m: int, n_max: int, r: int | None = None) -> QSystem:
    """d_n = theta_direct(Tw_{-m} g, n) for 1 <= n <= n_max.

    Q (coefficients a_0..a_N) must annihilate p phi on D_cris(T(-m)).  The
    family is kept with a few guard digits beyond the context precision so
    that verify() can test the relations at the full precision.
    """
    ctx, p = g.ctx, g.ctx.p
    if n_max < 1:
        raise LevelMismatch("n_max must be >= 1")
    if n_max > ctx.tower_cap:
        raise LevelMismatch(f"level {n_max} exceeds the tower cap {ctx.tower_cap}")
    Q = [Fraction(a) for a in Q]
    gm = tw(g, -m)
    M = gm.matrix()
    Z = poly_at_matrix(Q, mat_scale(M, p))
    if min_val(Z, p) < ctx.N:
        raise DomainError("Q does not annihilate p phi on the twisted module")
    guard = _family_guard(M, p, n_max)
    wide = gm.with_context(ctx.with_precision(ctx.N + guard))
    family = {n: theta_direct(wide, n) for n in range(1, n_max + 1)}

    mod_t = _twisted_module(gm)
    top = max(mod_t.weights)
    schedules = {}
    try:
        rr = r if r is not None else _default_r(gm)
        c = constants(mod_t, rr)
        base = c.r + c.s - 1
        schedules = {
            "b_poly": {n: base + (top - 1) * n for n in family},
            "r_poly": {n: base + (c.r - top) * n + (top - 1) * n for n in family},
        }
    except DomainError:
        pass
    return QSystem(Q, m, family, M, 1, schedules, top, ctx.N)


@dataclass
class QReport:
    trace_step_ok: dict
    q_relation_ok: dict

    @property
    def ok(self) -> bool:
        return all(self.trace_step_ok.values()) and all(self.q_relation_ok.values())

    def to_json(self) -> dict:
        return {"trace_step_ok": {str(k): v for k, v in sorted(self.trace_step_ok.items())},
                "q_relation_ok": {str(k): v for k, v in sorted(self.q_relation_ok.items())}}


def _vanishes(vec, N: int) -> bool:
    return all(x.valuation() >= N for x in vec)


def _relation(qs: QSystem, Q, n: int, weights: dict | None = None):
    """sum_i a_i Tr_{n+i/n}(p^w(n+i) d_{n+i})."""
    acc = None
    for i, a in enumerate(Q):
        if a == 0:
            continue
        vec = qs.family[n + i].value
        scale = a * (Fraction(qs.p) ** weights[n + i] if weights else 1)
        term = [x.trace_to(n).scale(scale) for x in vec]
        acc = term if acc is None else [u + v for u, v in zip(acc, term)]
    return acc or []


def verify(qs: QSystem) -> QReport:
    """Trace steps Tr d_{n+1} = p phi(d_n) and the relation sum a_i Tr d_{n+i} = 0,
    each tested at the context precision; failures are report entries."""
    p, N = qs.p, qs.N
    trace_ok = {}
    for n in range(1, qs.n_max):
        lhs = [x.trace_down() for x in qs.family[n + 1].value]
        rhs = _apply_matrix_cyc(mat_scale(qs.matrix, p), qs.family[n].value)
        trace_ok[n] = _vanishes([a - b for a, b in zip(lhs, rhs)], N)
    q_ok = {}
    deg = len(qs.polynomial_Q) - 1
    for n in range(1, qs.n_max - deg + 1):
        q_ok[n] = _vanishes(_relation(qs, qs.polynomial_Q, n), N)
    return QReport(trace_ok, q_ok)


def verify_scheduled(qs: QSystem, Q, kind: str) -> dict:
    """The relation sum a_i cor(c_{n+i}) = 0 for the scaled values
    c_n = p^(schedule(n)) d_n, with Q a b- or r-polynomial of the untwisted module."""
    if kind not in qs.schedules:
        raise DomainError(f"no {kind} schedule recorded")
    weights = qs.schedules[kind]
    Q = [Fraction(a) for a in Q]
    deg = len(Q) - 1
    return {n: _vanishes(_relation(qs, Q, n, weights), qs.N) for n in range(1, qs.n_max - deg + 1)}


def perturbed(qs: QSystem, n: int, amount=1) -> QSystem:
    """Copy of qs with d_n shifted by amount in its first coordinate (a negative control)."""
    fam = dict(qs.family)
    v = fam[n]
    bump = CyclotomicElement.constant(v.value[0].ctx, v.value[0].n, amount)
    fam[n] = TangentVector([v.value[0] + bump] + list(v.value[1:]), v.level, v.scaling_exponent,
                           dict(v.summands), v.certified)
    return QSystem(qs.polynomial_Q, qs.m, fam, qs.matrix, qs.annihilation_level_k, qs.schedules,
                   qs.top_weight, qs.N)
