"""The equation (1 - phi) G = g on power series with values in a Dieudonne module.

``phi`` on a ModuleSeries is series substitution on every component followed
by the Frobenius matrix; ``psi`` is series psi followed by the inverse matrix.
The solution is the convergent sum of phi^k(g~) plus a finite correction in
powers of t, where g~ is g with its first r+1 Taylor coefficients (in t)
removed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, floor, inf

from . import _kernel as K
from .cyclotomic import CyclotomicElement
from .dieudonne import (DieudonneModule, Matrix, constants, fval, identity, inverse_one_minus,
                        mat_add, mat_inv, mat_mul, mat_scale, mat_vec, min_val)
from .errors import DivergenceDetected, DomainError, LevelMismatch, NotPsiZero, PrecisionExhausted
from .padic import PadicContext, PadicScalar, _floor_log
from .series import PowerSeries, PsiZeroSeries, _round_exp


def ceil_log(D: int, p: int) -> int:
    """Smallest L with p^L >= D."""
    L = 0
    while p ** L < D:
        L += 1
    return L


def _reprec(f: PowerSeries, ctx: PadicContext) -> PowerSeries:
    mod = ctx.p ** (ctx.N + f.shift)
    return PowerSeries(ctx, [x % mod for x in f.c], f.shift, f.D)


def _cyc_reprec(x: CyclotomicElement, ctx: PadicContext) -> CyclotomicElement:
    mod = ctx.p ** (ctx.N + x.shift)
    out = CyclotomicElement(ctx, x.n, [c % mod for c in x.c], x.shift)
    out.tail = x.tail
    return out


class ModuleSeries:
    """sum_i comps[i] (x) v_i, in D_cris(T(twist)) = D_cris(T) t^-twist e_twist."""

    __slots__ = ("module", "comps", "twist")

    def __init__(self, module: DieudonneModule, comps, twist: int = 0):
        comps = list(comps)
        if len(comps) != module.rank:
            raise DomainError("need one component per basis vector")
        if len({c.D for c in comps}) > 1:
            raise DomainError("components must share a degree cap")
        self.module = module
        self.comps = comps
        self.twist = twist

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, module, ctx=None, D=None, twist=0):
        ctx = module.ctx if ctx is None else ctx
        return cls(module, [PowerSeries.zero(ctx, D) for _ in range(module.rank)], twist)

    @classmethod
    def from_psi_zero(cls, module, parts, ctx=None, D=None, twist=0):
        """``parts[i]`` is a dict {exponent: coefficient} or a PsiZeroSeries."""
        ctx = module.ctx if ctx is None else ctx
        comps = []
        for part in parts:
            if not isinstance(part, PsiZeroSeries):
                part = PsiZeroSeries.from_values(ctx, part)
            comps.append(part.to_series(D if D is not None else ctx.D))
        return cls(module, comps, twist)

    @classmethod
    def basis_times(cls, module, f: PowerSeries, i: int, twist=0):
        comps = [PowerSeries.zero(f.ctx, f.D) for _ in range(module.rank)]
        comps[i] = f
        return cls(module, comps, twist)

    # -- properties ------------------------------------------------------
    @property
    def ctx(self) -> PadicContext:
        return self.comps[0].ctx

    @property
    def D(self) -> int:
        return self.comps[0].D

    @property
    def d(self) -> int:
        return len(self.comps)

    def matrix(self) -> Matrix:
        """Frobenius matrix on D_cris(T(twist)): p^-twist times that of T."""
        return self.module.twisted(-self.twist)

    def valuation(self):
        return min(c.valuation() for c in self.comps)

    def is_zero(self, prec=None) -> bool:
        return all(c.is_zero(prec) for c in self.comps)

    def pi_order(self):
        return min(c.pi_order() for c in self.comps)

    def _like(self, comps) -> "ModuleSeries":
        return ModuleSeries(self.module, comps, self.twist)

    def with_context(self, ctx: PadicContext) -> "ModuleSeries":
        return self._like([_reprec(c, ctx) for c in self.comps])

    def truncate(self, D: int) -> "ModuleSeries":
        return self._like([c.truncate(D) for c in self.comps])

    # -- arithmetic ------------------------------------------------------
    def _check(self, other):
        if other.twist != self.twist or other.module is not self.module and other.module != self.module:
            raise DomainError("series live in different modules")

    def __add__(self, other: "ModuleSeries"):
        self._check(other)
        return self._like([a + b for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other: "ModuleSeries"):
        self._check(other)
        return self._like([a - b for a, b in zip(self.comps, other.comps)])

    def __neg__(self):
        return self._like([-a for a in self.comps])

    def scale(self, x) -> "ModuleSeries":
        return self._like([a.scale(x) for a in self.comps])

    def apply_matrix(self, M: Matrix) -> "ModuleSeries":
        """Coefficient vector c -> M c."""
        out = []
        for row in M:
            acc = PowerSeries.zero(self.ctx, self.D)
            for m, comp in zip(row, self.comps):
                if m != 0:
                    acc = acc + comp.scale(m)
            out.append(acc)
        return self._like(out)

    def phi(self) -> "ModuleSeries":
        return self._like([c.phi() for c in self.comps]).apply_matrix(self.matrix())

    def psi(self) -> "ModuleSeries":
        return self._like([c.psi() for c in self.comps]).apply_matrix(mat_inv(self.matrix()))

    def partial(self, m: int = 1) -> "ModuleSeries":
        return self._like([c.partial(m) for c in self.comps])

    def value_at_zero(self) -> list[PadicScalar]:
        return [c.value_at_zero() for c in self.comps]

    def eval_at_zeta(self, n: int, polynomial: bool = False) -> list[CyclotomicElement]:
        return [c.eval_at_zeta(n, polynomial=polynomial) for c in self.comps]

    def psi_zero_parts(self) -> list[PsiZeroSeries]:
        """Components in the (1+pi)^i basis; NotPsiZero if some psi(g_i) != 0."""
        return [PsiZeroSeries.from_series(c) for c in self.comps]

    def to_json(self) -> dict:
        return {"twist": self.twist, "components": [c.to_json_pairs() for c in self.comps]}

    def __repr__(self):
        return f"ModuleSeries(d={self.d}, D={self.D}, twist={self.twist})"


# -- Delta_j and g~ --------------------------------------------------------

def _frac(x: PadicScalar) -> Fraction:
    return Fraction(0) if x.is_zero() else x.to_fraction()


def delta_j(g: ModuleSeries, j: int) -> list[Fraction]:
    """(partial^j g)(0), as exact rationals (coefficients are p-adic integers
    given to working precision)."""
    if j < 0:
        raise DomainError("j must be >= 0")
    return [_frac(c.partial(j).value_at_zero()) for c in g.comps]


def t_power_over_factorial(ctx: PadicContext, j: int, D: int) -> PowerSeries:
    t = PowerSeries.log_one_plus_pi(ctx, D)
    return (t ** j).scale(Fraction(1, factorial(j)))


def _vector_series(g: ModuleSeries, f: PowerSeries, vec: list) -> ModuleSeries:
    return g._like([f.scale(x) if x != 0 else PowerSeries.zero(g.ctx, g.D) for x in vec])


def g_tilde(g: ModuleSeries, r: int) -> ModuleSeries:
    """g - sum_{j <= r} t^j/j! (x) Delta_j(g); vanishes to order r + 1 at pi = 0."""
    p = g.ctx.p
    if r >= p:
        raise DomainError("r must be <= p - 1 so that 1/j! stays integral")
    out = g
    for j in range(r + 1):
        out = out - _vector_series(g, t_power_over_factorial(g.ctx, j, g.D), delta_j(g, j))
    order = out.pi_order()
    if order < r + 1 and not out.is_zero():
        # coefficients below r+1 must be zero to working precision
        low = min(min(c.valuations()[:r + 1]) for c in out.comps)
        if low < g.ctx.N - r * _floor_log(g.D, p) - 2:
            raise PrecisionExhausted("g~ does not vanish to order r + 1")
    return out


# -- the solver ------------------------------------------------------------

@dataclass
class SolveReport:
    r: int
    s: int
    iterations: int
    iteration_cap: int
    guard: int
    loss_bound: int
    residual_valuation: float
    psi_ok: bool
    psi_margin: float
    last_term_valuation: float
    D: int
    N: int

    def to_json(self) -> dict:
        def num(x):
            return "inf" if x == inf else x
        return {"r": self.r, "s": self.s, "iterations": self.iterations,
                "iteration_cap": self.iteration_cap, "guard": self.guard,
                "loss_bound": self.loss_bound, "residual_valuation": num(self.residual_valuation),
                "psi_ok": self.psi_ok, "psi_margin": num(self.psi_margin),
                "last_term_valuation": num(self.last_term_valuation), "D": self.D, "N": self.N}


def _default_r(g: ModuleSeries) -> int:
    from .dieudonne import slopes
    return max(1, -floor(min(slopes(_twisted_module(g)))))


def _twisted_module(g: ModuleSeries) -> DieudonneModule:
    if g.twist == 0:
        return g.module
    return DieudonneModule(g.module.ctx, tuple(tuple(r) for r in g.matrix()),
                           tuple(w + g.twist for w in g.module.weights), g.module.dprime)


def iteration_cap(N: int, r: int, s: int, D: int, p: int) -> int:
    return N + r * ceil_log(D, p) + 8


def solve(g: ModuleSeries, r: int | None = None, check: bool = True) -> tuple[ModuleSeries, SolveReport]:
    """Solve (1 - phi) G = g; returns G at the precision of g and a report."""
    ctx, p, D = g.ctx, g.ctx.p, g.D
    mod_t = _twisted_module(g)
    if r is None:
        r = _default_r(g)
    if r >= p:
        raise DomainError("r must be <= p - 1")
    consts = constants(mod_t, r)
    s = consts.s
    L = ceil_log(D, p)
    loss = s + r * L
    e_t = _floor_log(max(D - 1, 1), p)
    guard = loss + r * e_t + 4
    wctx = ctx.with_precision(ctx.N + guard)
    gw = g.with_context(wctx)
    M = g.matrix()

    gt = g_tilde(gw, r)
    G = gt
    term = gt
    cap = iteration_cap(ctx.N, r, s, D, p)
    target = ctx.N + 1
    k = 0
    v = term.valuation()
    while v < target:
        if k >= cap:
            raise DivergenceDetected(f"phi-series term still has valuation {v} after {k} steps")
        term = term.phi()
        k += 1
        v = term.valuation()
        G = G + term
    for j in range(r + 1):
        dj = delta_j(gw, j)
        if any(x != 0 for x in dj):
            w = mat_vec(inverse_one_minus(mod_t, j), dj)
            G = G + _vector_series(gw, t_power_over_factorial(wctx, j, D), w)
    Gout = G.with_context(ctx)

    res_val, psi_ok, margin = inf, True, inf
    if check:
        res = Gout - Gout.phi() - g
        res_val = res.valuation()
        if res_val < ctx.N - loss:
            raise PrecisionExhausted(f"residual valuation {res_val} below N - loss = {ctx.N - loss}")
        psi_ok, margin = psi_check(G, ctx.N - loss, gw)
        if not psi_ok:
            raise PrecisionExhausted(f"psi(G) = G fails (margin {margin})")
    report = SolveReport(r=r, s=s, iterations=k, iteration_cap=cap, guard=guard, loss_bound=loss,
                         residual_valuation=res_val, psi_ok=psi_ok, psi_margin=margin,
                         last_term_valuation=v, D=D, N=ctx.N)
    return Gout, report


def solve_Eg(g: ModuleSeries, r: int | None = None) -> ModuleSeries:
    return solve(g, r)[0]


def psi_tail_valuations(p: int, D: int, Dout: int, modexp: int) -> list[int]:
    """For each output degree j < Dout, a lower bound for v([pi^j] psi(pi^m))
    over m >= D, read off the exact recurrence for m in [D, D + 2p)."""
    rows = K.psi_table(p, D, Dout, modexp, 2 * p)
    out = []
    for j in range(Dout):
        best = modexp
        for m in range(D, D + 2 * p):
            x = rows[m][j]
            if x:
                best = min(best, _vp_capped(x, p, modexp))
        out.append(best)
    return out


def _vp_capped(x: int, p: int, cap: int) -> int:
    v = 0
    while v < cap and x % p == 0:
        x //= p
        v += 1
    return v


def psi_check(G: ModuleSeries, prec: int, g: ModuleSeries | None = None) -> tuple[bool, float]:
    """psi(G) = G on the degrees psi can see, with a truncation-aware tolerance.

    If the source term g is given, the identity checked is psi(G) - G = psi(g),
    which is what (1 - phi) G = g forces; it reduces to psi(G) = G when g
    is exactly psi-free and absorbs the defect of a lifted low-precision g.

    Coefficient j of psi(G) depends on G beyond its degree cap; the missing
    part is bounded by the exact valuations of [pi^j] psi(pi^m), m >= D,
    plus the smallest coefficient valuation of G.  Returns (ok, margin)
    where margin is the worst excess of agreement over tolerance.
    """
    ctx, p, D = G.ctx, G.ctx.p, G.D
    PG = G.psi()
    Dout = PG.D
    vG = G.valuation()
    vG = 0 if vG == inf else min(vG, 0)
    Minv = mat_inv(G.matrix())
    vinv = min_val(Minv, p)
    vinv = 0 if vinv == inf else min(vinv, 0)
    tails = psi_tail_valuations(p, D, Dout, _round_exp(ctx.N + 8))
    # t-power parts of G have denominators growing like log_p(degree)
    creep = _floor_log(D + 2 * p, p) - _floor_log(max(D - 1, 1), p)
    diff = PG - G.truncate(Dout)
    if g is not None:
        diff = diff - g.with_context(ctx).psi().truncate(Dout)
    margin = inf
    for comp in diff.comps:
        vals = comp.valuations()
        for j in range(Dout):
            tol = min(prec, tails[j] + vG + vinv - 1 - 2 * creep)
            if tol <= 0:
                continue
            margin = min(margin, vals[j] - tol)
    return margin >= 0, margin


# -- twisting --------------------------------------------------------------

def tw(g: ModuleSeries, m: int) -> ModuleSeries:
    """partial^-m on each (psi = 0) component, moving to D_cris(T(twist + m))."""
    if m == 0:
        return g
    parts = g.psi_zero_parts()
    comps = [part.partial(-m).to_series(g.D) for part in parts]
    return ModuleSeries(g.module, comps, g.twist + m)


# -- tangent-space values --------------------------------------------------

@dataclass
class TangentVector:
    value: list
    level: int
    scaling_exponent: int = 0
    summands: dict = field(default_factory=dict)
    certified: float = inf

    def agreement(self, other: "TangentVector"):
        if other.level != self.level:
            raise LevelMismatch("tangent vectors at different levels")
        return min(a.agreement(b) for a, b in zip(self.value, other.value))

    def is_zero(self, prec=None) -> bool:
        return all(x.is_zero(prec) for x in self.value)

    def to_json(self) -> dict:
        return {"level": self.level, "scaling_exponent": self.scaling_exponent,
                "certified_digits": "inf" if self.certified == inf else self.certified,
                "value": [[str(c) for c in x.coordinates_fraction()] for x in self.value]}


def _apply_matrix_cyc(M: Matrix, vec: list) -> list:
    out = []
    for row in M:
        acc = CyclotomicElement.zero(vec[0].ctx, vec[0].n)
        for m, x in zip(row, vec):
            if m != 0:
                acc = acc + x.scale(m)
        out.append(acc)
    return out


def _mat_power(M: Matrix, k: int) -> Matrix:
    out = identity(len(M))
    for _ in range(k):
        out = mat_mul(out, M)
    return out


def theta_direct(g: ModuleSeries, n: int, guard: int | None = None) -> TangentVector:
    """G(zeta_{p^n} - 1) from the finite formula
    sum_{i=1}^n phi^(n-i)(g(zeta_{p^i} - 1)) + (1 - phi)^-1 phi^n(g(0)).

    g must be a polynomial in each component.  The level-i summand is kept
    in ``summands[i]`` (the constant term is folded into level 1).
    """
    if n < 1:
        raise LevelMismatch("theta needs n >= 1")
    ctx, p = g.ctx, g.ctx.p
    M = g.matrix()
    if guard is None:
        vM = min_val(M, p)
        guard = 4 + (n + 1) * max(0, -int(vM) if vM != inf else 0) + _inv_loss(M, p)
    wctx = ctx.with_precision(ctx.N + guard)
    gw = g.with_context(wctx)
    summands = {}
    total = [CyclotomicElement.zero(wctx, n) for _ in range(g.d)]
    for i in range(1, n + 1):
        vals = gw.eval_at_zeta(i, polynomial=True)
        vals = _apply_matrix_cyc(_mat_power(M, n - i), vals)
        summands[i] = vals
        total = [a + b.embed(n) for a, b in zip(total, vals)]
    g0 = [_frac(c.value_at_zero()) for c in gw.comps]
    const = mat_vec(mat_mul(mat_inv(mat_add(identity(g.d), mat_scale(M, -1))), _mat_power(M, n)), g0)
    const_cyc = [CyclotomicElement.constant(wctx, 1, x) for x in const]
    summands[1] = [a + b for a, b in zip(summands[1], const_cyc)]
    total = [a + b.embed(n) for a, b in zip(total, const_cyc)]
    out = TangentVector([_cyc_reprec(x, ctx) for x in total], n)
    out.summands = {i: [_cyc_reprec(x, ctx) for x in v] for i, v in summands.items()}
    return out


def _inv_loss(M: Matrix, p: int) -> int:
    try:
        v = min_val(mat_inv(mat_add(identity(len(M)), mat_scale(M, -1))), p)
    except Exception:
        return 0
    return 0 if v == inf else max(0, -int(v))


def eval_degree(ctx: PadicContext, r: int, s: int, n: int) -> int:
    """Degree cap that makes the level-1 evaluation of G good to N + slack digits."""
    p = ctx.p
    e_t = _floor_log((p - 1) * (ctx.N + 64), p)
    return (p - 1) * (ctx.N + r * (n - 1) + 2 * s + r * e_t + 12)


def theta_via_solver(g: ModuleSeries, n: int, method: str = "descent",
                     D_eval: int | None = None, r: int | None = None) -> TangentVector:
    """G(zeta_{p^n} - 1) computed from the series solution.

    ``method="direct"`` evaluates the degree-capped G at level n; its
    truncation tail (about D / ((p-1) p^(n-1)) digits) is recorded in
    ``certified``.  ``method="descent"`` solves at a degree cap large enough
    for an accurate level-1 value and climbs the tower with
    G(zeta_{p^i} - 1) = g(zeta_{p^i} - 1) + phi(G(zeta_{p^(i-1)} - 1)),
    which is the evaluation of G = g + phi(G) at zeta_{p^i} - 1.
    """
    if n < 1:
        raise LevelMismatch("theta needs n >= 1")
    ctx, p = g.ctx, g.ctx.p
    if method == "direct":
        G, _ = solve(g, r)
        vals = G.eval_at_zeta(n)
        return TangentVector(vals, n, certified=min(v.tail for v in vals))
    if method != "descent":
        raise DomainError(f"unknown method {method!r}")
    return theta_levels_via_solver(g, n, D_eval=D_eval, r=r)[-1]


def theta_levels_via_solver(g: ModuleSeries, n: int, D_eval: int | None = None,
                            r: int | None = None) -> list[TangentVector]:
    """Descent values G(zeta_{p^i} - 1) for i = 1..n from a single solve."""
    if n < 1:
        raise LevelMismatch("theta needs n >= 1")
    ctx, p = g.ctx, g.ctx.p
    mod_t = _twisted_module(g)
    if r is None:
        r = _default_r(g)
    s = constants(mod_t, r).s
    M = g.matrix()
    step_loss = max(0, -int(min_val(M, p)))
    climb_loss = (n - 1) * step_loss
    if D_eval is None:
        D_eval = max(g.D, eval_degree(ctx, r, s, n) + (p - 1) * climb_loss)
    wctx = ctx.with_precision(ctx.N + climb_loss + 4)
    parts = g.psi_zero_parts()
    big = ModuleSeries(g.module, [pt.to_series(D_eval) for pt in parts], g.twist).with_context(wctx)
    G, _ = solve(big, r)
    level = G.eval_at_zeta(1)
    certified = min(x.tail for x in level)
    out = [TangentVector([_cyc_reprec(x, ctx) for x in level], 1, certified=min(certified, ctx.N))]
    for i in range(2, n + 1):
        gi = big.eval_at_zeta(i, polynomial=True)
        lifted = _apply_matrix_cyc(M, [x.embed(i) for x in level])
        level = [a + b for a, b in zip(gi, lifted)]
        cert = min(certified - (i - 1) * step_loss, ctx.N)
        out.append(TangentVector([_cyc_reprec(x, ctx) for x in level], i, certified=cert))
    return out


def dual_eval(x: ModuleSeries, m: int, n: int) -> list[CyclotomicElement]:
    """Coefficients (partial^m x_i)(zeta_{p^n} - 1) / m! for n >= 1; for n = 0 the
    vector (partial^m x_i)(0) / m! with (1 - p^(m-1) phi^-1) applied to
    v_i t^m e_-m, i.e. the matrix 1 - p^-1 Phi^-1 on coefficients."""
    ctx, p = x.ctx, x.ctx.p
    if m < 0 or m > p - 2:
        raise DomainError("need 0 <= m <= p - 2")
    if n < 0:
        raise LevelMismatch("level must be >= 0")
    dx = x.partial(m).scale(Fraction(1, factorial(m)))
    if n >= 1:
        return dx.eval_at_zeta(n)
    c0 = [_frac(c.value_at_zero()) for c in dx.comps]
    A = mat_add(identity(x.d), mat_scale(mat_inv(x.matrix()), Fraction(-1, p)))
    return [CyclotomicElement.constant(ctx, 0, y) for y in mat_vec(A, c0)]


# -- identities ------------------------------------------------------------

def trace_identity_defect(g: ModuleSeries, n: int) -> float:
    """Valuation of Tr_{n+1/n} theta(g, n+1) - p phi theta(g, n) (inf when exact)."""
    ctx, p = g.ctx, g.ctx.p
    extra = 4 + 2 * max(0, -int(min_val(g.matrix(), p)))
    wide = g.with_context(ctx.with_precision(ctx.N + extra))
    up = theta_direct(wide, n + 1).value
    down = theta_direct(wide, n).value
    lhs = [x.trace_down() for x in up]
    rhs = _apply_matrix_cyc(mat_scale(g.matrix(), p), down)
    return min(_cyc_reprec(a - b, ctx).valuation() for a, b in zip(lhs, rhs))


@dataclass
class ValuationBoundReport:
    ok: bool
    per_level: dict


def valuation_bound_check(g: ModuleSeries, n: int, r: int | None = None) -> ValuationBoundReport:
    """Level-i part of theta_direct(g, n) lies in p^(-s1 + r(i - n)) times the
    lattice for i >= 2, and in p^(-s1 - s2 - r n) times it for i = 1."""
    mod_t = _twisted_module(g)
    c = constants(mod_t, r if r is not None else _default_r(g))
    th = theta_direct(g, n)
    per = {}
    ok = True
    for i, vec in th.summands.items():
        bound = -c.s1 + c.r * (i - n) if i >= 2 else -c.s1 - c.s2 - c.r * n
        v = min(x.valuation() for x in vec)
        per[i] = (v, bound)
        if v < bound:
            ok = False
    # the summands must recombine to the full value
    return ValuationBoundReport(ok, per)


def instance_from_json(doc) -> tuple[DieudonneModule, ModuleSeries]:
    """{"module": <module doc>, "g": [{exponent: coeff}, ...], "N":, "D":}"""
    if isinstance(doc, str):
        doc = json.loads(doc)
    mdoc = doc["module"]
    ctx = PadicContext(int(mdoc["p"]), int(doc.get("N", 64)), degree_cap=doc.get("D"))
    module = DieudonneModule.from_json(mdoc, ctx)
    parts = [{int(k): Fraction(v) for k, v in comp.items()} for comp in doc["g"]]
    return module, ModuleSeries.from_psi_zero(module, parts, ctx)
