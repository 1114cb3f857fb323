"""Wach-module matrices: the matrix P of phi on a lifted basis and the change
of basis M solving P M = phi(M) A.

Matrices of series are plain lists of lists of PowerSeries.  A = diag(p^-r_i) A0
is the matrix of phi on D_cris, and

    P = diag(mu^(r_d - r_i) q^(-r_i)) A0,   P^-1 = A0^-1 diag(mu^(r_i - r_d) q^(r_i)),

with q = phi(pi)/pi and mu = p / (q - pi^(p-1)).  Only P^-1 is ever built as a
series matrix; it is integral, while P is not.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, inf

from .dieudonne import fval, identity, mat_inv, mat_mul, min_val, _det, _to_fraction
from .errors import DivergenceDetected, DomainError, NotInvertible, PrecisionExhausted
from .iwasawa import IwasawaElement, mellin_inv_mod
from .padic import PadicContext, PadicScalar
from .series import PowerSeries, PsiZeroSeries
from .solver import ceil_log

SeriesMatrix = list[list[PowerSeries]]


@dataclass(frozen=True)
class WachData:
    ctx: PadicContext
    A0: tuple
    weights: tuple

    @classmethod
    def build(cls, ctx: PadicContext, A0, weights, strict: bool = True) -> "WachData":
        """Validate (A0, weights).  ``strict=False`` skips the admissibility
        checks so that data not coming from a Wach module can be fed to the
        solver (which then reports divergence)."""
        ctx.require_nu1("Wach matrices")
        A0 = tuple(tuple(_to_fraction(ctx, x) for x in row) for row in A0)
        weights = tuple(int(w) for w in weights)
        d = len(A0)
        if d == 0 or any(len(row) != d for row in A0) or len(weights) != d:
            raise DomainError("A0 must be square and match the number of weights")
        if strict:
            p = ctx.p
            if list(weights) != sorted(weights) or weights[0] != 0:
                raise DomainError("weights must be sorted with r_1 = 0")
            if weights[-1] > p - 1:
                raise DomainError("weights must be <= p - 1")
            if min_val(A0, p) < 0:
                raise DomainError("A0 must be integral")
            if fval(_det(A0), p) != 0:
                raise NotInvertible("A0 is not invertible over Z_p")
        return cls(ctx, A0, weights)

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def d(self) -> int:
        return len(self.weights)

    @property
    def r_d(self) -> int:
        return max(self.weights)

    def A(self) -> list[list[Fraction]]:
        p = self.p
        return [[Fraction(1, p ** w) * x if w >= 0 else p ** (-w) * x for x in row]
                for w, row in zip(self.weights, self.A0)]

    def P_inverse(self, D: int, ctx: PadicContext | None = None) -> SeriesMatrix:
        """A0^-1 diag(mu^(r_i - r_d) q^(r_i)); raises if some entry is not integral."""
        ctx = ctx or self.ctx
        p, rd = self.p, self.r_d
        q = PowerSeries.q_n(ctx, 1, D)
        q_minus = list(q.c)
        if p - 1 < D:
            q_minus[p - 1] -= 1
        mu_inv = PowerSeries(ctx, [Fraction(x, p) for x in q_minus], 0, D)
        diag = []
        for w in self.weights:
            e = rd - w
            base = mu_inv ** e if e >= 0 else PowerSeries.mu(ctx, D) ** (-e)
            diag.append(base * (q ** w if w >= 0 else q.inverse() ** (-w)))
        A0inv = mat_inv(self.A0)
        out = [[diag[j].scale(A0inv[i][j]) for j in range(self.d)] for i in range(self.d)]
        if any(e.valuation() < 0 for row in out for e in row):
            raise DomainError("P^-1 is not integral for this data")
        return out

    def to_json(self) -> dict:
        return {"A0": [[str(x) for x in row] for row in self.A0], "weights": list(self.weights)}

    @classmethod
    def from_json(cls, ctx: PadicContext, doc: dict, strict: bool = True) -> "WachData":
        return cls.build(ctx, [[Fraction(x) for x in row] for row in doc["A0"]], doc["weights"], strict)


# -- series matrix helpers -------------------------------------------------

def _zero(ctx, D):
    return PowerSeries.zero(ctx, D)


def series_identity(ctx: PadicContext, d: int, D: int) -> SeriesMatrix:
    return [[PowerSeries.constant(ctx, 1 if i == j else 0, D) for j in range(d)] for i in range(d)]


def smat_mul(X: SeriesMatrix, Y: SeriesMatrix) -> SeriesMatrix:
    n, m, k = len(X), len(Y[0]), len(Y)
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = X[i][0] * Y[0][j]
            for t in range(1, k):
                acc = acc + X[i][t] * Y[t][j]
            row.append(acc)
        out.append(row)
    return out


def smat_times_const(X: SeriesMatrix, C) -> SeriesMatrix:
    """X C with C a matrix of rationals."""
    n, k, m = len(X), len(C), len(C[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = None
            for t in range(k):
                if C[t][j] != 0:
                    term = X[i][t].scale(C[t][j])
                    acc = term if acc is None else acc + term
            row.append(acc if acc is not None else _zero(X[i][0].ctx, X[i][0].D))
        out.append(row)
    return out


def const_times_smat(C, X: SeriesMatrix) -> SeriesMatrix:
    return [list(r) for r in zip(*smat_times_const([list(c) for c in zip(*X)], [list(c) for c in zip(*C)]))]


def smat_phi(X: SeriesMatrix) -> SeriesMatrix:
    return [[e.phi() for e in row] for row in X]


def smat_sub(X: SeriesMatrix, Y: SeriesMatrix) -> SeriesMatrix:
    return [[a - b for a, b in zip(r, s)] for r, s in zip(X, Y)]


def smat_valuation(X: SeriesMatrix):
    return min(e.valuation() for row in X for e in row)


def smat_truncate(X: SeriesMatrix, D: int) -> SeriesMatrix:
    return [[e.truncate(D) for e in row] for row in X]


def smat_with_context(X: SeriesMatrix, ctx: PadicContext) -> SeriesMatrix:
    return [[PowerSeries._raw(ctx, [c % ctx.p ** (ctx.N + e.shift) for c in e.c], e.shift) for e in row]
            for row in X]


def smat_pi_order(X: SeriesMatrix):
    return min(e.pi_order() for row in X for e in row)


# -- solving P M = phi(M) A --------------------------------------------------

@dataclass
class WachReport:
    iterations: int
    iteration_cap: int
    residual_valuation: float
    congruence_order: float
    congruence_ok: bool
    loss_bound: int
    D: int
    N: int

    def to_json(self) -> dict:
        def enc(x):
            return "inf" if x == inf else x
        return {"iterations": self.iterations, "iteration_cap": self.iteration_cap,
                "residual_valuation": enc(self.residual_valuation),
                "congruence_order": enc(self.congruence_order),
                "congruence_ok": self.congruence_ok,
                "loss_bound": self.loss_bound, "D": self.D, "N": self.N}


def wach_loss(w: WachData, D: int) -> int:
    """Bound for the denominators of M below degree D."""
    return w.r_d * (ceil_log(max(D, 2), w.p) + 1)


def residual(w: WachData, M: SeriesMatrix) -> SeriesMatrix:
    """diag(mu^(r_d - r_i)) A0 M - diag(q^(r_i)) phi(M) A, i.e. diag(q^(r_i)) (P M - phi(M) A)."""
    ctx, D, p, rd = M[0][0].ctx, M[0][0].D, w.p, w.r_d
    mu = PowerSeries.mu(ctx, D)
    q = PowerSeries.q_n(ctx, 1, D)
    lhs = const_times_smat(w.A0, M)
    lhs = [[e * mu ** (rd - wt) for e in row] for wt, row in zip(w.weights, lhs)]
    rhs = smat_times_const(smat_phi(M), w.A())
    rhs = [[e * q ** wt for e in row] for wt, row in zip(w.weights, rhs)]
    return smat_sub(lhs, rhs)


def solve_M(w: WachData, pi_target: int | None = None, check: bool = True) -> tuple[SeriesMatrix, WachReport]:
    """Fixed point of M -> P^-1 phi(M) A starting from the identity.

    Stops once two successive iterates agree mod (pi^pi_target, p^N).
    Iterates whose denominators outgrow the a priori bound, or that fail to
    settle within the cap, raise DivergenceDetected.  The degree-i part of
    the map is p^i times conjugation by A, so data where A has eigenvalues
    far apart in valuation can diverge even if a solution exists.

    The report records the pi-order of M - I and whether it reaches r_d.
    Only M = I mod pi is enforced: a rank-one block of weight r contributes
    (t/pi)^r, which is 1 - r pi/2 modulo pi^2.
    """
    ctx, p = w.ctx, w.p
    D = ctx.D if pi_target is None else pi_target
    if D > ctx.D:
        raise DomainError("pi_target exceeds the degree cap")
    loss = wach_loss(w, D)
    wctx = ctx.with_precision(ctx.N + 2 * loss + 4).with_degree(D)
    Pinv = w.P_inverse(D, wctx)
    A = w.A()
    cap = 2 * (ctx.N + loss) + ceil_log(max(D, 2), p) + 16
    M = series_identity(wctx, w.d, D)
    k = 0
    while True:
        if k >= cap:
            raise DivergenceDetected(f"no agreement after {k} iterations")
        Mn = smat_times_const(smat_mul(Pinv, smat_phi(M)), A)
        k += 1
        v = smat_valuation(Mn)
        if v < -2 * loss:
            raise DivergenceDetected(f"denominators reached p^{-v} at iteration {k}")
        if smat_valuation(smat_sub(Mn, M)) >= ctx.N + loss:
            M = Mn
            break
        M = Mn
    Mout = smat_with_context(M, ctx.with_degree(D))
    res_val = inf
    cong = smat_pi_order(smat_sub(Mout, series_identity(Mout[0][0].ctx, w.d, D)))
    if check:
        res_val = smat_valuation(residual(w, Mout))
        if res_val < ctx.N - loss:
            raise PrecisionExhausted(f"residual valuation {res_val} below N - loss = {ctx.N - loss}")
        if cong < 1:
            raise PrecisionExhausted("M is not congruent to I modulo pi")
    report = WachReport(k, cap, res_val, cong, cong >= w.r_d, loss, D, ctx.N)
    return Mout, report


def first_iterate(w: WachData, D: int | None = None) -> SeriesMatrix:
    """M_1 = P^-1 A."""
    D = w.ctx.D if D is None else D
    return smat_times_const(w.P_inverse(D), w.A())


# -- M_log,n and its divisibility ---------------------------------------------

def _fold_mod_phi_pi(f: PowerSeries) -> dict[int, int]:
    """Exponent classes mod p of the truncated polynomial f in the (1+pi)-basis."""
    p, mod = f.p, f.modulus
    out: dict[int, int] = {}
    for j in range(f.D):
        b = sum(f.c[k] * comb(k, j) * (-1 if (k - j) % 2 else 1) for k in range(j, f.D) if f.c[k])
        if b % mod:
            out[j % p] = (out.get(j % p, 0) + b) % mod
    return out


def m_log_n(M: SeriesMatrix, n: int) -> list[list[IwasawaElement]]:
    """Entrywise inverse Mellin transform of (1 + pi) phi^n(M), modulo omega_{n,0}.

    phi^n(M) modulo phi^(n+1)(pi) only sees M modulo phi(pi), and the
    truncation of M at degree D leaves about D/p digits of that class; the
    result carries the context precision reduced accordingly.
    """
    ctx = M[0][0].ctx
    p, D = ctx.p, M[0][0].D
    shift = max(e.shift for row in M for e in row)
    digits = min(ctx.N, D // p - shift)
    if digits <= 0:
        raise PrecisionExhausted("degree cap too small for M modulo phi(pi)")
    lctx = ctx.with_precision(digits)
    out = []
    for row in M:
        out_row = []
        for e in row:
            folded = _fold_mod_phi_pi(e)
            terms = {1 + r * p ** n: a for r, a in folded.items()}
            h = PsiZeroSeries(lctx, terms, e.shift)
            out_row.append(mellin_inv_mod(h, n))
        out.append(out_row)
    return out


def _derivatives_at_zero(X: PowerSeries, kmax: int) -> list[PadicScalar]:
    out = []
    cur = X
    for _ in range(kmax + 1):
        out.append(cur.value_at_zero())
        cur = cur.partial(1)
    return out


def cor43_check(M: SeriesMatrix, n: int, r_d: int) -> bool:
    """omega_{n-1,m} divides M_log,n - I for every m < r_d.

    On the Mellin side this asks that partial^m((1 + pi) phi^n(X)), X = M - I,
    vanish at zeta_{p^j} - 1 for j = 1..n.  Since partial^m((1 + pi) Y) is
    (1 + pi)(1 + partial)^m Y and partial^k phi^n = p^(nk) phi^n partial^k,
    that value is zeta_{p^j} sum_k C(m, k) p^(nk) (partial^k X)(0) for
    every j <= n.
    """
    ctx = M[0][0].ctx
    if n < 1:
        raise DomainError("cor43_check needs n >= 1")
    if n > ctx.tower_cap:
        raise DomainError(f"level {n} exceeds the tower cap {ctx.tower_cap}")
    if r_d <= 0:
        return True
    p, d = ctx.p, len(M)
    for i in range(d):
        for j in range(d):
            X = M[i][j] - (1 if i == j else 0)
            ders = _derivatives_at_zero(X, r_d - 1)
            for m in range(r_d):
                val = PadicScalar.zero(ctx)
                for k in range(m + 1):
                    val = val + ders[k] * (comb(m, k) * p ** (n * k))
                if not val.is_zero():
                    return False
    return True
