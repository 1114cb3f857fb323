"""Polynomials in gamma - 1 over Z_p, the Mellin transform and the
divisibility criteria on the Mellin side.

Only the principal Delta-component is modelled: gamma generates
Gal(F_inf/F_1) and acts on power series through pi -> (1+pi)^u - 1, so the
Mellin transform of gamma^a is (1+pi)^(u^a).  With u an integer the
transform of a polynomial is an exact finite sum in the (1+pi)^i basis.

Divisibility follows the usual convention: d divides f when f = d h.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, inf

from . import _kernel as K
from .cyclotomic import CyclotomicElement, degree as cyc_degree
from .errors import CapExceeded, DomainError, LevelMismatch, NotInvertible, PrecisionExhausted
from .padic import PadicContext, PadicScalar, padic_log_unit, vp, _floor_log
from .series import PowerSeries, PsiZeroSeries, fixed_scalar


def _trim(c: list[int]) -> list[int]:
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


class IwasawaElement:
    """sum_k c_k (gamma - 1)^k, stored as integers with a common p-power shift.

    ``modulus`` is ``None`` or a pair ``(n, m)`` meaning the element is a
    remainder modulo omega_{n,m}.
    """

    __slots__ = ("ctx", "c", "shift", "modulus")

    def __init__(self, ctx: PadicContext, coeffs, shift: int = 0, modulus=None):
        ctx.require_nu1("IwasawaElement")
        mod = ctx.p ** (ctx.N + shift)
        c = _trim([int(x) % mod for x in coeffs] or [0])
        if modulus is not None and len(c) > ctx.p ** modulus[0]:
            raise DomainError("reduced element must have degree < p^n")
        self.ctx = ctx
        self.c = c
        self.shift = shift
        self.modulus = modulus
        p = ctx.p
        while self.shift > 0 and all(x % p == 0 for x in self.c):
            self.c = [x // p for x in self.c]
            self.shift -= 1

    # -- constructors ----------------------------------------------------
    @classmethod
    def from_values(cls, ctx, values, modulus=None):
        pairs = [fixed_scalar(ctx, v) for v in values]
        s = max((sh for _, sh in pairs), default=0)
        return cls(ctx, [c * ctx.p ** (s - sh) for c, sh in pairs], s, modulus)

    @classmethod
    def one(cls, ctx):
        return cls(ctx, [1])

    @classmethod
    def gamma_minus_one(cls, ctx):
        return cls(ctx, [0, 1])

    @classmethod
    def from_gamma_powers(cls, ctx, terms: dict, shift: int = 0, modulus=None):
        """sum_a b_a gamma^a for integers a >= 0."""
        top = max(terms, default=0)
        out = [0] * (top + 1)
        for a, b in terms.items():
            if a < 0:
                raise DomainError("negative powers of gamma are not polynomials")
            for k in range(a + 1):
                out[k] += b * comb(a, k)
        return cls(ctx, out, shift, modulus)

    # -- accessors -------------------------------------------------------
    @property
    def p(self):
        return self.ctx.p

    @property
    def degree(self) -> int:
        return len(self.c) - 1

    @property
    def mod(self) -> int:
        return self.ctx.p ** (self.ctx.N + self.shift)

    def coefficient(self, k: int) -> PadicScalar:
        x = self.c[k] if k < len(self.c) else 0
        if x == 0:
            return PadicScalar.zero(self.ctx)
        return PadicScalar.from_parts(self.ctx, -self.shift, x, self.ctx.N + self.shift)

    def coefficients_fraction(self) -> list[Fraction]:
        m = self.mod
        return [Fraction(x - m if x > m // 2 else x, self.p ** self.shift) for x in self.c]

    def valuation(self):
        vals = [vp(x, self.p) for x in self.c if x]
        return min(vals) - self.shift if vals else inf

    def is_zero(self, prec: int | None = None) -> bool:
        return self.valuation() >= (self.ctx.N if prec is None else prec)

    def gamma_power_coefficients(self) -> dict:
        """{a: b_a} with self = sum_a b_a gamma^a (same shift as self)."""
        mod = self.mod
        out = {}
        n = len(self.c)
        for a in range(n):
            b = 0
            for k in range(a, n):
                if self.c[k]:
                    b += self.c[k] * comb(k, a) * (-1 if (k - a) % 2 else 1)
            b %= mod
            if b:
                out[a] = b
        return out

    # -- arithmetic ------------------------------------------------------
    def _aligned(self, other):
        if not isinstance(other, IwasawaElement):
            other = IwasawaElement.from_values(self.ctx, [other])
        s = max(self.shift, other.shift)
        p = self.p
        a = [x * p ** (s - self.shift) for x in self.c]
        b = [x * p ** (s - other.shift) for x in other.c]
        n = max(len(a), len(b))
        a += [0] * (n - len(a))
        b += [0] * (n - len(b))
        return a, b, s, other

    def _join_modulus(self, other):
        if self.modulus is not None and other.modulus is not None and self.modulus != other.modulus:
            raise LevelMismatch("elements are reduced modulo different ideals")
        return self.modulus if self.modulus is not None else other.modulus

    def __add__(self, other):
        a, b, s, other = self._aligned(other)
        return IwasawaElement(self.ctx, [x + y for x, y in zip(a, b)], s, self._join_modulus(other))

    __radd__ = __add__

    def __neg__(self):
        return IwasawaElement(self.ctx, [-x for x in self.c], self.shift, self.modulus)

    def __sub__(self, other):
        a, b, s, other = self._aligned(other)
        return IwasawaElement(self.ctx, [x - y for x, y in zip(a, b)], s, self._join_modulus(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, x) -> "IwasawaElement":
        c, s = fixed_scalar(self.ctx, x)
        return IwasawaElement(self.ctx, [y * c for y in self.c], self.shift + s, self.modulus)

    def __mul__(self, other):
        if not isinstance(other, IwasawaElement):
            return self.scale(other)
        modulus = self._join_modulus(other)
        shift = self.shift + other.shift
        mod = self.ctx.p ** (self.ctx.N + shift)
        n = len(self.c) + len(other.c) - 1
        prod = IwasawaElement(self.ctx, K.mul_trunc(self.c, other.c, n, mod), shift)
        if modulus is not None:
            return prod.reduce(*modulus)
        return prod

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, (IwasawaElement, int, Fraction, PadicScalar)):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def divmod(self, d: "IwasawaElement") -> tuple["IwasawaElement", "IwasawaElement"]:
        """Euclidean division by d, whose leading coefficient must be a unit."""
        p = self.p
        if d.shift:
            raise NotInvertible("divisor must have integral coefficients")
        lead = d.c[-1]
        if lead % p == 0:
            raise NotInvertible("divisor leading coefficient is not a unit")
        mod = self.mod
        inv = pow(lead, -1, mod)
        r = list(self.c)
        dd = len(d.c) - 1
        q = [0] * max(1, len(r) - dd)
        for k in range(len(r) - 1, dd - 1, -1):
            coef = r[k] * inv % mod
            if coef:
                q[k - dd] = coef
                for i, x in enumerate(d.c):
                    r[k - dd + i] = (r[k - dd + i] - coef * x) % mod
        return (IwasawaElement(self.ctx, q, self.shift),
                IwasawaElement(self.ctx, r[:max(dd, 1)], self.shift))

    def reduce(self, n: int, m: int = 0) -> "IwasawaElement":
        """Remainder modulo omega_{n,m}."""
        _, r = self.divmod(distinguished(self.ctx, "omega", n, m))
        return IwasawaElement(self.ctx, r.c, r.shift, (n, m))

    def lift(self) -> "IwasawaElement":
        """Forget the declared modulus (the polynomial itself is unchanged)."""
        return IwasawaElement(self.ctx, self.c, self.shift)

    def twist(self, m: int) -> "IwasawaElement":
        """f(u^m gamma)."""
        mod = self.mod
        w = pow(self.ctx.u, m, mod)
        lin = [(w - 1) % mod, w % mod]
        acc = [0]
        for ck in reversed(self.c):
            acc = K.mul_trunc(acc, lin, len(acc) + 1, mod)
            acc[0] = (acc[0] + ck) % mod
        return IwasawaElement(self.ctx, acc, self.shift)

    def divides_exactly(self, f: "IwasawaElement") -> bool:
        """True if self divides f in the polynomial ring (remainder zero)."""
        _, r = f.divmod(self)
        return r.is_zero()

    def __repr__(self):
        terms = [f"{a}*X^{k}" for k, a in enumerate(self.coefficients_fraction()) if a]
        tag = "" if self.modulus is None else f" mod omega{self.modulus}"
        return f"Iwasawa({' + '.join(terms) or '0'}{tag})"


def _check_degree(ctx: PadicContext, deg: int):
    if deg > ctx.D:
        raise CapExceeded(f"degree {deg} exceeds the degree cap {ctx.D}")


def distinguished(ctx: PadicContext, kind: str, n: int, m: int = 0) -> IwasawaElement:
    """omega_{n,m} = (u^-m gamma)^(p^n) - 1 or Phi_{n,m} = Phi_{p^n}(u^-m gamma),
    expanded in gamma - 1.  Phi_{0,m} is u^-m gamma - 1."""
    p = ctx.p
    if n < 0:
        raise LevelMismatch("level must be >= 0")
    mod = ctx.pN
    w = pow(ctx.u, -m, mod)
    if kind == "omega":
        e = p ** n
        _check_degree(ctx, e)
        we = pow(w, e, mod)
        c = [we * comb(e, k) for k in range(e + 1)]
        c[0] -= 1
        return IwasawaElement(ctx, c)
    if kind == "phi_cyc":
        if n == 0:
            return IwasawaElement(ctx, [w - 1, w])
        step = p ** (n - 1)
        _check_degree(ctx, (p - 1) * step)
        c = [0] * ((p - 1) * step + 1)
        for a in range(p):
            e = a * step
            wa = pow(w, e, mod)
            for k in range(e + 1):
                c[k] += wa * comb(e, k)
        return IwasawaElement(ctx, c)
    raise DomainError(f"unknown distinguished polynomial {kind!r}")


# -- Mellin transform ------------------------------------------------------

def mellin(f: IwasawaElement) -> PsiZeroSeries:
    """f . (1 + pi): gamma^a contributes (1 + pi)^(u^a)."""
    ctx = f.ctx
    u = ctx.u
    terms = {u ** a: b for a, b in f.gamma_power_coefficients().items()}
    return PsiZeroSeries(ctx, terms, f.shift)


def _principal_log_table(ctx: PadicContext, n: int) -> dict:
    """i mod p^(n+1) -> a mod p^n with u^a = i."""
    p = ctx.p
    M = p ** (n + 1)
    table = {}
    x = 1
    for a in range(p ** n):
        table[x] = a
        x = x * ctx.u % M
    return table


def mellin_inv_mod(h, n: int) -> IwasawaElement:
    """The f modulo omega_{n,0} with mellin(f) = h modulo phi^(n+1)(pi).

    The (1+pi)^i components of h are read modulo p^(n+1); the principal
    component consists of the classes i = 1 mod p, each equal to u^a for a
    unique a mod p^n, which makes the linear system a permutation.  A
    ``PowerSeries`` argument is read as the polynomial given by its
    truncation.
    """
    if n < 0:
        raise LevelMismatch("level must be >= 0")
    if isinstance(h, PowerSeries):
        ctx = h.ctx
        mod = h.modulus
        # pi-basis -> (1+pi)-basis, exact for the truncated polynomial
        raw = {}
        for j in range(h.D):
            b = sum(h.c[k] * comb(k, j) * (-1 if (k - j) % 2 else 1) for k in range(j, h.D) if h.c[k])
            if b % mod:
                raw[j] = b % mod
        terms, shift = raw, h.shift
    else:
        ctx, terms, shift = h.ctx, h.terms, h.shift
    p = ctx.p
    _check_degree(ctx, p ** n)
    M = p ** (n + 1)
    mod = p ** (ctx.N + shift)
    folded: dict[int, int] = {}
    for i, a in terms.items():
        folded[i % M] = (folded.get(i % M, 0) + a) % mod
    table = _principal_log_table(ctx, n)
    out = {}
    for r, a in folded.items():
        if not a:
            continue
        if r % p != 1 % p or r not in table:
            raise NotInvertible(f"(1+pi)^{r} lies outside the principal component")
        out[table[r]] = a
    f = IwasawaElement.from_gamma_powers(ctx, out, shift)
    return IwasawaElement(ctx, f.c, f.shift, (n, 0))


# -- character evaluation --------------------------------------------------

@dataclass(frozen=True)
class Ell:
    """The element ell_i = log(gamma)/log(u) - i; only its values are ever computed."""

    i: int


def _cyclotomic_log(ctx: PadicContext, y: CyclotomicElement) -> CyclotomicElement:
    """log(y) for y in 1 + (zeta - 1), as log(y^(p^s)) / p^s by the Mercator series.

    Raising to p^s first pushes the argument deep into 1 + pZ_p[zeta], so the
    series needs roughly N terms instead of e N.
    """
    p, level = ctx.p, y.n
    x = y - 1
    if sum(x.c) % p and x.shift == 0:
        raise DomainError("log series diverges: argument is not a principal unit")
    s = level + 1
    target = ctx.N + 2 + s
    extra = _floor_log(8 * target, p) + 2
    wctx = ctx.with_precision(target + extra)
    z = CyclotomicElement(wctx, level, y.c, y.shift)
    for _ in range(s):
        base, acc_pow, e = z, None, p
        while e:
            if e & 1:
                acc_pow = base if acc_pow is None else acc_pow * base
            e >>= 1
            if e:
                base = base * base
        z = acc_pow
    xw = z - 1
    if xw.is_zero(target + extra):
        return CyclotomicElement.zero(ctx, level)
    v = max(Fraction(1, cyc_degree(p, level)), Fraction(xw.valuation()))
    kmax = 1
    while kmax * v - _floor_log(kmax, p) <= target + 1:
        kmax += 1
    acc = CyclotomicElement.zero(wctx, level)
    power = CyclotomicElement.constant(wctx, level, 1)
    for k in range(1, kmax + 1):
        power = power * xw
        acc = acc + power.scale(Fraction(1 if k % 2 else -1, k))
    acc = acc.scale(Fraction(1, p ** s))
    return CyclotomicElement(ctx, level, [c % p ** (ctx.N + acc.shift) for c in acc.c], acc.shift)


def char_eval(f, m: int, j: int) -> CyclotomicElement:
    """Substitute gamma = u^m zeta_{p^j} into an IwasawaElement or an ``Ell``."""
    if j < 0:
        raise LevelMismatch("level must be >= 0")
    if isinstance(f, Ell):
        raise TypeError("use char_eval_ell(ctx, ell, m, j) for logarithms")
    ctx = f.ctx
    mod = f.mod
    w = pow(ctx.u, m, mod)
    terms = {a: b * pow(w, a, mod) for a, b in f.gamma_power_coefficients().items()}
    return CyclotomicElement.from_zeta_powers(ctx, j, terms, f.shift)


def char_eval_ell(ctx: PadicContext, ell: Ell, m: int, j: int) -> CyclotomicElement:
    """ell_i(u^m zeta_{p^j}) computed through the logarithm series."""
    if j < 0:
        raise LevelMismatch("level must be >= 0")
    ctx.require_nu1("char_eval_ell")
    wctx = ctx.with_precision(ctx.N + 2)
    y = CyclotomicElement.zeta_power(wctx, j, 1).scale(pow(ctx.u, m, wctx.pN))
    L = _cyclotomic_log(wctx, y)
    logu = padic_log_unit(PadicScalar.from_int(wctx, ctx.u))
    val = L.scale(logu.inverse()) - ell.i
    return CyclotomicElement(ctx, j, [c % ctx.p ** (ctx.N + val.shift) for c in val.c], val.shift)


# -- divisibility ----------------------------------------------------------

def divisibility_test(f, n: int, m: int = 0) -> bool:
    """Does omega_{n-1,m} divide f?

    Checks that partial^m of the Mellin transform vanishes at zeta_{p^j} - 1
    for 1 <= j <= n.  ``f`` may be an IwasawaElement or directly a
    PsiZeroSeries on the Mellin side.
    """
    h = mellin(f) if isinstance(f, IwasawaElement) else f
    ctx = h.ctx
    if n < 1:
        raise LevelMismatch("divisibility_test needs n >= 1")
    if n > ctx.tower_cap:
        raise CapExceeded(f"level {n} exceeds the tower cap {ctx.tower_cap}")
    g = h.partial(m)
    if ctx.N <= 0:
        raise PrecisionExhausted("no p-adic digits available")
    for j in range(1, n + 1):
        val = CyclotomicElement.from_zeta_powers(ctx, j, g.terms, g.shift)
        if not val.is_zero():
            return False
    return True


# -- the logarithm acting on the Mellin side --------------------------------

def gamma_action(h: PowerSeries) -> PowerSeries:
    """h(pi) -> h((1+pi)^u - 1)."""
    ctx = h.ctx
    N = ctx.N + h.shift
    R = -(-N // 16) * 16
    base = tuple(comb(ctx.u, i) if i else 0 for i in range(h.D))
    rows, nb = K.compose_rows(ctx.p, h.D, R, base)
    out = K.linear_combination(h.c, rows, nb, h.D, ctx.p ** N)
    return PowerSeries._raw(ctx, out, h.shift)


def ell_action(h: PowerSeries, m: int) -> PowerSeries:
    """ell_m acting on a power series: log(gamma)/log(u) - m, summed as the
    operator series sum (-1)^(k+1) (gamma - 1)^k / k until the terms are
    below precision."""
    ctx = h.ctx
    p = ctx.p
    guard = 4 + _floor_log(8 * (ctx.N + h.D), p)
    wctx = ctx.with_precision(ctx.N + guard)
    x = PowerSeries(wctx, h.c, h.shift, h.D)
    acc = PowerSeries.zero(wctx, h.D)
    term = x
    k = 0
    while True:
        k += 1
        term = gamma_action(term) - term
        v = term.valuation()
        # later terms are images under an integral operator, so they stay at
        # least this small; only the division by k can cost digits
        if v >= ctx.N + 2 + _floor_log(2 * k, p):
            break
        acc = acc + term.scale(Fraction(1 if k % 2 else -1, k))
        if k > 50 * (ctx.N + h.D):
            raise PrecisionExhausted("logarithm of the Gamma-action failed to converge")
    logu = padic_log_unit(PadicScalar.from_int(wctx, ctx.u))
    res = acc.scale(logu.inverse()) - x.scale(m)
    return PowerSeries(ctx, [c % p ** (ctx.N + res.shift) for c in res.c], res.shift, h.D)


def nabla(h: PowerSeries, m: int) -> PowerSeries:
    """t partial - m, truncated one degree below the input."""
    ctx = h.ctx
    D = h.D - 1
    t = PowerSeries.log_one_plus_pi(ctx, D)
    return t * h.partial(1).truncate(D) - h.truncate(D).scale(m)


# -- lemmas ----------------------------------------------------------------

@dataclass
class A2Report:
    is_constant: bool
    in_one_plus_pn: bool
    delta: PadicScalar
    expected: PadicScalar | None

    @property
    def ok(self) -> bool:
        return self.is_constant and self.in_one_plus_pn


def lemma_A2_check(ctx: PadicContext, k: int, i: int, n: int, j: int) -> A2Report:
    """Reduce Phi_{k,i}/p modulo omega_{n,j} and inspect the remainder."""
    if k < n + 1:
        raise DomainError("needs k >= n + 1")
    if ctx.N - 1 <= n:
        raise PrecisionExhausted("precision too low to resolve 1 + p^n Z_p")
    phi = distinguished(ctx, "phi_cyc", k, i)
    _, r = phi.divmod(distinguished(ctx, "omega", n, j))
    r = r.scale(Fraction(1, ctx.p))
    prec = ctx.N - 1
    is_const = all(vp(x, ctx.p) - r.shift >= prec for x in r.c[1:] if x)
    # dividing by p leaves N - 1 absolute digits
    delta = PadicScalar.from_parts(ctx, -r.shift, r.c[0], prec + r.shift) if r.c[0] else PadicScalar.zero(ctx)
    diff = delta - 1
    in_one = diff.is_zero() or diff.valuation() >= n
    expected = None
    if i != j:
        # (alpha^(p^k) - 1) / (p (alpha^(p^(k-1)) - 1)) with alpha = u^(j-i)
        alpha = Fraction(ctx.u) ** (j - i)
        num = alpha ** (ctx.p ** k) - 1
        den = ctx.p * (alpha ** (ctx.p ** (k - 1)) - 1)
        expected = PadicScalar.from_fraction(ctx, num / den)
    else:
        expected = PadicScalar.from_int(ctx, 1)
    return A2Report(is_const, in_one, delta, expected)


@dataclass
class A3Report:
    values: list
    expected: int
    ok: bool


def lemma_A3_check(ctx: PadicContext, i: int, j: int, n: int) -> A3Report:
    """ell_i evaluated at u^j zeta_{p^l} equals j - i for every l <= n."""
    vals = []
    ok = True
    for level in range(n + 1):
        v = char_eval_ell(ctx, Ell(i), j, level)
        vals.append(v)
        if not (v - (j - i)).is_zero(ctx.N - 2):
            ok = False
    return A3Report(vals, j - i, ok)
