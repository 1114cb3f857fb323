"""Fixed-precision p-adic scalars over Z_p and its unramified extensions.

A nonzero scalar is stored as ``p**val * unit`` where ``unit`` is a unit of
the unramified ring known modulo ``p**prec`` (relative precision).  Elements
of the unramified ring of degree nu are tuples of nu integers, the
coordinates in the power basis of a fixed monic lift of an irreducible
polynomial over F_p.  For nu = 1 this is just ``(n,)``.

Precision rules: multiplication and inversion keep the smaller relative
precision; addition keeps the smaller absolute precision, so cancellation
costs relative digits.  A sum that cancels completely becomes a zero "at
precision" (``prec == 0``); inverting it raises PrecisionExhausted, while
inverting the exact zero raises NotInvertible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
import math

from .errors import DomainError, NotInvertible, PrecisionExhausted


def vp(n: int, p: int) -> int:
    """Valuation of a nonzero integer; raises for 0."""
    if n == 0:
        raise ValueError("valuation of 0")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_or(n: int, p: int, cap: int) -> int:
    """Valuation capped at ``cap`` (0 maps to ``cap``)."""
    if n == 0:
        return cap
    return min(vp(n, p), cap)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# --- polynomials over F_p (coefficient lists, lowest degree first) ---------

def _fp_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_mod(a: list[int], m: list[int], p: int) -> list[int]:
    a = _fp_trim([x % p for x in a])
    inv_lead = pow(m[-1], -1, p)
    while len(a) >= len(m):
        c = a[-1] * inv_lead % p
        shift = len(a) - len(m)
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        _fp_trim(a)
    return a


def _fp_mulmod(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b))
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _fp_mod(out, m, p)


def _fp_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _fp_trim([x % p for x in a]), _fp_trim([x % p for x in b])
    while b:
        a, b = b, _fp_mod(a, b, p)
    return a


def _fp_irreducible(f: list[int], p: int) -> bool:
    # f has no factor of degree k <= deg/2  <=>  gcd(x^(p^k) - x, f) = 1
    deg = len(f) - 1
    x = [0, 1]
    power = x
    for _ in range(deg // 2):
        acc = [1]
        base = power
        e = p
        while e:
            if e & 1:
                acc = _fp_mulmod(acc, base, f, p)
            base = _fp_mulmod(base, base, f, p)
            e >>= 1
        power = acc
        diff = list(power) + [0] * max(0, 2 - len(power))
        diff[1] = (diff[1] - 1) % p
        if len(_fp_gcd(f, diff, p)) > 1:
            return False
    return True


def first_irreducible(p: int, nu: int) -> list[int]:
    """Lexicographically first monic irreducible of degree nu over F_p."""
    if nu == 1:
        return [0, 1]
    for code in range(p ** nu):
        coeffs = []
        c = code
        for _ in range(nu):
            coeffs.append(c % p)
            c //= p
        f = coeffs + [1]
        if f[0] != 0 and _fp_irreducible(f, p):
            return f
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


@dataclass(frozen=True)
class PadicContext:
    """Global parameters: prime, precision, unramified degree, series caps.

    ``degree_cap`` defaults to 3*p**3 and ``tower_cap`` to 4 for p = 3,
    3 otherwise.  ``u`` is an integer representative of the value of the
    cyclotomic character on the chosen generator of Gamma (default 1+p).
    """

    p: int
    N: int = 64
    nu: int = 1
    degree_cap: int | None = None
    tower_cap: int | None = None
    u: int | None = None

    def __post_init__(self):
        if not (isinstance(self.p, int) and self.p > 2 and is_prime(self.p)):
            raise DomainError(f"p must be an odd prime, got {self.p!r}")
        if self.N < 1:
            raise DomainError("precision N must be >= 1")
        if self.nu < 1:
            raise DomainError("unramified degree must be >= 1")
        if self.degree_cap is None:
            object.__setattr__(self, "degree_cap", 3 * self.p ** 3)
        if self.tower_cap is None:
            object.__setattr__(self, "tower_cap", 4 if self.p == 3 else 3)
        if self.u is None:
            object.__setattr__(self, "u", 1 + self.p)
        if (self.u - 1) % self.p != 0 or vp(self.u - 1, self.p) != 1:
            raise DomainError("u must satisfy v_p(u - 1) = 1")

    @property
    def D(self) -> int:
        return self.degree_cap  # type: ignore[return-value]

    @cached_property
    def pN(self) -> int:
        return self.p ** self.N

    def with_precision(self, N: int) -> "PadicContext":
        return PadicContext(self.p, N, self.nu, self.degree_cap, self.tower_cap, self.u)

    def with_degree(self, D: int) -> "PadicContext":
        return PadicContext(self.p, self.N, self.nu, D, self.tower_cap, self.u)

    def require_nu1(self, what: str) -> None:
        if self.nu != 1:
            raise DomainError(f"{what} supports only nu = 1 (unramified degree > 1 is scalar-layer only)")

    # -- unramified ring -------------------------------------------------
    @cached_property
    def modulus_poly(self) -> tuple[int, ...]:
        return tuple(first_irreducible(self.p, self.nu))

    def ring(self, prec: int) -> "UnramifiedRing":
        return UnramifiedRing(self, prec)

    @cached_property
    def frobenius_image(self) -> tuple[int, ...]:
        """sigma(x) for the generator x of the unramified ring, mod p^N."""
        return _frobenius_root(self)

    def scalar(self, value) -> "PadicScalar":
        return PadicScalar.coerce(self, value)


class UnramifiedRing:
    """Arithmetic on tuples modulo (f(x), p^prec)."""

    def __init__(self, ctx: PadicContext, prec: int):
        self.ctx = ctx
        self.p = ctx.p
        self.nu = ctx.nu
        self.prec = prec
        self.mod = ctx.p ** prec
        self.f = ctx.modulus_poly

    def reduce(self, a) -> tuple[int, ...]:
        return tuple(x % self.mod for x in a)

    def add(self, a, b):
        return tuple((x + y) % self.mod for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.mod for x, y in zip(a, b))

    def scale(self, a, c: int):
        return tuple(x * c % self.mod for x in a)

    def mul(self, a, b):
        nu = self.nu
        if nu == 1:
            return (a[0] * b[0] % self.mod,)
        out = [0] * (2 * nu - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        f = self.f
        for k in range(2 * nu - 2, nu - 1, -1):
            c = out[k]
            if c:
                out[k] = 0
                for i in range(nu):
                    out[k - nu + i] -= c * f[i]
        return tuple(x % self.mod for x in out[:nu])

    def one(self):
        return (1,) + (0,) * (self.nu - 1)

    def zero(self):
        return (0,) * self.nu

    def min_val(self, a) -> int:
        return min(vp_or(x, self.p, self.prec) for x in a)

    def is_unit(self, a) -> bool:
        return self.min_val(a) == 0

    def pow(self, a, e: int):
        acc = self.one()
        base = a
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            e >>= 1
        return acc

    def inv(self, a):
        if not self.is_unit(a):
            raise NotInvertible("not a unit of the unramified ring")
        if self.nu == 1:
            return (pow(a[0], -1, self.mod),)
        p = self.p
        low = UnramifiedRing(self.ctx, 1)
        z = low.pow(low.reduce(a), p ** self.nu - 2)
        k = 1
        while k < self.prec:
            k = min(2 * k, self.prec)
            r = UnramifiedRing(self.ctx, k)
            two = (2,) + (0,) * (self.nu - 1)
            z = r.mul(z, r.sub(two, r.mul(r.reduce(a), z)))
        return self.reduce(z)

    def sigma(self, a, times: int = 1):
        times %= self.nu
        if self.nu == 1 or times == 0:
            return self.reduce(a)
        y = self.reduce(self.ctx.frobenius_image)
        out = a
        for _ in range(times):
            acc = self.zero()
            ypow = self.one()
            for c in out:
                acc = self.add(acc, self.scale(ypow, c))
                ypow = self.mul(ypow, y)
            out = acc
        return out


def _frobenius_root(ctx: PadicContext) -> tuple[int, ...]:
    # Hensel-lift the root of f congruent to x^p mod p.
    nu = ctx.nu
    if nu == 1:
        return (0,)
    R = UnramifiedRing(ctx, ctx.N)
    f = ctx.modulus_poly
    x = (0, 1) + (0,) * (nu - 2)
    y = R.pow(x, ctx.p)

    def ev(poly, z):
        acc = R.zero()
        for c in reversed(poly):
            acc = R.add(R.mul(acc, z), (c % R.mod,) + (0,) * (nu - 1))
        return acc

    fprime = [i * f[i] for i in range(1, len(f))]
    for _ in range(ctx.N.bit_length() + 2):
        y = R.sub(y, R.mul(ev(f, y), R.inv(ev(fprime, y))))
    return y


class PadicScalar:
    """A p-adic number ``p**val * unit`` with relative precision ``prec``."""

    __slots__ = ("ctx", "val", "unit", "prec")

    def __init__(self, ctx: PadicContext, val, unit, prec: int):
        self.ctx = ctx
        self.val = val
        self.unit = unit
        self.prec = prec

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, ctx: PadicContext) -> "PadicScalar":
        return cls(ctx, None, (0,) * ctx.nu, ctx.N)

    @classmethod
    def from_int(cls, ctx: PadicContext, n: int) -> "PadicScalar":
        if n == 0:
            return cls.zero(ctx)
        v = vp(n, ctx.p)
        u = n // ctx.p ** v
        return cls(ctx, v, (u % ctx.pN,) + (0,) * (ctx.nu - 1), ctx.N)

    @classmethod
    def from_fraction(cls, ctx: PadicContext, x) -> "PadicScalar":
        x = Fraction(x)
        if x == 0:
            return cls.zero(ctx)
        p = ctx.p
        num, den = x.numerator, x.denominator
        vn, vd = vp(num, p), vp(den, p)
        un, ud = num // p ** vn, den // p ** vd
        u = un * pow(ud, -1, ctx.pN) % ctx.pN
        return cls(ctx, vn - vd, (u,) + (0,) * (ctx.nu - 1), ctx.N)

    @classmethod
    def from_parts(cls, ctx: PadicContext, val: int, unit, prec: int | None = None) -> "PadicScalar":
        """Build from (valuation, unit); ``unit`` is an int or a nu-tuple."""
        if isinstance(unit, int):
            unit = (unit,) + (0,) * (ctx.nu - 1)
        prec = ctx.N if prec is None else prec
        R = ctx.ring(prec)
        unit = R.reduce(unit)
        if all(c == 0 for c in unit):
            return cls.zero(ctx)
        k = R.min_val(unit)
        if k:
            unit = tuple(c // ctx.p ** k for c in unit)
            return cls(ctx, val + k, ctx.ring(prec - k).reduce(unit), prec - k)
        return cls(ctx, val, unit, prec)

    @classmethod
    def coerce(cls, ctx: PadicContext, x) -> "PadicScalar":
        if isinstance(x, PadicScalar):
            return x
        if isinstance(x, int):
            return cls.from_int(ctx, x)
        if isinstance(x, (Fraction, str)):
            return cls.from_fraction(ctx, x)
        if isinstance(x, (tuple, list)) and len(x) == 2:
            return cls.from_parts(ctx, int(x[0]), x[1] if isinstance(x[1], int) else tuple(x[1]))
        raise TypeError(f"cannot convert {x!r} to a p-adic scalar")

    # -- predicates ------------------------------------------------------
    @property
    def is_exact_zero(self) -> bool:
        return self.val is None

    def is_zero(self) -> bool:
        return self.val is None or self.prec <= 0

    def valuation(self):
        if self.val is None:
            return math.inf
        if self.prec <= 0:
            raise PrecisionExhausted("valuation of a value indistinguishable from 0")
        return self.val

    def absolute_precision(self):
        return math.inf if self.val is None else self.val + self.prec

    # -- arithmetic ------------------------------------------------------
    def _wrap(self, other) -> "PadicScalar":
        if isinstance(other, PadicScalar):
            if other.ctx.p != self.ctx.p or other.ctx.nu != self.ctx.nu:
                raise DomainError("scalars from different contexts")
            return other
        return PadicScalar.coerce(self.ctx, other)

    def __add__(self, other):
        b = self._wrap(other)
        a = self
        if a.val is None:
            return b
        if b.val is None:
            return a
        ctx, p = a.ctx, a.ctx.p
        v = min(a.val, b.val)
        absprec = min(a.val + a.prec, b.val + b.prec)
        if absprec <= v:
            return PadicScalar(ctx, absprec, (0,) * ctx.nu, 0)
        R = ctx.ring(absprec - v)
        sa = R.scale(a.unit, p ** (a.val - v))
        sb = R.scale(b.unit, p ** (b.val - v))
        s = R.add(sa, sb)
        if all(c == 0 for c in s):
            return PadicScalar(ctx, absprec, (0,) * ctx.nu, 0)
        k = R.min_val(s)
        prec = absprec - v - k
        unit = ctx.ring(prec).reduce(tuple(c // p ** k for c in s))
        return PadicScalar(ctx, v + k, unit, prec)

    __radd__ = __add__

    def __neg__(self):
        if self.val is None:
            return self
        R = self.ctx.ring(max(self.prec, 0))
        return PadicScalar(self.ctx, self.val, R.reduce(tuple(-c for c in self.unit)), self.prec)

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) + (-self)

    def __mul__(self, other):
        b = self._wrap(other)
        a = self
        if a.val is None or b.val is None:
            return PadicScalar.zero(a.ctx)
        prec = min(a.prec, b.prec)
        if prec <= 0:
            return PadicScalar(a.ctx, a.val + b.val + prec, (0,) * a.ctx.nu, 0)
        R = a.ctx.ring(prec)
        return PadicScalar(a.ctx, a.val + b.val, R.mul(a.unit, b.unit), prec)

    __rmul__ = __mul__

    def inverse(self) -> "PadicScalar":
        if self.val is None:
            raise NotInvertible("inverse of exact zero")
        if self.prec <= 0:
            raise PrecisionExhausted("inverse of a value indistinguishable from 0")
        R = self.ctx.ring(self.prec)
        return PadicScalar(self.ctx, -self.val, R.inv(self.unit), self.prec)

    def __truediv__(self, other):
        return self * self._wrap(other).inverse()

    def __rtruediv__(self, other):
        return self._wrap(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        acc = PadicScalar.from_int(self.ctx, 1)
        base = self
        while e:
            if e & 1:
                acc = acc * base
            base = base * base
            e >>= 1
        return acc

    def sigma(self, times: int = 1) -> "PadicScalar":
        """Frobenius (times may be negative); the identity when nu = 1."""
        if self.val is None or self.ctx.nu == 1:
            return self
        R = self.ctx.ring(self.prec)
        return PadicScalar(self.ctx, self.val, R.sigma(self.unit, times % self.ctx.nu), self.prec)

    def __eq__(self, other):
        try:
            b = self._wrap(other)
        except TypeError:
            return NotImplemented
        return (self - b).is_zero()

    __hash__ = None  # type: ignore[assignment]

    # -- conversions -----------------------------------------------------
    def to_fraction(self) -> Fraction:
        """Exact rational representative (nu = 1 only)."""
        self.ctx.require_nu1("to_fraction")
        if self.val is None or self.prec <= 0:
            return Fraction(0)
        return Fraction(self.unit[0]) * Fraction(self.ctx.p) ** self.val

    def fixed(self, shift: int, modexp: int) -> int:
        """Integer c with self = c / p**shift modulo p**(modexp - shift) (nu = 1)."""
        if self.val is None or self.prec <= 0:
            return 0
        e = self.val + shift
        if e < 0:
            raise DomainError("shift too small for this denominator")
        return self.unit[0] * self.ctx.p ** e % self.ctx.p ** modexp

    def __repr__(self):
        if self.val is None:
            return "PadicScalar(0)"
        u = self.unit[0] if self.ctx.nu == 1 else self.unit
        return f"PadicScalar(p^{self.val} * {u} + O(p^{self.val + self.prec}))"


def _floor_log(m: int, p: int) -> int:
    k = 0
    while m >= p:
        m //= p
        k += 1
    return k


def padic_log_unit(x: PadicScalar) -> PadicScalar:
    """log(x) for x in 1 + pO_F, by the Mercator series.

    The series is cut once every omitted term has valuation at least
    v(x-1) + N, so the result keeps the relative precision of x - 1.
    """
    ctx = x.ctx
    y = x - 1
    if y.is_exact_zero:
        return PadicScalar.zero(ctx)
    if y.is_zero():
        return y
    v = y.valuation()
    if v < 1:
        raise DomainError("padic_log_unit needs v_p(x - 1) >= 1")
    p = ctx.p
    target = v + min(y.prec, ctx.N)
    total = PadicScalar.zero(ctx)
    term = y
    m = 1
    while True:
        if m * v - _floor_log(m, p) >= target:
            break
        c = term / m
        total = total + (c if m % 2 else -c)
        term = term * y
        m += 1
    return total


@dataclass(frozen=True)
class A1Report:
    valuation_ok: bool
    congruence_ok: bool
    valuation: int
    expected_valuation: int
    truncated_congruence_ok: bool

    @property
    def ok(self) -> bool:
        return self.valuation_ok and self.congruence_ok


def lemma_A1_check(beta, n: int, ctx: PadicContext | None = None) -> A1Report:
    """Valuation and leading-term congruence for (1 + p*beta)^(p^n) - 1.

    Checks v(alpha^(p^n) - 1) = n + 1 + v(beta) and that
    (alpha^(p^n) - 1) / (p^(n+1) beta) is congruent mod p^n to
    sum_{i >= 0} (-p beta)^i / (i+1), summed until the terms vanish mod p^n.
    ``truncated_congruence_ok`` records the same test with the sum cut at
    i = n - 1, which fails e.g. for p = 3, beta = 1, n = 2 (the i = 2 term
    (-3)^2/3 = 3 is not divisible by 9).
    """
    if not isinstance(beta, PadicScalar):
        if ctx is None:
            raise TypeError("ctx required for non-scalar beta")
        beta = PadicScalar.coerce(ctx, beta)
    ctx = beta.ctx
    if n < 0:
        raise DomainError("n must be >= 0")
    if beta.is_zero():
        raise DomainError("beta must be nonzero")
    vb = beta.valuation()
    if vb < 0:
        raise DomainError("beta must be integral")
    p = ctx.p
    expected = n + 1 + vb
    if 2 * n + 1 + vb > min(ctx.N, vb + beta.prec):
        raise PrecisionExhausted("working precision too small for this (beta, n)")
    alpha = 1 + p * beta
    power = alpha
    for _ in range(n):
        power = power ** p
    diff = power - 1
    if diff.is_zero():
        raise PrecisionExhausted("alpha^(p^n) - 1 vanished at working precision")
    val = diff.valuation()
    valuation_ok = val == expected
    lhs = diff / (PadicScalar.from_int(ctx, p ** (n + 1)) * beta)

    def close(x: PadicScalar) -> bool:
        return x.is_zero() or x.valuation() >= n

    full = PadicScalar.zero(ctx)
    truncated = PadicScalar.zero(ctx)
    i = 0
    # term i has valuation i*(1 + v(beta)) - v_p(i+1) >= i - floor(log_p(i+1))
    while i < n or i - _floor_log(i + 1, p) < n:
        term = (-p * beta) ** i / (i + 1)
        full = full + term
        if i < n:
            truncated = truncated + term
        i += 1
    return A1Report(valuation_ok, close(lhs - full), val, expected, close(lhs - truncated))
