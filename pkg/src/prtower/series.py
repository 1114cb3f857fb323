"""Truncated power series in pi over Z_p, with phi, psi, the derivation
(1+pi) d/dpi, and the distinguished elements t, q_n and mu.

A ``PowerSeries`` stores ``p**-shift * sum c[i] pi^i`` for i < D with the
integers c[i] reduced modulo ``p**(N + shift)``: the absolute precision is
``p**N`` whatever the denominator.  Products with elements that have
denominators cost absolute digits; callers that care run at a raised N
(see ``PadicContext.with_precision``) and compare at the original one.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, gcd, inf
import json

from . import _kernel as K
from .errors import DomainError, LevelMismatch, NotInvertible, NotPsiZero, PrecisionExhausted
from .padic import PadicContext, PadicScalar, vp, vp_or


def _round_exp(e: int) -> int:
    return -(-e // 16) * 16


def fixed_scalar(ctx: PadicContext, x) -> tuple[int, int]:
    """Return (c, s) with x = c / p^s, c an integer (nu = 1)."""
    p = ctx.p
    if isinstance(x, int):
        return x, 0
    if isinstance(x, PadicScalar):
        if x.is_zero():
            return 0, 0
        if x.val >= 0:
            return x.unit[0] * p ** x.val, 0
        return x.unit[0], -x.val
    x = Fraction(x)
    if x == 0:
        return 0, 0
    den = x.denominator
    s = vp(den, p) if den % p == 0 else 0
    rest = den // p ** s
    mod = p ** (ctx.N + s)
    return x.numerator * pow(rest, -1, mod) % mod, s


class PowerSeries:
    __slots__ = ("ctx", "c", "shift")

    def __init__(self, ctx: PadicContext, coeffs, shift: int = 0, D: int | None = None):
        ctx.require_nu1("PowerSeries")
        D = ctx.D if D is None else D
        mod = ctx.p ** (ctx.N + shift)
        c = [int(x) % mod for x in list(coeffs)[:D]]
        c += [0] * (D - len(c))
        self.ctx = ctx
        self.c = c
        self.shift = shift
        self._normalize()

    @classmethod
    def _raw(cls, ctx, c, shift):
        obj = cls.__new__(cls)
        obj.ctx = ctx
        obj.c = c
        obj.shift = shift
        obj._normalize()
        return obj

    def _normalize(self):
        p = self.ctx.p
        while self.shift > 0 and all(x % p == 0 for x in self.c):
            self.c = [x // p for x in self.c]
            self.shift -= 1
        if self.shift < 0:
            self.c = [x * p ** (-self.shift) % p ** self.ctx.N for x in self.c]
            self.shift = 0

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, ctx, D=None):
        return cls(ctx, [], 0, D)

    @classmethod
    def constant(cls, ctx, x, D=None):
        c, s = fixed_scalar(ctx, x)
        return cls(ctx, [c], s, D)

    @classmethod
    def from_values(cls, ctx, values, D=None):
        """Coefficients given as ints, Fractions or PadicScalars."""
        pairs = [fixed_scalar(ctx, v) for v in values]
        s = max((sh for _, sh in pairs), default=0)
        p = ctx.p
        return cls(ctx, [c * p ** (s - sh) for c, sh in pairs], s, D)

    @classmethod
    def pi(cls, ctx, D=None):
        return cls(ctx, [0, 1], 0, D)

    @classmethod
    def one_plus_pi_power(cls, ctx, i: int, D=None):
        """(1 + pi)^i for an integer i >= 0 (exact binomial expansion)."""
        D = ctx.D if D is None else D
        if i < 0:
            raise DomainError("use binomial_power for negative exponents")
        return cls(ctx, [comb(i, j) for j in range(min(i, D - 1) + 1)], 0, D)

    @classmethod
    def binomial_power(cls, ctx, a, D=None):
        """(1 + pi)^a for a in Z_p (int, Fraction without p in the
        denominator, or integral PadicScalar): sum_j C(a, j) pi^j."""
        D = ctx.D if D is None else D
        p = ctx.p
        mod = p ** ctx.N
        # C(a, j) is a p-adic integer; compute C(a, j) mod p^N through the exact
        # rational for an integer representative congruent to a mod p^M,
        # where M absorbs the denominator v_p(j!).
        extra = max(vp(_fact(j), p) for j in range(1, D)) if D > 1 else 0
        if isinstance(a, PadicScalar):
            if a.is_zero():
                a_int = 0
            else:
                if a.val < 0:
                    raise DomainError("exponent must be integral")
                a_int = a.unit[0] * p ** a.val
        elif isinstance(a, Fraction):
            if a.denominator % p == 0:
                raise DomainError("exponent must be integral")
            M = p ** (ctx.N + extra)
            a_int = a.numerator * pow(a.denominator, -1, M) % M
        else:
            a_int = int(a)
        M = p ** (ctx.N + extra)
        a_int %= M
        out = [1]
        num = 1
        for j in range(1, D):
            num = num * (a_int - j + 1) % M
            f = _fact(j)
            v = vp(f, p)
            out.append((num // p ** v) * pow(f // p ** v, -1, mod) % mod)
        return cls(ctx, out, 0, D)

    @classmethod
    def log_one_plus_pi(cls, ctx, D=None):
        """t = log(1 + pi), truncated; denominators up to p^floor(log_p(D-1))."""
        D = ctx.D if D is None else D
        p = ctx.p
        e = 0
        while p ** (e + 1) <= D - 1:
            e += 1
        mod = p ** (ctx.N + e)
        out = [0]
        for m in range(1, D):
            a = vp(m, p)
            unit = m // p ** a
            val = p ** (e - a) * pow(unit, -1, mod)
            out.append(val if m % 2 else -val)
        return cls(ctx, out, e, D)

    @classmethod
    def q_n(cls, ctx, n: int = 1, D=None):
        """Phi_{p^n}(1 + pi) = phi^{n-1}(q)."""
        if n < 1:
            raise DomainError("q_n needs n >= 1")
        D = ctx.D if D is None else D
        return cls(ctx, list(K.cyclotomic_in_pi(ctx.p, n))[:D], 0, D)

    @classmethod
    def mu(cls, ctx, D=None):
        """mu = p / (q - pi^(p-1)), a unit of Z_p[[pi]]."""
        D = ctx.D if D is None else D
        q = list(K.cyclotomic_in_pi(ctx.p, 1))
        q[ctx.p - 1] -= 1
        unit = [x // ctx.p for x in q]
        return cls(ctx, unit, 0, D).inverse()

    # -- basic properties ------------------------------------------------
    @property
    def D(self) -> int:
        return len(self.c)

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def modulus(self) -> int:
        return self.ctx.p ** (self.ctx.N + self.shift)

    def coefficient(self, i: int) -> PadicScalar:
        ctx = self.ctx
        x = self.c[i]
        if x == 0:
            return PadicScalar.zero(ctx)
        return PadicScalar.from_parts(ctx, -self.shift, x, ctx.N + self.shift)

    def coefficient_fraction(self, i: int) -> Fraction:
        x = self.c[i]
        m = self.modulus
        if x > m // 2:
            x -= m
        return Fraction(x, self.p ** self.shift)

    def valuations(self) -> list:
        p, N, s = self.p, self.ctx.N, self.shift
        return [vp_or(x, p, N + s) - s if x else inf for x in self.c]

    def valuation(self):
        """Minimum coefficient valuation (inf when zero at precision)."""
        g = gcd(*self.c)
        if g == 0:
            return inf
        return vp(g, self.p) - self.shift

    def pi_order(self):
        for i, x in enumerate(self.c):
            if x:
                return i
        return inf

    def is_zero(self, prec: int | None = None) -> bool:
        """True if every coefficient is 0 modulo p^prec (default N)."""
        prec = self.ctx.N if prec is None else prec
        v = self.valuation()
        return v >= prec

    def truncate(self, D: int) -> "PowerSeries":
        c = self.c[:D] + [0] * max(0, D - self.D)
        return PowerSeries._raw(self.ctx, c, self.shift)

    # -- arithmetic ------------------------------------------------------
    def _align(self, other: "PowerSeries"):
        if other.ctx.p != self.ctx.p:
            raise DomainError("series over different primes")
        D = min(self.D, other.D)
        s = max(self.shift, other.shift)
        p = self.p
        a = self.c[:D]
        b = other.c[:D]
        if self.shift < s:
            f = p ** (s - self.shift)
            a = [x * f for x in a]
        if other.shift < s:
            f = p ** (s - other.shift)
            b = [x * f for x in b]
        return a, b, s, D

    def _coerce(self, other):
        if isinstance(other, PowerSeries):
            return other
        return PowerSeries.constant(self.ctx, other, self.D)

    def __add__(self, other):
        other = self._coerce(other)
        a, b, s, D = self._align(other)
        mod = self.ctx.p ** (self.ctx.N + s)
        return PowerSeries._raw(self.ctx, [(x + y) % mod for x, y in zip(a, b)], s)

    __radd__ = __add__

    def __neg__(self):
        mod = self.modulus
        return PowerSeries._raw(self.ctx, [(-x) % mod for x in self.c], self.shift)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, x) -> "PowerSeries":
        c, s = fixed_scalar(self.ctx, x)
        shift = self.shift + s
        mod = self.ctx.p ** (self.ctx.N + shift)
        return PowerSeries._raw(self.ctx, [y * c % mod for y in self.c], shift)

    def __mul__(self, other):
        if not isinstance(other, PowerSeries):
            return self.scale(other)
        D = min(self.D, other.D)
        shift = self.shift + other.shift
        mod = self.ctx.p ** (self.ctx.N + shift)
        return PowerSeries._raw(self.ctx, K.mul_trunc(self.c[:D], other.c[:D], D, mod), shift)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        acc = PowerSeries.constant(self.ctx, 1, self.D)
        base = self
        while e:
            if e & 1:
                acc = acc * base
            base = base * base
            e >>= 1
        return acc

    def inverse(self) -> "PowerSeries":
        """Inverse in Q_p + Z_p[[pi]] style: requires f = p^v * (unit series)."""
        p = self.p
        vals = self.valuations()
        v0 = vals[0]
        if v0 == inf or any(v < v0 for v in vals):
            raise NotInvertible("series is not p^v times a unit of Z_p[[pi]]")
        k = v0 + self.shift  # common power of p in the integer coefficients
        ints = [x // p ** k for x in self.c]
        mod = p ** (self.ctx.N + max(v0, 0))
        inv = K.inverse_trunc([x % mod for x in ints], self.D, mod)
        # value = p^v0 * unit  =>  inverse = p^-v0 * unit^-1
        if v0 >= 0:
            return PowerSeries._raw(self.ctx, [x % self.ctx.p ** (self.ctx.N + v0) for x in inv], v0)
        f = p ** (-v0)
        return PowerSeries._raw(self.ctx, [x * f % self.ctx.p ** self.ctx.N for x in inv], 0)

    def __truediv__(self, other):
        if isinstance(other, PowerSeries):
            return self * other.inverse()
        c, s = fixed_scalar(self.ctx, other)
        inv = PadicScalar.coerce(self.ctx, Fraction(1) / (Fraction(c, self.p ** s)))
        return self.scale(inv)

    def __eq__(self, other):
        if not isinstance(other, PowerSeries):
            try:
                other = self._coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def agreement(self, other: "PowerSeries"):
        """Number of p-adic digits to which two series agree (min over coefficients)."""
        return (self - other).valuation()

    # -- operators -------------------------------------------------------
    def phi(self) -> "PowerSeries":
        """f(pi) -> f((1+pi)^p - 1); exact modulo pi^D because phi(pi^m) has order m."""
        p = self.p
        # work with the common p-power factored out: small terms are cheap
        v = min(vp(gcd(*self.c), p), self.ctx.N + self.shift) if any(self.c) else 0
        N = self.ctx.N + self.shift - v
        if N <= 0:
            return PowerSeries._raw(self.ctx, [0] * self.D, self.shift)
        R = _round_exp(N)
        pv = p ** v
        rows, nb = K.phi_rows(p, self.D, R)
        out = K.linear_combination([x // pv for x in self.c], rows, nb, self.D, p ** N)
        return PowerSeries._raw(self.ctx, [x * pv for x in out], self.shift)

    def phi_power(self, k: int) -> "PowerSeries":
        f = self
        for _ in range(k):
            f = f.phi()
        return f

    def psi(self, Dout: int | None = None) -> "PowerSeries":
        """Left inverse of phi via the exact change to the (1+pi)^j basis.

        The result is returned with degree cap ceil(D/p).  Coefficients
        of the input beyond the cap are treated as 0.
        """
        D = self.D
        if Dout is None:
            Dout = -(-D // self.p)
        N = self.ctx.N + self.shift
        R = _round_exp(N)
        rows, nb = K.psi_rows_packed(self.p, D, Dout, R)
        out = K.linear_combination(self.c, rows, nb, Dout, self.p ** N)
        return PowerSeries._raw(self.ctx, out, self.shift)

    def partial(self, m: int = 1) -> "PowerSeries":
        """(1+pi) d/dpi applied m times; each application costs one top degree."""
        if m < 0:
            raise DomainError("use PsiZeroSeries.partial for negative powers")
        c = list(self.c)
        mod = self.modulus
        for _ in range(m):
            n = len(c) - 1
            if n <= 0:
                c = [0]
                break
            c = [((i + 1) * c[i + 1] + i * c[i]) % mod for i in range(n)]
        return PowerSeries._raw(self.ctx, c, self.shift)

    def derivative(self) -> "PowerSeries":
        mod = self.modulus
        c = [((i + 1) * self.c[i + 1]) % mod for i in range(self.D - 1)] or [0]
        return PowerSeries._raw(self.ctx, c, self.shift)

    def value_at_zero(self) -> PadicScalar:
        return self.coefficient(0)

    def compose_one_plus_pi_power(self, a) -> "PowerSeries":
        """f((1+pi)^a - 1) for a in 1 + pZ_p (the Gamma-action)."""
        g = PowerSeries.binomial_power(self.ctx, a, self.D) - 1
        acc = PowerSeries.zero(self.ctx, self.D)
        for ci in reversed(range(self.D)):
            acc = acc * g + PowerSeries._raw(self.ctx, [self.c[ci]] + [0] * (self.D - 1), self.shift)
        return acc

    def tail_bound(self, n: int) -> int:
        """Crude lower bound (in digits) for the error of evaluating at
        zeta_{p^n} - 1 after truncation, assuming the unseen coefficients
        are no worse than the worst one present."""
        e = (self.p - 1) * self.p ** (n - 1)
        v = self.valuation()
        if v == inf:
            v = 0
        return (self.D + e - 1) // e + min(v, 0)

    def eval_at_zeta(self, n: int, prec: int | None = None, polynomial: bool = False):
        """Evaluate at zeta_{p^n} - 1, returning a CyclotomicElement.

        Unless ``polynomial`` is set, the truncation tail is bounded by
        ``tail_bound(n)`` digits; the result records it and PrecisionExhausted
        is raised if it is below ``prec``.
        """
        from .cyclotomic import CyclotomicElement

        if n < 1:
            raise LevelMismatch("evaluation level must be >= 1")
        tail = inf if polynomial else self.tail_bound(n)
        if prec is not None and tail < prec:
            raise PrecisionExhausted(f"tail bound {tail} below requested precision {prec}")
        return CyclotomicElement.from_pi_polynomial(self.ctx, n, self.c, self.shift, tail)

    # -- serialization ---------------------------------------------------
    def to_json_pairs(self) -> list:
        out = []
        for i in range(self.D):
            s = self.coefficient(i)
            out.append([None, 0] if s.is_zero() else [s.val, s.unit[0]])
        return out

    @classmethod
    def from_json_pairs(cls, ctx, pairs) -> "PowerSeries":
        vals = []
        for v, u in pairs:
            vals.append(0 if v is None else PadicScalar.from_parts(ctx, v, u))
        return cls.from_values(ctx, vals, len(pairs))

    def dumps(self) -> str:
        return json.dumps(self.to_json_pairs())

    def __repr__(self):
        terms = []
        for i in range(min(self.D, 6)):
            if self.c[i]:
                terms.append(f"{self.coefficient_fraction(i)}*pi^{i}")
        more = " + ..." if self.D > 6 else ""
        return f"PowerSeries({' + '.join(terms) or '0'}{more}; D={self.D})"


_FACT = [1]


def _fact(n: int) -> int:
    while len(_FACT) <= n:
        _FACT.append(_FACT[-1] * len(_FACT))
    return _FACT[n]


class PsiZeroSeries:
    """sum_i a_i (1+pi)^i over exponents i >= 1 prime to p.

    Coefficients are stored like PowerSeries coefficients: integers with a
    common shift, ``value = p**-shift * a``.
    """

    __slots__ = ("ctx", "terms", "shift")

    def __init__(self, ctx: PadicContext, terms: dict, shift: int = 0):
        ctx.require_nu1("PsiZeroSeries")
        p = ctx.p
        mod = p ** (ctx.N + shift)
        clean = {}
        for i, a in terms.items():
            i = int(i)
            if i <= 0 or i % p == 0:
                raise NotPsiZero(f"exponent {i} is not a positive integer prime to p")
            a = int(a) % mod
            if a:
                clean[i] = a
        self.ctx = ctx
        self.terms = dict(sorted(clean.items()))
        self.shift = shift
        while self.shift > 0 and all(a % p == 0 for a in self.terms.values()):
            self.terms = {i: a // p for i, a in self.terms.items()}
            self.shift -= 1

    @classmethod
    def from_values(cls, ctx, terms: dict) -> "PsiZeroSeries":
        pairs = {i: fixed_scalar(ctx, v) for i, v in terms.items()}
        s = max((sh for _, sh in pairs.values()), default=0)
        return cls(ctx, {i: c * ctx.p ** (s - sh) for i, (c, sh) in pairs.items()}, s)

    @classmethod
    def from_series(cls, f: PowerSeries) -> "PsiZeroSeries":
        """Recover the (1+pi)-basis form of a polynomial with psi = 0.

        Raises NotPsiZero if f has a (1+pi)^j component with p | j.
        """
        c = f.c
        D = f.D
        mod = f.modulus
        # b_j = sum_{m >= j} c_m C(m, j) (-1)^(m-j)
        terms = {}
        for j in range(D):
            b = 0
            for m in range(j, D):
                if c[m]:
                    b += c[m] * comb(m, j) * (-1 if (m - j) % 2 else 1)
            b %= mod
            if b:
                if j % f.p == 0:
                    raise NotPsiZero(f"(1+pi)^{j} component present")
                terms[j] = b
        return cls(f.ctx, terms, f.shift)

    @property
    def max_exponent(self) -> int:
        return max(self.terms, default=0)

    def coefficient(self, i: int) -> PadicScalar:
        a = self.terms.get(i, 0)
        if not a:
            return PadicScalar.zero(self.ctx)
        return PadicScalar.from_parts(self.ctx, -self.shift, a, self.ctx.N + self.shift)

    def _align(self, other):
        s = max(self.shift, other.shift)
        p = self.ctx.p
        a = {i: x * p ** (s - self.shift) for i, x in self.terms.items()}
        b = {i: x * p ** (s - other.shift) for i, x in other.terms.items()}
        return a, b, s

    def __add__(self, other: "PsiZeroSeries"):
        a, b, s = self._align(other)
        for i, x in b.items():
            a[i] = a.get(i, 0) + x
        return PsiZeroSeries(self.ctx, a, s)

    def __neg__(self):
        return PsiZeroSeries(self.ctx, {i: -x for i, x in self.terms.items()}, self.shift)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, x) -> "PsiZeroSeries":
        c, s = fixed_scalar(self.ctx, x)
        return PsiZeroSeries(self.ctx, {i: a * c for i, a in self.terms.items()}, self.shift + s)

    def __mul__(self, x):
        return self.scale(x)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PsiZeroSeries):
            return NotImplemented
        d = self - other
        return all(vp(a, self.ctx.p) - d.shift >= self.ctx.N for a in d.terms.values())

    __hash__ = None  # type: ignore[assignment]

    def partial(self, m: int) -> "PsiZeroSeries":
        """partial^m for any integer m: multiplies the (1+pi)^i coefficient by i^m."""
        mod = self.ctx.p ** (self.ctx.N + self.shift)
        return PsiZeroSeries(self.ctx, {i: a * pow(i, m, mod) for i, a in self.terms.items()}, self.shift)

    def partial_inv(self, m: int) -> "PsiZeroSeries":
        return self.partial(-m)

    def to_series(self, D: int | None = None) -> PowerSeries:
        D = self.ctx.D if D is None else D
        mod = self.ctx.p ** (self.ctx.N + self.shift)
        out = [0] * D
        for i, a in self.terms.items():
            for j in range(min(i, D - 1) + 1):
                out[j] += a * comb(i, j)
        return PowerSeries(self.ctx, [x % mod for x in out], self.shift, D)

    def is_polynomial_within(self, D: int) -> bool:
        return self.max_exponent < D

    def __repr__(self):
        inner = ", ".join(f"{i}: {self.coefficient(i)}" for i in self.terms)
        return f"PsiZeroSeries({{{inner}}})"

