"""Elements of Z_p[zeta_{p^n}] with trace maps down the tower.

Elements are stored in the power basis 1, zeta, ..., zeta^(deg-1) with
deg = (p-1)p^(n-1) (level 0 is Z_p itself).  This basis is a Z_p-basis of
the ring of integers, so coordinate valuations measure membership in
p^k Z_p[zeta].  The residue in the variable zeta - 1 is available through
``residue()``.

Cross-level arithmetic is never implicit: use ``embed`` / ``trace_down``.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, inf

from .errors import DomainError, LevelMismatch
from .padic import PadicContext, PadicScalar, vp
from . import _kernel as K


def degree(p: int, n: int) -> int:
    return 1 if n == 0 else (p - 1) * p ** (n - 1)


def _fold(full: list[int], p: int, n: int, mod: int) -> list[int]:
    """Reduce a coefficient array indexed by exponents mod p^n to the power basis."""
    if n == 0:
        return [sum(full) % mod]
    deg = degree(p, n)
    step = p ** (n - 1)
    out = full[:deg]
    for r in range(step):
        top = full[deg + r]
        if top:
            for a in range(p - 1):
                out[a * step + r] -= top
    return [x % mod for x in out]


class CyclotomicElement:
    __slots__ = ("ctx", "n", "c", "shift", "tail")

    def __init__(self, ctx: PadicContext, n: int, coeffs, shift: int = 0, tail=inf):
        ctx.require_nu1("CyclotomicElement")
        if n < 0:
            raise LevelMismatch("level must be >= 0")
        deg = degree(ctx.p, n)
        mod = ctx.p ** (ctx.N + shift)
        c = [int(x) % mod for x in list(coeffs)[:deg]]
        if len(list(coeffs)) > deg:
            raise DomainError("too many coordinates for this level")
        c += [0] * (deg - len(c))
        self.ctx = ctx
        self.n = n
        self.c = c
        self.shift = shift
        self.tail = tail
        self._normalize()

    @classmethod
    def _raw(cls, ctx, n, c, shift, tail=inf):
        obj = cls.__new__(cls)
        obj.ctx, obj.n, obj.c, obj.shift, obj.tail = ctx, n, c, shift, tail
        obj._normalize()
        return obj

    def _normalize(self):
        p = self.ctx.p
        while self.shift > 0 and all(x % p == 0 for x in self.c):
            self.c = [x // p for x in self.c]
            self.shift -= 1

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, ctx, n):
        return cls(ctx, n, [], 0)

    @classmethod
    def constant(cls, ctx, n, x):
        from .series import fixed_scalar

        c, s = fixed_scalar(ctx, x)
        return cls(ctx, n, [c], s)

    @classmethod
    def zeta_power(cls, ctx, n: int, j: int) -> "CyclotomicElement":
        p = ctx.p
        size = p ** n
        full = [0] * size
        full[j % size] = 1
        return cls._raw(ctx, n, _fold(full, p, n, ctx.pN), 0)

    @classmethod
    def from_zeta_powers(cls, ctx, n: int, terms: dict, shift: int = 0) -> "CyclotomicElement":
        """sum_j a_j zeta^j for arbitrary integer exponents j."""
        p = ctx.p
        size = p ** n
        full = [0] * size
        for j, a in terms.items():
            full[j % size] += a
        return cls._raw(ctx, n, _fold(full, p, n, p ** (ctx.N + shift)), shift)

    @classmethod
    def from_pi_polynomial(cls, ctx, n: int, coeffs, shift: int = 0, tail=inf) -> "CyclotomicElement":
        """sum_i c_i (zeta_{p^n} - 1)^i by Horner's rule in Z[x]/(x^(p^n) - 1)."""
        p = ctx.p
        mod = p ** (ctx.N + shift)
        if n == 0:
            return cls._raw(ctx, 0, [coeffs[0] % mod if coeffs else 0], shift, tail)
        size = p ** n
        acc = [0] * size
        last = len(coeffs) - 1
        while last >= 0 and coeffs[last] == 0:
            last -= 1
        for i in range(last, -1, -1):
            # acc <- acc * (x - 1) + c_i
            rolled = [acc[-1]] + acc[:-1]
            acc = [(a - b) % mod for a, b in zip(rolled, acc)]
            acc[0] = (acc[0] + coeffs[i]) % mod
        return cls._raw(ctx, n, _fold(acc, p, n, mod), shift, tail)

    # -- properties ------------------------------------------------------
    @property
    def p(self):
        return self.ctx.p

    @property
    def degree(self):
        return len(self.c)

    @property
    def modulus(self):
        return self.ctx.p ** (self.ctx.N + self.shift)

    def coordinate(self, j: int) -> PadicScalar:
        x = self.c[j]
        if x == 0:
            return PadicScalar.zero(self.ctx)
        return PadicScalar.from_parts(self.ctx, -self.shift, x, self.ctx.N + self.shift)

    def coordinates_fraction(self):
        m = self.modulus
        out = []
        for x in self.c:
            if x > m // 2:
                x -= m
            out.append(Fraction(x, self.p ** self.shift))
        return out

    def valuation(self):
        """Largest k with self in p^k Z_p[zeta] (inf if zero at precision)."""
        vals = [vp(x, self.p) for x in self.c if x]
        if not vals:
            return inf
        return min(vals) - self.shift

    def is_zero(self, prec: int | None = None) -> bool:
        prec = self.ctx.N if prec is None else prec
        return self.valuation() >= prec

    def agreement(self, other: "CyclotomicElement"):
        return (self - other).valuation()

    def residue(self) -> list[PadicScalar]:
        """Coefficients in the variable zeta - 1."""
        deg = self.degree
        out = [0] * deg
        for j, a in enumerate(self.c):
            if a:
                for i in range(j + 1):
                    out[i] += a * comb(j, i)
        mod = self.modulus
        return [PadicScalar.from_parts(self.ctx, -self.shift, x % mod, self.ctx.N + self.shift)
                if x % mod else PadicScalar.zero(self.ctx) for x in out]

    # -- arithmetic ------------------------------------------------------
    def _check(self, other: "CyclotomicElement"):
        if not isinstance(other, CyclotomicElement):
            raise TypeError("expected a CyclotomicElement")
        if other.n != self.n:
            raise LevelMismatch(f"levels {self.n} and {other.n} differ; embed explicitly")

    def _aligned(self, other):
        s = max(self.shift, other.shift)
        p = self.p
        a = [x * p ** (s - self.shift) for x in self.c]
        b = [x * p ** (s - other.shift) for x in other.c]
        return a, b, s

    def __add__(self, other):
        if not isinstance(other, CyclotomicElement):
            other = CyclotomicElement.constant(self.ctx, self.n, other)
        self._check(other)
        a, b, s = self._aligned(other)
        mod = self.ctx.p ** (self.ctx.N + s)
        return CyclotomicElement._raw(self.ctx, self.n, [(x + y) % mod for x, y in zip(a, b)], s,
                                      min(self.tail, other.tail))

    __radd__ = __add__

    def __neg__(self):
        mod = self.modulus
        return CyclotomicElement._raw(self.ctx, self.n, [(-x) % mod for x in self.c], self.shift, self.tail)

    def __sub__(self, other):
        if not isinstance(other, CyclotomicElement):
            other = CyclotomicElement.constant(self.ctx, self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, x) -> "CyclotomicElement":
        from .series import fixed_scalar

        c, s = fixed_scalar(self.ctx, x)
        shift = self.shift + s
        mod = self.ctx.p ** (self.ctx.N + shift)
        return CyclotomicElement._raw(self.ctx, self.n, [y * c % mod for y in self.c], shift, self.tail)

    def __mul__(self, other):
        if not isinstance(other, CyclotomicElement):
            return self.scale(other)
        self._check(other)
        p, n = self.p, self.n
        shift = self.shift + other.shift
        mod = p ** (self.ctx.N + shift)
        if n == 0:
            return CyclotomicElement._raw(self.ctx, 0, [self.c[0] * other.c[0] % mod], shift,
                                          min(self.tail, other.tail))
        size = p ** n
        nb = K.slot_bytes(mod, self.degree)
        prod = K.pack(self.c, nb) * K.pack(other.c, nb)
        full = K.unpack(prod, nb, 2 * self.degree, mod * mod * self.degree)
        cyc = [0] * size
        for k, x in enumerate(full):
            if x:
                cyc[k % size] += x
        return CyclotomicElement._raw(self.ctx, n, _fold([x % mod for x in cyc], p, n, mod), shift,
                                      min(self.tail, other.tail))

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, CyclotomicElement):
            if other.n != self.n:
                return False
        try:
            return (self - other).is_zero()
        except TypeError:
            return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    # -- tower maps ------------------------------------------------------
    def trace_down(self) -> "CyclotomicElement":
        """Tr_{F_n/F_{n-1}}."""
        p, n = self.p, self.n
        if n < 1:
            raise LevelMismatch("cannot trace below level 0")
        mod = self.modulus
        if n == 1:
            val = (p * self.c[0] - sum(self.c[1:])) % mod
            return CyclotomicElement._raw(self.ctx, 0, [val], self.shift, self.tail)
        deg_low = degree(p, n - 1)
        out = [0] * deg_low
        for j in range(0, self.degree, p):
            out[j // p] = p * self.c[j] % mod
        return CyclotomicElement._raw(self.ctx, n - 1, out, self.shift, self.tail)

    def trace_to(self, level: int) -> "CyclotomicElement":
        x = self
        if level > self.n:
            raise LevelMismatch("trace target above current level")
        while x.n > level:
            x = x.trace_down()
        return x

    def embed(self, level: int | None = None) -> "CyclotomicElement":
        """Inclusion into a higher level (default: the next one)."""
        level = self.n + 1 if level is None else level
        if level < self.n:
            raise LevelMismatch("embedding target below current level")
        p = self.p
        c, n = self.c, self.n
        while n < level:
            new = [0] * degree(p, n + 1)
            for j, a in enumerate(c):
                new[p * j] = a
            c, n = new, n + 1
        return CyclotomicElement._raw(self.ctx, level, list(c), self.shift, self.tail)

    def is_trace_zero(self) -> bool:
        if self.n < 2:
            raise LevelMismatch("trace-zero submodule is defined for level >= 2")
        return self.trace_down().is_zero()

    def preimage(self):
        """A psi = 0 series whose value at zeta_{p^n} - 1 is self.

        Level >= 2 requires a trace-zero element (its power-basis support
        is then prime to p); level 1 uses the basis zeta, ..., zeta^(p-1).
        """
        from .series import PsiZeroSeries

        p, n = self.p, self.n
        if n < 1:
            raise LevelMismatch("preimage needs level >= 1")
        mod = self.modulus
        if n == 1:
            b0 = self.c[0]
            terms = {i: (self.c[i] - b0) % mod for i in range(1, p - 1)}
            terms[p - 1] = (-b0) % mod
            return PsiZeroSeries(self.ctx, terms, self.shift)
        if not self.is_trace_zero():
            raise DomainError("element is not in the trace-zero submodule")
        return PsiZeroSeries(self.ctx, {j: a for j, a in enumerate(self.c) if j % p}, self.shift)

    def decompose(self) -> list["CyclotomicElement"]:
        """Components [x_1, x_2, ..., x_n] with x_1 at level 1 and x_i
        trace-zero at level i, whose embeddings into level n sum to self."""
        if self.n < 1:
            raise LevelMismatch("decompose needs level >= 1")
        p = self.p
        comps = []
        x = self
        while x.n >= 2:
            tr = x.trace_down()
            lowered = tr.scale(Fraction(1, p))
            comps.append(x - lowered.embed())
            x = lowered
        comps.append(x)
        return comps[::-1]

    def sigma(self, times: int = 1) -> "CyclotomicElement":
        return self  # nu = 1: Frobenius of F is trivial

    def __repr__(self):
        fr = self.coordinates_fraction()
        terms = [f"{a}*z^{j}" for j, a in enumerate(fr) if a]
        return f"Cyc[n={self.n}]({' + '.join(terms) or '0'})"


def rank_trace_zero(p: int, n: int, nu: int = 1) -> int:
    """Z_p-rank of the trace-zero submodule at level n >= 2."""
    if n < 2:
        raise LevelMismatch("trace-zero rank is defined for n >= 2")
    return (degree(p, n) - degree(p, n - 1)) * nu
