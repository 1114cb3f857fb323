"""Filtered phi-modules given by a Frobenius matrix and Hodge-Tate weights.

Matrices are held exactly as lists of Fractions (nu = 1).  The filtration
enters only through the weight multiset and the integer d' = dim D/Fil^0,
which defaults to the number of weights >= 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, inf

from .errors import CapExceeded, DomainError, NotInvertible, PrecisionExhausted
from .padic import PadicContext, PadicScalar, vp

Matrix = list[list[Fraction]]


# -- exact linear algebra --------------------------------------------------

def fval(x: Fraction, p: int):
    if x == 0:
        return inf
    x = Fraction(x)
    return vp(x.numerator, p) - vp(x.denominator, p)


def min_val(A: Matrix, p: int):
    return min(fval(x, p) for row in A for x in row)


def identity(d: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    cols = list(zip(*B))
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in cols] for row in A]


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    return [[a + b for a, b in zip(r, s)] for r, s in zip(A, B)]


def mat_scale(A: Matrix, c) -> Matrix:
    c = Fraction(c)
    return [[c * a for a in row] for row in A]


def mat_vec(A: Matrix, v: list) -> list:
    return [sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in A]


def mat_inv(A: Matrix) -> Matrix:
    d = len(A)
    M = [list(map(Fraction, row)) + identity(d)[i] for i, row in enumerate(A)]
    for col in range(d):
        piv = next((r for r in range(col, d) if M[r][col] != 0), None)
        if piv is None:
            raise NotInvertible("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(d):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [row[d:] for row in M]


def solve(A: Matrix, b: list) -> list:
    return mat_vec(mat_inv(A), b)


def char_poly(A: Matrix) -> list[Fraction]:
    """det(X I - A), coefficients from X^0 up to the monic X^d (Faddeev-LeVerrier)."""
    d = len(A)
    coeffs = [Fraction(0)] * (d + 1)
    coeffs[d] = Fraction(1)
    M = [[Fraction(0)] * d for _ in range(d)]
    I = identity(d)
    for k in range(1, d + 1):
        M = mat_add(mat_mul(A, M), mat_scale(I, coeffs[d - k + 1]))
        AM = mat_mul(A, M)
        coeffs[d - k] = -sum(AM[i][i] for i in range(d)) / k
    return coeffs


def poly_at_matrix(Q: list, A: Matrix) -> Matrix:
    d = len(A)
    acc = [[Fraction(0)] * d for _ in range(d)]
    for c in reversed(Q):
        acc = mat_add(mat_mul(acc, A), mat_scale(identity(d), c))
    return acc


def newton_slopes(poly: list[Fraction], p: int) -> list[Fraction]:
    """Valuations of the roots of sum poly[i] X^i, with multiplicity, ascending."""
    pts = [(i, fval(c, p)) for i, c in enumerate(poly) if c != 0]
    if not pts or pts[0][0] != 0:
        raise DomainError("zero is a root: phi is not invertible")
    hull = [pts[0]]
    for pt in pts[1:]:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point if it lies on or above the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    out = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        s = Fraction(y2 - y1, x2 - x1)
        out.extend([-s] * (x2 - x1))
    return sorted(out)


# -- the module ------------------------------------------------------------

def _to_fraction(ctx: PadicContext, x) -> Fraction:
    if isinstance(x, PadicScalar):
        return x.to_fraction()
    if isinstance(x, (list, tuple)) and len(x) == 2:
        v, u = x
        if v is None:
            return Fraction(0)
        return Fraction(u) * Fraction(ctx.p) ** v
    return Fraction(x)


@dataclass(frozen=True)
class DieudonneModule:
    ctx: PadicContext
    phi: tuple
    weights: tuple
    dprime: int

    @classmethod
    def build(cls, ctx: PadicContext, phi_matrix, weights, dprime: int | None = None,
              strict: bool = True) -> "DieudonneModule":
        ctx.require_nu1("DieudonneModule")
        A = [[_to_fraction(ctx, x) for x in row] for row in phi_matrix]
        d = len(A)
        if d == 0 or any(len(row) != d for row in A):
            raise DomainError("phi matrix must be square and non-empty")
        weights = tuple(sorted(int(w) for w in weights))
        if len(weights) != d:
            raise DomainError("need one Hodge-Tate weight per basis vector")
        if dprime is None:
            dprime = sum(1 for w in weights if w >= 1)
        mod = cls(ctx, tuple(tuple(r) for r in A), weights, int(dprime))
        mod._validate(strict)
        return mod

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def rank(self) -> int:
        return len(self.phi)

    @property
    def a(self) -> int:
        return self.weights[0]

    @property
    def b(self) -> int:
        return self.weights[-1]

    def matrix(self) -> Matrix:
        return [list(r) for r in self.phi]

    def _validate(self, strict: bool):
        p = self.p
        if self.b < 1:
            raise DomainError("largest Hodge-Tate weight must be >= 1")
        if strict and self.b - self.a > p - 1:
            raise DomainError(f"weights span {self.b - self.a} > p - 1 (Fontaine-Laffaille range)")
        if strict and min_val(self.matrix(), p) < -self.b:
            raise DomainError("p^b phi is not integral")
        bad = self.eigenvalue_powers_of_p()
        if bad:
            raise DomainError(f"phi has eigenvalue p^{bad[0]}")

    def char_poly(self) -> list[Fraction]:
        return char_poly(self.matrix())

    def eigenvalue_powers_of_p(self) -> list[int]:
        """Integers k with p^k a root of det(X - phi) (at working precision)."""
        Q = self.char_poly()
        found = []
        for s in sorted(set(newton_slopes(Q, self.p))):
            if s.denominator != 1:
                continue
            x = Fraction(self.p) ** int(s)
            val = sum(c * x ** i for i, c in enumerate(Q))
            if val == 0 or fval(val, self.p) >= self.ctx.N + abs(int(s)) * self.rank:
                found.append(int(s))
        return found

    def twisted(self, k: int) -> Matrix:
        """Matrix of p^k phi."""
        return mat_scale(self.matrix(), Fraction(self.p) ** k)

    def to_json(self) -> dict:
        def enc(x):
            if x == 0:
                return [None, 0]
            v = fval(x, self.p)
            return [v, str(x / Fraction(self.p) ** v)]
        return {"p": self.p, "nu": 1, "phi": [[enc(x) for x in row] for row in self.phi],
                "weights": list(self.weights), "dprime": self.dprime}

    @classmethod
    def from_json(cls, doc, ctx: PadicContext | None = None) -> "DieudonneModule":
        if isinstance(doc, str):
            doc = json.loads(doc)
        if ctx is None:
            ctx = PadicContext(int(doc["p"]), nu=int(doc.get("nu", 1)))
        if int(doc.get("nu", 1)) != ctx.nu or int(doc["p"]) != ctx.p:
            raise DomainError("document does not match the context")

        def dec(e):
            if isinstance(e, (list, tuple)):
                v, u = e
                return Fraction(0) if v is None else Fraction(u) * Fraction(ctx.p) ** int(v)
            return Fraction(e)

        phi = [[dec(e) for e in row] for row in doc["phi"]]
        return cls.build(ctx, phi, doc["weights"], doc.get("dprime"))


def slopes(D: DieudonneModule) -> list[Fraction]:
    return newton_slopes(D.char_poly(), D.p)


@dataclass
class PhiConstants:
    r: int
    s: int
    s1: int
    s2: int
    iteration_cap: int
    s1_scan: int = 0
    s1_exact: int | None = None
    lattice_deficits: list = field(default_factory=list)
    stabilized_at: int = 0

    @property
    def discrepancy(self) -> int | None:
        return None if self.s1_exact is None else self.s1_exact - self.s1_scan


def _deficit(A: Matrix, p: int) -> int:
    v = min_val(A, p)
    return 0 if v == inf else max(0, -int(v))


def power_deficits(D: DieudonneModule, r: int, kmax: int) -> list[int]:
    """-min valuation of (p^r phi)^k for k = 0..kmax (0 when integral)."""
    A = D.twisted(r)
    P = identity(D.rank)
    out = []
    for _ in range(kmax + 1):
        out.append(_deficit(P, D.p))
        P = mat_mul(P, A)
    return out


def inverse_one_minus(D: DieudonneModule, j: int) -> Matrix:
    """(1 - p^j phi)^-1."""
    M = mat_add(identity(D.rank), mat_scale(D.twisted(j), -1))
    try:
        return mat_inv(M)
    except NotInvertible:
        raise NotInvertible(f"1 - p^{j} phi is singular (eigenvalue p^{-j})") from None


def constants(D: DieudonneModule, r: int | None = None, cap: int | None = None) -> PhiConstants:
    p, d = D.p, D.rank
    sl = slopes(D)
    need = max(1, ceil(-min(sl)))
    if r is None:
        r = need
    if r < need:
        raise DomainError(f"slopes go down to {min(sl)}, so r must be >= {need}")
    cap = 4 * d * D.ctx.nu + 8 if cap is None else cap
    defs = power_deficits(D, r, cap)
    s1_scan = max(defs)
    stabilized = defs.index(s1_scan)
    if stabilized == cap and cap > 0 and defs[cap] > defs[cap - 1]:
        raise CapExceeded(f"deficits still increasing at k = {cap}")
    # Cayley-Hamilton: with an integral characteristic polynomial every power
    # is a Z_p-combination of the first d, so the sup is attained for k < d.
    Q = char_poly(D.twisted(r))
    s1_exact = max(defs[:d]) if all(fval(c, p) >= 0 for c in Q) else None
    lattice = [_deficit(inverse_one_minus(D, j), p) for j in range(r + 1)]
    s2 = lattice[0]
    s = max([s1_scan] + lattice)
    return PhiConstants(r=r, s=s, s1=s1_scan, s2=s2, iteration_cap=cap, s1_scan=s1_scan,
                        s1_exact=s1_exact, lattice_deficits=lattice, stabilized_at=stabilized)


def k_polynomial(D: DieudonneModule, k: int, kind: str = "r_poly") -> list[Fraction]:
    """Characteristic polynomial of p^k phi.

    ``b_poly`` computes it directly (k = b gives the b-polynomial); ``r_poly``
    rescales the b-polynomial coefficient-wise by p^-((b-k)(d-i)) and insists
    on integral coefficients.
    """
    if kind == "b_poly":
        return char_poly(D.twisted(k))
    if kind != "r_poly":
        raise DomainError(f"unknown polynomial kind {kind!r}")
    d, b, p = D.rank, D.b, D.p
    QT = char_poly(D.twisted(b))
    out = [c / Fraction(p) ** ((b - k) * (d - i)) for i, c in enumerate(QT)]
    if any(fval(c, p) < 0 for c in out):
        raise DomainError(f"rescaled polynomial is not integral; k = {k} is too small")
    return out


def is_k_polynomial(D: DieudonneModule, Q: list, k: int) -> bool:
    Z = poly_at_matrix([Fraction(c) for c in Q], D.twisted(k))
    return min_val(Z, D.p) >= D.ctx.N


def det_one_minus_phi(D: DieudonneModule) -> Fraction:
    return _det(mat_add(identity(D.rank), mat_scale(D.matrix(), -1)))


def _det(A: Matrix) -> Fraction:
    d = len(A)
    M = [list(row) for row in A]
    det = Fraction(1)
    for col in range(d):
        piv = next((r for r in range(col, d) if M[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        det *= M[col][col]
        for r in range(col + 1, d):
            f = M[r][col] / M[col][col]
            if f:
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return det


def det_valuation_part(x: Fraction, p: int) -> Fraction:
    """(x)_(p) = p^ord_p(x)."""
    return Fraction(p) ** fval(x, p)


def modular_form_module(p: int, k: int, a_p, eps_p=1, ctx: PadicContext | None = None) -> DieudonneModule:
    """The rank-2 module attached to T_f(k/2) in the basis v, p^(k/2) phi(v)."""
    if ctx is None:
        ctx = PadicContext(p)
    if k % 2 or k < 2 or k > p - 1:
        raise DomainError("need k even with 2 <= k <= p - 1")
    a = Fraction(a_p)
    if a != 0 and fval(a, p) < k // 2:
        raise DomainError("need v_p(a_p) >= k/2")
    h = k // 2
    P = Fraction(p)
    eps = Fraction(eps_p)
    phi = [[Fraction(0), -eps * P ** (h - 1)], [P ** (-h), a / P ** h]]
    D = DieudonneModule.build(ctx, phi, [1 - h, h], dprime=1)
    # phi^2 - (a_p / p^(k/2)) phi + eps/p = 0
    Z = poly_at_matrix([eps / P, -a / P ** h, Fraction(1)], D.matrix())
    if min_val(Z, p) != inf:
        raise DomainError("matrix fails its quadratic relation")
    return D


def random_module(ctx: PadicContext, d: int, rng, max_weight: int | None = None,
                  attempts: int = 50) -> DieudonneModule:
    """A random module of rank d satisfying (H.FL) and (H.eigen):
    phi = U diag(p^-w) V with U, V unimodular and weights w in [0, b]."""
    p = ctx.p
    b_max = min(p - 1, 2) if max_weight is None else max_weight
    for _ in range(attempts):
        w = sorted(rng.randint(0, b_max) for _ in range(d))
        if w[-1] < 1:
            w[-1] = 1
        U = [[Fraction(rng.randrange(p ** 3)) if j < i else Fraction(int(i == j) * (1 + p * rng.randrange(p)))
              for j in range(d)] for i in range(d)]
        V = [[Fraction(rng.randrange(p ** 3)) if j > i else Fraction(int(i == j) * rng.choice([1, 2, p - 1]))
              for j in range(d)] for i in range(d)]
        Dg = [[Fraction(p) ** (-w[i]) if i == j else Fraction(0) for j in range(d)] for i in range(d)]
        phi = mat_mul(mat_mul(U, Dg), V)
        try:
            return DieudonneModule.build(ctx, phi, w)
        except DomainError:
            continue
    raise DomainError("could not draw a module satisfying the hypotheses")
