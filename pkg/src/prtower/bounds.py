"""Exact exponents of the Tamagawa-number bounds.

Every function returns the exponent of p (an int, or a Fraction where a
half-integer can genuinely occur).  [F_n:F] = (p-1) p^(n-1) throughout and
[F_n:Q_p] = base_degree * [F_n:F].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError
from .padic import is_prime


def tower_degree(p: int, n: int) -> int:
    """[F_n:F] = (p - 1) p^(n - 1)."""
    if n < 1:
        raise DomainError("level must be >= 1")
    return (p - 1) * p ** (n - 1)


@dataclass(frozen=True)
class BoundInputs:
    p: int
    n: int
    d: int
    d_prime: int
    r: int
    s1: int
    s2: int
    det_val: int
    nu_times_e: int = 1
    k: int | None = None
    weights: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.p < 3 or not is_prime(self.p):
            raise DomainError("p must be an odd prime")
        if self.n < 1:
            raise DomainError("level must be >= 1")

    @property
    def d_prime_n(self) -> int:
        return self.d_prime * tower_degree(self.p, self.n)

    def at_level(self, n: int) -> "BoundInputs":
        return BoundInputs(self.p, n, self.d, self.d_prime, self.r, self.s1, self.s2, self.det_val,
                           self.nu_times_e, self.k, self.weights)


def index_bound_exponent(b: BoundInputs) -> int:
    """Exponent of the bound for the index of the image lattice:
    (r (p^(n-1) + p - 2) + s2 (p - 1)) d' + s1 d'_n."""
    p, n = b.p, b.n
    return (b.r * (p ** (n - 1) + p - 2) + b.s2 * (p - 1)) * b.d_prime + b.s1 * b.d_prime_n


def index_bound_sum(b: BoundInputs) -> int:
    """The same exponent assembled level by level: levels i >= 2 contribute
    (s1 + r(n - i)) per rank-p^(i-2)(p-1)^2 block, level 1 contributes
    (s1 + s2 + r n)(p - 1), all times d'."""
    p, n = b.p, b.n
    total = sum((b.s1 + b.r * (n - i)) * p ** (i - 2) * (p - 1) ** 2 for i in range(2, n + 1))
    total += (b.s1 + b.s2 + b.r * n) * (p - 1)
    return total * b.d_prime


def index_sum_identity_check(b: BoundInputs) -> bool:
    return index_bound_sum(b) == index_bound_exponent(b)


def general_bound_exponent(b: BoundInputs) -> int:
    """Index exponent minus v_p(det(1 - phi))."""
    return index_bound_exponent(b) - b.det_val


def lattice_shift(b: BoundInputs, m: int) -> int:
    """General bound for the lattice p^m L_n: shifts the exponent by m d'_n."""
    return general_bound_exponent(b) + m * b.d_prime_n


def stable_bound_exponent(b: BoundInputs) -> int:
    """s2 (p - 1) d' - det_val, which dominates the bound for p^(-r-s1) L_n at every level."""
    stable = b.s2 * (b.p - 1) * b.d_prime - b.det_val
    shifted = lattice_shift(b, -b.r - b.s1)
    if shifted > stable:
        raise AssertionError(f"shifted bound {shifted} exceeds the stable bound {stable}")
    return stable


def degree_inequality_ok(p: int, n: int) -> bool:
    """p^(n-1) + p - 2 <= [F_n:F]."""
    return p ** (n - 1) + p - 2 <= tower_degree(p, n)


# -- modular forms ---------------------------------------------------------

def _check_weight(p: int, k: int) -> None:
    if p < 3 or not is_prime(p):
        raise DomainError("p must be an odd prime")
    if k % 2:
        raise DomainError(f"weight k={k} must be even")
    if not 2 <= k <= p - 1:
        raise DomainError(f"weight k={k} violates 2 <= k <= p - 1 (Fontaine-Laffaille range)")


def modular_form_inputs(p: int, k: int, e: int, n: int) -> BoundInputs:
    """r = 1, s1 = s2 = k/2 - 1, d' = e, det_val = -e."""
    _check_weight(p, k)
    h = k // 2
    return BoundInputs(p=p, n=n, d=2 * e, d_prime=e, r=1, s1=h - 1, s2=h - 1, det_val=-e,
                       nu_times_e=e, k=k)


def modular_form_exponent(p: int, k: int, e: int, n: int) -> int:
    """(k/2 (p - 1)(p^(n-1) + 1) - p^(n-1)(p - 2)) e."""
    _check_weight(p, k)
    if n < 1:
        raise DomainError("level must be >= 1")
    return (k // 2 * (p - 1) * (p ** (n - 1) + 1) - p ** (n - 1) * (p - 2)) * e


def laurent_exponent(p: int, k: int, e: int, n: int, base_degree: int = 1) -> int:
    """(n + 1/2) e [F_n:Q_p] (k - 2); an integer because [F_n:Q_p] is even."""
    _check_weight(p, k)
    deg = tower_degree(p, n) * base_degree
    value = Fraction(2 * n + 1, 2) * e * deg * (k - 2)
    if value.denominator != 1:
        raise AssertionError("Laurent exponent is not an integer")
    return int(value)


def crossover(p: int, k: int, e: int, n_max: int = 6, base_degree: int = 1) -> int | None:
    """First n such that the new exponent is below Laurent's for every level n..n_max."""
    first = None
    for n in range(1, n_max + 1):
        if modular_form_exponent(p, k, e, n) < laurent_exponent(p, k, e, n, base_degree):
            if first is None:
                first = n
        else:
            first = None
    return first


def comparison_table(p: int, k: int, e: int, n_max: int, base_degree: int = 1) -> list[dict]:
    rows = []
    for n in range(1, n_max + 1):
        new = modular_form_exponent(p, k, e, n)
        old = laurent_exponent(p, k, e, n, base_degree)
        winner = "new" if new < old else "laurent" if old < new else "tie"
        rows.append({"p": p, "k": k, "e": e, "n": n, "new_exponent": new,
                     "laurent_exponent": old, "winner": winner})
    return rows


# -- Laurent's general bound -------------------------------------------------

def laurent_alpha(weights, d: int, d_prime: int, b: int | None = None) -> int:
    """alpha = -sum r_i + (b - 1) d + d'; b defaults to the largest weight."""
    weights = list(weights)
    if b is None:
        b = max(weights) if weights else 0
    return -sum(weights) + (b - 1) * d + d_prime


def laurent_general_exponent(p: int, n: int, weights, d: int, d_prime: int, base_degree: int = 1,
                             b: int | None = None, j_n: Fraction | int = 0) -> Fraction:
    """[F_n:Q_p] n alpha plus the exponent of the opaque factor j_n."""
    deg = tower_degree(p, n) * base_degree
    return Fraction(deg * n * laurent_alpha(weights, d, d_prime, b)) + Fraction(j_n)


def eventually_dominates(b: BoundInputs, weights, base_degree: int = 1, n_max: int = 8,
                         wb: int | None = None) -> int | None:
    """Smallest n0 <= n_max from which Laurent's general exponent exceeds the
    general bound at every level up to n_max (None if there is none)."""
    first = None
    for n in range(1, n_max + 1):
        ours = general_bound_exponent(b.at_level(n))
        theirs = laurent_general_exponent(b.p, n, weights, b.d, b.d_prime, base_degree, wb)
        if ours < theirs:
            if first is None:
                first = n
        else:
            first = None
    return first
