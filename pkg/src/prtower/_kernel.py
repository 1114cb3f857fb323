"""Integer-vector kernels: Kronecker-packed products and cached operator tables.

Everything here works on lists of non-negative Python ints reduced modulo
some ``mod``.  Polynomials are packed into one big integer with fixed slot
width so a truncated product is a single big-int multiplication.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb


def slot_bytes(mod: int, terms: int) -> int:
    bits = 2 * mod.bit_length() + terms.bit_length() + 1
    return (bits + 7) // 8


def pack(coeffs, nbytes: int) -> int:
    return int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in coeffs), "little")


def unpack(x: int, nbytes: int, n: int, mod: int) -> list[int]:
    raw = (x & ((1 << (8 * nbytes * n)) - 1)).to_bytes(nbytes * n, "little")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") % mod for i in range(n)]


def mul_trunc(a: list[int], b: list[int], n: int, mod: int) -> list[int]:
    """(a * b) mod (x^n, mod) for coefficient lists of non-negative ints."""
    a = a[:n]
    b = b[:n]
    if not a or not b:
        return [0] * n
    nb = slot_bytes(mod, min(len(a), len(b)))
    prod = pack(a, nb) * pack(b, nb)
    return unpack(prod & ((1 << (8 * nb * n)) - 1), nb, n, mod)


def inverse_trunc(a: list[int], n: int, mod: int) -> list[int]:
    """Inverse of a power series with unit constant term, modulo (x^n, mod)."""
    inv0 = pow(a[0], -1, mod)
    z = [inv0]
    k = 1
    while k < n:
        k = min(2 * k, n)
        az = mul_trunc(a[:k], z + [0] * (k - len(z)), k, mod)
        # z <- z * (2 - a z)
        two_minus = [(-c) % mod for c in az]
        two_minus[0] = (two_minus[0] + 2) % mod
        z = mul_trunc(z + [0] * (k - len(z)), two_minus, k, mod)
    return z[:n] + [0] * (n - len(z))


def linear_combination(coeffs: list[int], rows: tuple[int, ...], nbytes: int, n: int, mod: int) -> list[int]:
    """sum_m coeffs[m] * row_m where rows are packed with slot width nbytes."""
    acc = 0
    for c, row in zip(coeffs, rows):
        if c:
            acc += c * row
    return unpack(acc, nbytes, n, mod)


_ROW_CACHE: dict = {}
_ROW_CACHE_KEYS = 6


def _bucket(modexp: int) -> int:
    b = 16
    while b < modexp:
        b *= 2
    return b


def compose_rows(p: int, D: int, modexp: int, base: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    """Packed rows base^m mod (pi^D, p^R) for m < D, where R >= modexp is a
    power-of-two bucket (base has no constant term).

    Tables at a lower precision are derived from a cached higher one by
    reducing slots, which is much cheaper than recomputing the powers.
    """
    R = _bucket(modexp)
    key = (p, D, base)
    tables = _ROW_CACHE.get(key)
    if tables is None:
        if len(_ROW_CACHE) >= _ROW_CACHE_KEYS:
            _ROW_CACHE.pop(next(iter(_ROW_CACHE)))
        tables = _ROW_CACHE[key] = {}
    if R in tables:
        return tables[R]
    mod = p ** R
    nb = slot_bytes(mod, D)
    higher = sorted(x for x in tables if x > R)
    if higher:
        src_rows, src_nb = tables[higher[0]]
        rows = tuple(pack(unpack(row, src_nb, D, mod), nb) for row in src_rows)
    else:
        b = [x % mod for x in base[:D]] + [0] * max(0, D - len(base))
        out = []
        cur = [1] + [0] * (D - 1)
        for _ in range(D):
            out.append(pack(cur, nb))
            cur = mul_trunc(cur, b, D, mod)
        rows = tuple(out)
    tables[R] = (rows, nb)
    return tables[R]


def phi_rows(p: int, D: int, modexp: int) -> tuple[tuple[int, ...], int]:
    """Packed rows phi(pi)^m = ((1+pi)^p - 1)^m mod (pi^D, p^modexp)."""
    base = tuple(comb(p, i) if i else 0 for i in range(min(p, D - 1) + 1))
    return compose_rows(p, D, modexp, base)


@lru_cache(maxsize=16)
def psi_table(p: int, D: int, Dout: int, modexp: int, extra: int = 0) -> list[list[int]]:
    """psi(pi^m) in the pi-basis truncated at Dout, for m < D + extra.

    Uses psi(pi^m) = (-1)^m for m < p and, from pi^p = phi(pi) - p R(pi),
    psi(pi^(m+p)) = pi psi(pi^m) - sum_{0<i<p} C(p, i) psi(pi^(m+i)).
    """
    mod = p ** modexp
    total = D + extra
    rows: list[list[int]] = []
    for m in range(min(p, total)):
        rows.append([(-1) ** m % mod] + [0] * (Dout - 1))
    binoms = [comb(p, i) for i in range(p)]
    for m in range(p, total):
        base = m - p
        shifted = [0] + rows[base][:Dout - 1]
        new = shifted
        for i in range(1, p):
            r = rows[base + i]
            b = binoms[i]
            new = [(x - b * y) for x, y in zip(new, r)]
        rows.append([x % mod for x in new])
    return rows


@lru_cache(maxsize=16)
def psi_rows_packed(p: int, D: int, Dout: int, modexp: int) -> tuple[tuple[int, ...], int]:
    mod = p ** modexp
    nb = slot_bytes(mod, D)
    rows = psi_table(p, D, Dout, modexp)
    return tuple(pack(r, nb) for r in rows[:D]), nb


@lru_cache(maxsize=64)
def cyclotomic_in_pi(p: int, n: int) -> tuple[int, ...]:
    """Exact integer coefficients of Phi_{p^n}(1 + X)."""
    deg = (p - 1) * p ** (n - 1)
    step = p ** (n - 1)
    out = [0] * (deg + 1)
    for k in range(p):
        e = k * step
        for j in range(e + 1):
            out[j] += comb(e, j)
    return tuple(out)
