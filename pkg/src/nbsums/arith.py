"""Exact integer arithmetic: Moebius and divisor sieves, modular inverses and
the coefficients of Vaughan's identity.

Everything here is integer-valued; no floating point enters the tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np


@dataclass(frozen=True)
class MoebiusTable:
    """mu(n) for 0 <= n <= limit (index 0 is a zero placeholder)."""

    limit: int
    values: np.ndarray  # int8

    def __getitem__(self, n):
        return self.values[n]


@dataclass(frozen=True)
class DivisorTables:
    limit: int
    d: np.ndarray  # int64, d[n] = number of divisors
    d4: np.ndarray  # int64, d4[n] = number of ordered 4-factorisations


@dataclass(frozen=True)
class VaughanParams:
    """Cutoff ``w`` of Vaughan's identity; a real number, compared as ``d <= w``."""

    w: float

    def __post_init__(self):
        if not self.w >= 2:
            raise ValueError(f"Vaughan cutoff must satisfy w >= 2, got {self.w!r}")


@dataclass(frozen=True)
class VaughanTable:
    """c1, c2, c3 for 0 <= h <= limit, built by Dirichlet convolution."""

    limit: int
    params: VaughanParams
    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray


def _check_limit(limit: int) -> int:
    limit = int(limit)
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    return limit


def prime_sieve(limit: int) -> np.ndarray:
    """Primes <= limit (Eratosthenes)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def moebius_sieve(limit: int) -> MoebiusTable:
    limit = _check_limit(limit)
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    for p in prime_sieve(limit):
        p = int(p)
        mu[p::p] *= -1
        if p * p <= limit:
            mu[p * p :: p * p] = 0
    return MoebiusTable(limit, mu)


@lru_cache(maxsize=8)
def _cached_moebius(limit: int) -> MoebiusTable:
    return moebius_sieve(limit)


def moebius(n: int) -> int:
    """mu(n) by trial division; for one-off values."""
    if n < 1:
        raise ValueError("mu is defined for n >= 1")
    sign = 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            sign = -sign
        p += 1
    return -sign if n > 1 else sign


def divisor_tables(limit: int) -> DivisorTables:
    limit = _check_limit(limit)
    d = np.zeros(limit + 1, dtype=np.int64)
    root = int(limit**0.5)
    while (root + 1) ** 2 <= limit:
        root += 1
    # pairs (i, n/i) with i < n/i, then the square roots
    for i in range(1, root + 1):
        d[i * i :: i] += 2
        d[i * i] -= 1
    d4 = np.zeros(limit + 1, dtype=np.int64)
    for a in range(1, root + 1):
        m = limit // a
        d4[a * a] += d[a] * d[a]
        if m > a:
            d4[a * (a + 1) :: a][: m - a] += 2 * d[a] * d[a + 1 : m + 1]
    return DivisorTables(limit, d, d4)


def d4_from_factorisation(n: int) -> int:
    """d4(n) = prod C(e+3, 3) over prime powers p^e || n."""
    out = 1
    for _, e in factorise(n):
        out *= comb(e + 3, 3)
    return out


def mod_inverse(h: int, k: int) -> int:
    if k < 2:
        raise ValueError(f"modulus must be >= 2, got {k}")
    try:
        return pow(h, -1, k)
    except ValueError:
        raise ValueError(f"{h} is not invertible modulo {k}") from None


def factorise(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def divisors_with_mu(n: int) -> list[tuple[int, int]]:
    """All (d, mu(d)) with d | n, sorted by d."""
    divs = [(1, 1)]
    for p, e in factorise(n):
        nxt = []
        for d, m in divs:
            pk = 1
            for j in range(e + 1):
                nxt.append((d * pk, m if j == 0 else (-m if j == 1 else 0)))
                pk *= p
        divs = nxt
    return sorted(divs)


def c4(alpha: int, params: VaughanParams) -> int:
    """-sum of mu(d1) over d1 | alpha with d1 <= w."""
    return -sum(m for d, m in divisors_with_mu(alpha) if d <= params.w)


def _truncated_divisor_sum(n: int, w: float) -> int:
    # sum of mu(d) over d | n, d <= w
    return sum(m for d, m in divisors_with_mu(n) if d <= w)


def vaughan_c(h: int, params: VaughanParams) -> tuple[int, int, int]:
    """(c1(h), c2(h), c3(h)) by direct enumeration of the triples alpha*beta*gamma = h."""
    if h < 1:
        raise ValueError("h must be >= 1")
    w = params.w
    divs = divisors_with_mu(h)
    mu_of = dict(divs)
    c1 = 0
    c3 = 0
    for alpha, mu_a in divs:
        rest = h // alpha
        for beta, mu_b in divisors_with_mu(rest):
            gamma = rest // beta
            if alpha >= w and beta >= w:
                c1 += mu_of[gamma] * c4(alpha, params) * c4(beta, params)
            if alpha <= w and beta <= w:
                c3 -= mu_a * mu_b
    c2 = 2 * mu_of[h] if h <= w else 0
    return c1, c2, c3


def vaughan_coeff_A(u: int, params: VaughanParams) -> int:
    """A(u): sum over st = u of the two truncated Moebius divisor sums of s and t."""
    if u < 1:
        raise ValueError("u must be >= 1")
    total = 0
    for s, _ in divisors_with_mu(u):
        total += _truncated_divisor_sum(s, params.w) * _truncated_divisor_sum(u // s, params.w)
    return total


def dirichlet_convolve(f: np.ndarray, g: np.ndarray, limit: int) -> np.ndarray:
    """(f * g)(n) for n <= limit; arrays are indexed from 0 with index 0 ignored."""
    out = np.zeros(limit + 1, dtype=np.int64)
    g_nz = np.flatnonzero(g[1 : limit + 1])
    if g_nz.size == 0:
        return out
    g_min = int(g_nz[0]) + 1
    for a in np.flatnonzero(f[1 : limit // g_min + 1]) + 1:
        a = int(a)
        m = limit // a
        out[a::a][:m] += int(f[a]) * g[1 : m + 1]
    return out


def truncated_moebius(limit: int, w: float) -> np.ndarray:
    """mu(d) * [d <= w] as an array over 0..limit."""
    mu = _cached_moebius(max(limit, 1)).values
    out = np.zeros(limit + 1, dtype=np.int64)
    top = min(limit, int(np.floor(w)))
    out[1 : top + 1] = mu[1 : top + 1]
    return out


def c4_table(limit: int, w: float) -> np.ndarray:
    """c4(alpha) for alpha <= limit (zero at index 0)."""
    out = np.zeros(limit + 1, dtype=np.int64)
    m = truncated_moebius(limit, w)
    for d in np.flatnonzero(m) :
        d = int(d)
        out[d::d] -= m[d]
    return out


def vaughan_table(limit: int, params: VaughanParams) -> VaughanTable:
    """c1, c2, c3 for all h <= limit.

    c1 = mu * c4w * c4w with c4w = c4 * [alpha >= w], c3 = -(mw * mw * 1)
    with mw the Moebius function truncated at w.
    """
    limit = _check_limit(limit)
    w = params.w
    mu = _cached_moebius(limit).values.astype(np.int64)
    c4w = c4_table(limit, w)
    c4w[: min(limit + 1, int(np.ceil(w)))] = 0
    c1 = dirichlet_convolve(dirichlet_convolve(mu, c4w, limit), c4w, limit)
    c2 = np.zeros(limit + 1, dtype=np.int64)
    top = min(limit, int(np.floor(w)))
    c2[1 : top + 1] = 2 * mu[1 : top + 1]
    mw = truncated_moebius(limit, w)
    ones = np.ones(limit + 1, dtype=np.int64)
    ones[0] = 0
    c3 = -dirichlet_convolve(dirichlet_convolve(mw, mw, limit), ones, limit)
    return VaughanTable(limit, params, c1, c2, c3)


def bilinear_table(limit: int, params: VaughanParams) -> np.ndarray:
    """a(u) = sum over st = u, s >= w, t >= w of c4(s) c4(t).

    This is the weight attached to u = st in the (s, t, gamma) form of the
    c1 part: c1(h) = sum_{u gamma = h} mu(gamma) a(u).
    """
    limit = _check_limit(limit)
    c4w = c4_table(limit, params.w)
    c4w[: min(limit + 1, int(np.ceil(params.w)))] = 0
    return dirichlet_convolve(c4w, c4w, limit)
