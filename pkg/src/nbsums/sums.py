"""Vasyunin and cotangent sums, the Estermann sine series, and g.

Conventions (fixed by the tests):

    V(h/k)  = sum_{m=1}^{k-1} {m h / k} cot(pi m / k)
    c0(h/k) = -sum_{l=1}^{k-1} (l / k) cot(pi h l / k)
    g(x)    = sum_{l>=1} (1 - 2{l x}) / l, with the summand set to 0 when l x is an integer

so that V(h/k) = -c0(hbar/k) and g(h/k) = -(pi/k) V(h/k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np
from scipy.special import digamma

from .arith import divisor_tables
from .wilton import SeriesValue


@dataclass(frozen=True)
class GTable:
    """g(r/k) for r = 0..k-1."""

    k: int
    values: np.ndarray

    def __getitem__(self, r):
        return self.values[r % self.k]


def _reduced(r) -> tuple[int, int]:
    r = Fraction(r)
    return r.numerator, r.denominator


def _check_denominator(k: int) -> None:
    if k < 2:
        raise ValueError(f"denominator must be >= 2, got {k}")


def vasyunin_V(r) -> float:
    h, k = _reduced(r)
    _check_denominator(k)
    m = np.arange(1, k, dtype=np.int64)
    frac = ((m * h) % k) / k
    return math.fsum(frac / np.tan(np.pi * m / k))


def vasyunin_V_reduced(h: int, k: int) -> float:
    """V(h/k) after reducing h/k; an empty sum (0) when the reduced denominator is 1."""
    g = math.gcd(h, k)
    if k // g == 1:
        return 0.0
    return vasyunin_V(Fraction(h, k))


def cotangent_c0(r) -> float:
    h, k = _reduced(r)
    _check_denominator(k)
    l = np.arange(1, k, dtype=np.int64)
    # reduce hl mod k before scaling by pi to keep the argument small
    arg = np.pi * ((h * l) % k) / k
    return -math.fsum((l / k) / np.tan(arg))


def _psi_weights(k: int) -> np.ndarray:
    return digamma(np.arange(1, k, dtype=np.int64) / k)


def g_rational(r) -> float:
    """g(h/k) = (2/k) sum_{j=1}^{k-1} ({jh/k} - 1/2) psi(j/k); 0 at integers."""
    if isinstance(r, int):
        return 0.0
    h, k = _reduced(r)
    if k == 1:
        return 0.0
    j = np.arange(1, k, dtype=np.int64)
    # 2({jh/k} - 1/2) = (2 (jh mod k) - k) / k, kept integral for exact antisymmetry
    weights = 2 * ((j * h) % k) - k
    return math.fsum(weights * _psi_weights(k)) / (k * k)


def g_table(k: int, block: int = 1 << 21) -> GTable:
    """All g(r/k), r = 0..k-1, in O(k^2) with one shared digamma vector."""
    if k < 1:
        raise ValueError("modulus must be >= 1")
    values = np.zeros(k)
    if k == 1:
        return GTable(1, values)
    j = np.arange(1, k, dtype=np.int64)
    psi = _psi_weights(k)
    rows = max(1, block // k)
    for r0 in range(1, k, rows):
        r = np.arange(r0, min(k, r0 + rows), dtype=np.int64)
        res = np.outer(r, j) % k
        # residue 0 occurs only for r sharing a factor with k; the sawtooth vanishes there
        weights = np.where(res == 0, 0, 2 * res - k)
        values[r0 : r0 + r.size] = (weights * psi).sum(axis=1)
    values /= k * k
    return GTable(k, values)


@lru_cache(maxsize=64)
def cached_g_table(k: int) -> GTable:
    return g_table(k)


def g_series(x, L_terms: int) -> SeriesValue:
    """Truncated series for g with Cesaro averaging over the final block.

    The partial sums S_l for the last ceil(sqrt(L)) values of l are
    averaged; ``error`` is their spread (max - min).
    Rationals are evaluated with exact residues; for floats, l x within
    1e-9 of an integer counts as an integer.
    """
    if L_terms < 10:
        raise ValueError("L_terms must be >= 10")
    l = np.arange(1, L_terms + 1, dtype=np.int64)
    if isinstance(x, Rational):
        h, k = _reduced(Fraction(x))
        res = (l * h) % k
        terms = np.where(res == 0, 0.0, (k - 2 * res) / k) / l
    else:
        if x <= 0:
            raise ValueError("g_series expects x > 0")
        frac_x = x - math.floor(x)
        frac = np.mod(l * frac_x, 1.0)
        near_int = (frac < 1e-9) | (frac > 1 - 1e-9)
        terms = np.where(near_int, 0.0, 1 - 2 * frac) / l
    partial = np.cumsum(terms)
    block = math.ceil(math.sqrt(L_terms))
    tail = partial[-block:]
    return SeriesValue(float(tail.mean()), float(tail.max() - tail.min()))


def estermann_Dsin1(r, N_terms: int) -> SeriesValue:
    """D_sin(1, h/k) = sum d(n) sin(2 pi n h/k) / n, block-averaged like :func:`g_series`."""
    if N_terms < 100:
        raise ValueError("N_terms must be >= 100")
    h, k = _reduced(r)
    n = np.arange(1, N_terms + 1, dtype=np.int64)
    d = divisor_tables(N_terms).d[1:]
    sines = np.sin(2 * np.pi * np.arange(k) / k)
    if k <= 2:
        sines[:] = 0.0  # sin(pi n) vanishes identically
    partial = np.cumsum(d * sines[(n * h) % k] / n)
    block = math.ceil(math.sqrt(N_terms))
    tail = partial[-block:]
    return SeriesValue(float(tail.mean()), float(tail.max() - tail.min()))
