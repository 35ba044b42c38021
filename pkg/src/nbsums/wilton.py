"""Wilton's function and the Balazard-Martin representation of g.

The autocorrelation A(lambda) = int_0^oo {t}{lambda t} dt / t^2 is computed
by exact integration between consecutive breakpoints of {t} and
{lambda t}. Beyond the cut T the fast factor {t} is replaced by its mean
1/2, which leaves a closed form, plus the mean correlation 1/(12pq) of
({t} - 1/2)({lambda t} - 1/2) when lambda = p/q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import digamma

from .contfrac import cf_rational, cf_real, gauss_map


class QuadratureError(ArithmeticError):
    """Requested accuracy not reachable within the segment budget."""


class DepthExhausted(ValueError):
    """The argument has too few continued-fraction levels for the request."""


class SeriesValue(NamedTuple):
    value: float
    error: float  # truncation bound or last-term proxy; 0.0 for exact finite sums


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-9
    segment_limit: int = 20_000_000
    tail_cut: float = 1e4

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not self.tail_cut >= 10:
            raise ValueError("tail cut T must be >= 10")
        if self.segment_limit < 100:
            raise ValueError("segment_limit too small")


DEFAULT_SPEC = QuadratureSpec()
A_ONE_SPEC = QuadratureSpec(abs_tol=1e-11, tail_cut=1e4)
# C is read off at h >= 1e-4, so 1e-8 in A moves it by at most 2e-4
CONTINUITY_SPEC = QuadratureSpec(abs_tol=1e-8)


def _as_rational(lam) -> Fraction | None:
    if isinstance(lam, Rational):
        return Fraction(lam)
    snapped = Fraction(lam).limit_denominator(10**6)
    if snapped != 0 and abs(float(snapped) - lam) <= 4e-16 * max(1.0, abs(lam)):
        return snapped
    return None


def _A_partial(lam: float, T: int) -> tuple[float, float, int]:
    """Integral over [0, T] and [0, T/2] for 0 < lam <= 1; T even."""
    ints = np.arange(1, T + 1, dtype=float)
    nb = int(math.floor(lam * T))
    if nb:
        br = np.union1d(ints, np.arange(1, nb + 1, dtype=float) / lam)
    else:
        br = ints
    br = br[br <= T]
    a, b = br[:-1], br[1:]
    c = 0.5 * (a + b)
    m = np.floor(c)
    n = np.floor(lam * c)
    d = b - a
    # on [a, b]: (t - m)(lam t - n) / t^2 = lam - (lam m + n)/t + m n / t^2
    piece = lam * d - (lam * m + n) * np.log1p(d / a) + m * n * d / (a * b)
    first = lam * br[0]
    half = int(np.searchsorted(br, T // 2, side="right")) - 1
    full = first + math.fsum(piece)
    halfway = first + math.fsum(piece[:half])
    return full, halfway, br.size


def _frac_over_square_tail(x: float) -> float:
    """int_x^oo {u} / u^2 du."""
    if x < 1:
        return 1 - np.euler_gamma - math.log(x)
    n = math.floor(x)
    # 1 - gamma - int_1^x {u}/u^2 du, with H_n = psi(n+1) + gamma
    return (1 - n / x) + (digamma(n + 1) - math.log(x))


def _A_tail(lam: float, T: int, corr: float) -> float:
    return 0.5 * lam * _frac_over_square_tail(lam * T) + corr / T


def autocorr_A_estimate(lam, spec: QuadratureSpec = DEFAULT_SPEC) -> SeriesValue:
    """A(lambda) with an error estimate from comparing cuts T and T/2."""
    if lam < 0:
        raise ValueError("A is defined for lambda >= 0")
    if lam == 0:
        return SeriesValue(0.0, 0.0)
    exact = _as_rational(lam)
    if lam > 1:
        inv = 1 / exact if exact is not None else 1.0 / lam
        scale = float(lam)
        inner = autocorr_A_estimate(inv, QuadratureSpec(spec.abs_tol / scale, spec.segment_limit, spec.tail_cut))
        return SeriesValue(scale * inner.value, scale * inner.error)
    corr = 0.0
    if exact is not None:
        corr = 1.0 / (12 * exact.numerator * exact.denominator)
    lam_f = float(lam)
    T = 2 * math.ceil(spec.tail_cut / 2)
    while True:
        if T * (1 + lam_f) > spec.segment_limit:
            raise QuadratureError(
                f"A({lam}) needs more than {spec.segment_limit} segments for tolerance {spec.abs_tol}")
        full, half, _ = _A_partial(lam_f, T)
        full += _A_tail(lam_f, T, corr)
        half += _A_tail(lam_f, T // 2, corr)
        err = abs(full - half) / 3
        if err <= spec.abs_tol:
            return SeriesValue(full, err)
        T *= 4


@lru_cache(maxsize=65536)
def autocorr_A(lam, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return autocorr_A_estimate(lam, spec).value


@lru_cache(maxsize=1)
def A_one() -> float:
    """A(1), computed once to ~1e-11."""
    return autocorr_A_estimate(1, A_ONE_SPEC).value


def F_func(x, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """F(x) = (x+1)/2 A(1) - A(x) - x/2 log x, with F(0) = A(1)/2."""
    if x < 0:
        raise ValueError("F is defined for x >= 0")
    a1 = A_one()
    if x == 0:
        return a1 / 2
    xf = float(x)
    return (xf + 1) / 2 * a1 - autocorr_A(x, spec) - xf / 2 * math.log(xf)


@lru_cache(maxsize=1)
def F_sup_bound() -> float:
    """Observed sup of |F| on a grid of [0, 1]; used to bound truncated G sums."""
    grid = [Fraction(j, 64) for j in range(65)]
    return max(abs(F_func(x)) for x in grid) * 1.05


def G_func(x, depth_cap: int = 60, spec: QuadratureSpec = DEFAULT_SPEC) -> SeriesValue:
    """G(x) = sum_j (-1)^j beta_{j-1} F(alpha_j(x)).

    Rationals use the exact finite sum j = 0..L (alpha_L = 0 contributes
    F(0)); floats stop once beta_{j-1} < abs_tol/10 or at ``depth_cap``.
    """
    if depth_cap < 1:
        raise ValueError("depth_cap must be >= 1")
    if isinstance(x, Rational):
        exp = cf_rational(Fraction(x))
        total = math.fsum((-1) ** j * float(exp.beta(j - 1)) * F_func(exp.alphas[j], spec)
                          for j in range(exp.depth + 1))
        return SeriesValue(total, 0.0)
    exp = cf_real(x, depth_cap)
    terms = []
    beta_prev = 1.0
    for j, alpha in enumerate(exp.alphas):
        if beta_prev < spec.abs_tol / 10:
            break
        terms.append((-1) ** j * beta_prev * F_func(alpha, spec))
        beta_prev = exp.betas[j]
    bound = 0.0 if exp.truncated else beta_prev * F_sup_bound()
    return SeriesValue(math.fsum(terms), bound)


def delta_func(x) -> float:
    """(-1)^(L+1) A(1) / (2q) at a rational p/q of depth L in [0, 1]; 0 at irrationals."""
    if not isinstance(x, Rational):
        return 0.0
    x = Fraction(x)
    if not 0 <= x <= 1:
        raise ValueError("delta is defined on [0, 1]")
    depth = 1 if x == 1 else cf_rational(x).depth
    return (-1) ** (depth + 1) * A_one() / (2 * x.denominator)


def wilton_W(x, n_terms: int = 60) -> SeriesValue:
    """W(x) = sum_l (-1)^l gamma_l(x).

    For a rational of depth L the sum is exact over l < L (gamma_L would
    need log(1/alpha_L) with alpha_L = 0). For floats, ``n_terms`` terms are
    summed and the magnitude of the last one is returned as ``error``.
    """
    if isinstance(x, Rational):
        x = Fraction(x)
        if not 0 < x < 1:
            raise ValueError("W is evaluated on (0, 1)")
        exp = cf_rational(x)
        return SeriesValue(math.fsum((-1) ** l * g for l, g in enumerate(exp.gammas)), 0.0)
    exp = cf_real(x, n_terms)
    gammas = exp.gammas[:n_terms]
    value = math.fsum((-1) ** l * g for l, g in enumerate(gammas))
    return SeriesValue(value, 0.0 if exp.truncated else abs(gammas[-1]))


def transfer_power(f: Callable, x, n: int):
    """(T^n f)(x) for T f(x) = x f(alpha(x)), unrolled step by step."""
    scale = 1
    y = x
    for _ in range(n):
        if y == 0:
            raise DepthExhausted(f"{x} has fewer than {n} continued-fraction levels")
        scale = scale * y
        y = gauss_map(y)
    return float(scale) * f(y)


def log_inv(x) -> float:
    """l(x) = log(1/x)."""
    if x == 0:
        raise DepthExhausted("l(0) is infinite")
    if isinstance(x, Fraction):
        return math.log(x.denominator) - math.log(x.numerator)
    return -math.log(x)


def apply_T_log(x, n: int) -> float:
    if n < 0:
        raise ValueError("n must be >= 0")
    return transfer_power(log_inv, x, n)


def L_partial(x, n: int) -> float:
    """sum_{nu=0}^{n} (-1)^nu (T^nu l)(x)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return math.fsum((-1) ** nu * apply_T_log(x, nu) for nu in range(n + 1))


def g_via_wilton(r, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """g(r) = W(r) - 2 G(r) - 2 delta(r) for a rational r in (0, 1)."""
    r = Fraction(r)
    if not 0 < r < 1:
        raise ValueError("g_via_wilton expects a rational in (0, 1)")
    return wilton_W(r).value - 2 * G_func(r, spec=spec).value - 2 * delta_func(r)


def continuity_profile(lams, hs, spec: QuadratureSpec = CONTINUITY_SPEC) -> dict[float, float]:
    """For each h, the smallest C with |A(l+h) - A(l)| <= h log(1/h)/2 + C h over ``lams``."""
    out = {}
    base = {lam: autocorr_A(lam, spec) for lam in lams}
    for h in hs:
        worst = max(abs(autocorr_A(lam + h, spec) - base[lam]) for lam in lams)
        out[h] = (worst - 0.5 * h * math.log(1 / h)) / h
    return out
