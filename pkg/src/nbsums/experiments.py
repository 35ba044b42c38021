"""Sweeps of the Moebius-weighted sum of g, its Vaughan decomposition,
truncated Vasyunin sums and Monte Carlo statistics of continued fractions.

The windowed Moebius sum is

    S(B, k, eta) = sum_{Bk <= h < (1+eta)Bk} mu(h) g(h/k)

and its decomposition uses mu = c1 + c2 + c3. The c1 part is also summed in
bilinear form, c1(h) = sum_{u gamma = h} mu(gamma) a(u), split at u >= theta.
"""

from __future__ import annotations

import math
import os
import re
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .arith import (VaughanParams, _cached_moebius, bilinear_table, dirichlet_convolve,
                    prime_sieve, vaughan_table)
from .contfrac import cf_real, convergents, make_cell
from .sums import cached_g_table, g_table, vasyunin_V_reduced

DECOMPOSITION_RTOL = 1e-9


class DecompositionError(ArithmeticError):
    """An exact decomposition identity failed beyond rounding."""


class FitError(ValueError):
    pass


# ---------------------------------------------------------------- sweep types

def parse_B_rule(rule) -> Callable[[int], Fraction]:
    """B as a function of k: a number, ``"k"`` or ``"k^c"``."""
    if callable(rule):
        return rule
    if isinstance(rule, (int, float, Fraction)):
        value = Fraction(rule)
        return lambda k: value
    text = str(rule).replace(" ", "")
    if text == "k":
        return lambda k: Fraction(k)
    m = re.fullmatch(r"k(?:\^|\*\*)([0-9.]+)", text)
    if m:
        c = float(m.group(1))
        return lambda k: Fraction(k**c)
    try:
        value = Fraction(text)
    except ValueError:
        raise ValueError(f"cannot parse B rule {rule!r}") from None
    return lambda k: value


@dataclass(frozen=True)
class SweepSpec:
    ks: tuple[int, ...]
    B_rule: object = "k"
    eta: float = 1.0
    w: float = 10.0
    theta: float = 1e4
    seed: int = 0

    def __post_init__(self):
        if not self.ks:
            raise ValueError("empty k list")
        if any(k < 2 for k in self.ks):
            raise ValueError("moduli must be >= 2")
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")
        if self.theta < 1:
            raise ValueError("theta must be >= 1")
        VaughanParams(self.w)
        rule = parse_B_rule(self.B_rule)
        for k in self.ks:
            if Fraction(self.eta) * rule(k) * k < 1:
                raise ValueError(f"eta*B*k < 1 at k = {k}")

    def B(self, k: int) -> Fraction:
        return parse_B_rule(self.B_rule)(k)


@dataclass(frozen=True)
class SweepRow:
    k: int
    B: float
    eta: float
    terms: int
    S: float
    sigma1: float
    sigma2: float
    sigma3: float
    sigma11: float
    sigma12: float
    max_g: float
    seconds: float = 0.0

    @property
    def length(self) -> float:
        """eta B k."""
        return self.eta * self.B * self.k


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[SweepRow] = field(default_factory=list)


def h_range(B, k: int, eta) -> tuple[int, int]:
    """[lo, hi) of integers h with Bk <= h < (1+eta)Bk, computed exactly."""
    B, eta = Fraction(B), Fraction(eta)
    lo = math.ceil(B * k)
    hi = math.ceil((1 + eta) * B * k)
    return lo, max(lo, hi)


# ---------------------------------------------------------------- the sums

def _g_values(k: int, lo: int, hi: int) -> np.ndarray:
    return cached_g_table(k).values[np.arange(lo, hi) % k]


def theorem_sum(B, k: int, eta) -> float:
    """sum mu(h) g(h/k) over Bk <= h < (1+eta)Bk, ascending h, compensated."""
    lo, hi = h_range(B, k, eta)
    if hi <= lo:
        warnings.warn(f"empty range for B={B}, k={k}, eta={eta}", RuntimeWarning, stacklevel=2)
        return 0.0
    mu = _cached_moebius(hi).values[lo:hi]
    return math.fsum(mu * _g_values(k, lo, hi))


@dataclass(frozen=True)
class _SharedTables:
    limit: int
    w: float
    theta: float
    mu: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    c3: np.ndarray
    c1_high: np.ndarray  # bilinear part with u >= theta
    c1_low: np.ndarray  # u < theta


_TABLE_CACHE: dict = {}


def _shared_tables(limit: int, w: float, theta: float) -> _SharedTables:
    key = (w, theta)
    hit = _TABLE_CACHE.get(key)
    if hit is not None and hit.limit >= limit:
        return hit
    params = VaughanParams(w)
    vt = vaughan_table(limit, params)
    a = bilinear_table(limit, params)
    cut = min(limit + 1, math.ceil(theta))
    a_low, a_high = a.copy(), a.copy()
    a_low[cut:] = 0
    a_high[:cut] = 0
    mu = _cached_moebius(limit).values.astype(np.int64)
    tables = _SharedTables(limit, w, theta, mu, vt.c1, vt.c2, vt.c3,
                           dirichlet_convolve(mu, a_high, limit),
                           dirichlet_convolve(mu, a_low, limit))
    _TABLE_CACHE[key] = tables
    return tables


def _check_identity(total: float, parts: Sequence[float], mass: float, what: str) -> None:
    diff = abs(math.fsum(parts) - total)
    if diff > DECOMPOSITION_RTOL * max(1.0, mass):
        raise DecompositionError(f"{what}: parts differ from total by {diff:.3e}")


def _row(k: int, B: Fraction, eta, tables: _SharedTables, timed: bool) -> SweepRow:
    t0 = time.perf_counter()
    lo, hi = h_range(B, k, eta)
    gv = _g_values(k, lo, hi)
    sl = slice(lo, hi)
    S = math.fsum(tables.mu[sl] * gv)
    s1, s2, s3 = (math.fsum(c[sl] * gv) for c in (tables.c1, tables.c2, tables.c3))
    s11 = math.fsum(tables.c1_high[sl] * gv)
    s12 = math.fsum(tables.c1_low[sl] * gv)
    abs_g = np.abs(gv)
    max_g = float(np.max(np.abs(cached_g_table(k).values)))
    mass = math.fsum((np.abs(tables.c1[sl]) + np.abs(tables.c2[sl]) + np.abs(tables.c3[sl])) * abs_g)
    _check_identity(S, (s1, s2, s3), mass, f"sigma1+sigma2+sigma3 at k={k}")
    _check_identity(s1, (s11, s12), math.fsum((np.abs(tables.c1_high[sl]) + np.abs(tables.c1_low[sl])) * abs_g),
                    f"sigma11+sigma12 at k={k}")
    bound = (float(eta * B * k) + 1) * max_g
    if abs(S) > bound * (1 + 1e-12):
        raise DecompositionError(f"trivial bound violated at k={k}: |S|={abs(S)} > {bound}")
    seconds = time.perf_counter() - t0 if timed else 0.0
    return SweepRow(k, float(B), float(eta), hi - lo, S, s1, s2, s3, s11, s12, max_g, seconds)


def vaughan_split(B, k: int, eta, w: float = 10.0, theta: float = 1e4, timed: bool = False) -> SweepRow:
    """One sweep row: S and its parts, with all identities checked."""
    B, eta = Fraction(B), Fraction(eta)
    if eta * B * k < 1:
        raise ValueError("need eta*B*k >= 1")
    VaughanParams(w)
    _, hi = h_range(B, k, eta)
    return _row(k, B, eta, _shared_tables(max(hi, 2), w, theta), timed)


def _row_worker(args):
    k, B, eta, w, theta, limit, timed = args
    return _row(k, B, eta, _shared_tables(limit, w, theta), timed)


def run_sweep(spec: SweepSpec, threads: int = 1, timed: bool = False) -> SweepResult:
    """All rows of a sweep, in the order of ``spec.ks``.

    Every row is computed independently from tables shared up to the
    largest h, so the output does not depend on ``threads``.
    """
    eta = Fraction(spec.eta)
    jobs = []
    limit = 2
    for k in spec.ks:
        B = spec.B(k)
        limit = max(limit, h_range(B, k, eta)[1])
        jobs.append((k, B))
    if threads <= 1 or len(jobs) == 1:
        tables = _shared_tables(limit, spec.w, spec.theta)
        rows = [_row(k, B, eta, tables, timed) for k, B in jobs]
    else:
        args = [(k, B, eta, spec.w, spec.theta, limit, timed) for k, B in jobs]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_row_worker, args, chunksize=max(1, len(args) // (4 * threads))))
    return SweepResult(spec, rows)


def primes_between(lo: int, hi: int) -> tuple[int, ...]:
    return tuple(int(p) for p in prime_sieve(hi) if p >= lo)


# ---------------------------------------------------------------- fitting

@dataclass(frozen=True)
class ExponentFit:
    exponent: float
    r2: float
    used: int
    dropped: int


def fit_exponent(lengths: Iterable[float], sums: Iterable[float], floor: float = 1e-12) -> ExponentFit:
    """Least-squares slope of log|S| against log(length)."""
    x = np.asarray(list(lengths), dtype=float)
    y = np.abs(np.asarray(list(sums), dtype=float))
    keep = y >= floor
    if keep.sum() < 4:
        raise FitError(f"need >= 4 points with |S| >= {floor}, have {int(keep.sum())}")
    lx, ly = np.log(x[keep]), np.log(y[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return ExponentFit(float(slope), r2, int(keep.sum()), int((~keep).sum()))


def exponent_fit(rows: Sequence[SweepRow]) -> ExponentFit:
    return fit_exponent([r.length for r in rows], [r.S for r in rows])


# ---------------------------------------------------------------- truncated Vasyunin sums

@dataclass(frozen=True)
class CorollaryComparison:
    full: float
    truncated: float
    difference: float
    cutoff: int


def _weighted_V_sum(k: int, N: int, upto: int, V_by_residue: np.ndarray) -> float:
    h = np.arange(1, upto + 1)
    mu = _cached_moebius(max(upto, 1)).values[1 : upto + 1]
    weight = mu / h * (1 - np.log(h) / math.log(N))
    return math.fsum(weight * V_by_residue[h % k])


def corollary_compare(N: int, k: int, eps: float) -> CorollaryComparison:
    """Full and truncated sums of mu(h)/h (1 - log h/log N) V(h/k), h <= N and h <= k^(1+eps)."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if eps <= 0:
        raise ValueError("eps must be positive")
    cutoff = math.floor(k ** (1 + eps))
    if N < k ** (1 + eps):
        raise ValueError(f"N = {N} is below k^(1+eps) = {k ** (1 + eps):.6g}")
    V = np.array([vasyunin_V_reduced(r, k) for r in range(k)])
    full = _weighted_V_sum(k, N, N, V)
    trunc = _weighted_V_sum(k, N, cutoff, V)
    return CorollaryComparison(full, trunc, full - trunc, cutoff)


# ---------------------------------------------------------------- continued-fraction statistics

def _uniform_dyadics(trials: int, bits: int, seed: int) -> list[int]:
    """Numerators m of m / 2^bits, uniform on [1, 2^bits), counter-based stream."""
    rng = np.random.Generator(np.random.Philox(seed))
    nbytes = (bits + 7) // 8
    raw = rng.bytes(trials * nbytes)
    mask = (1 << bits) - 1
    out = []
    for i in range(trials):
        m = int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "little") & mask
        out.append(m or 1)
    return out


def _q_at_depth(m: int, den: int, s: int) -> int:
    """q_s of m/den by the Euclidean algorithm; the final q if the depth is below s."""
    q_prev, q = 0, 1
    num = m
    for _ in range(s):
        if num == 0:
            break
        a, r = divmod(den, num)
        den, num = num, r
        q_prev, q = q, a * q + q_prev
    return q


def qs_tail_stats(s: int, C1: float, trials: int = 10**4, seed: int = 0) -> float:
    """Fraction of uniform x in (0, 1) with q_s(x) >= exp(C1 s).

    x is drawn as an exact dyadic rational with enough bits that its first s
    partial quotients agree with those of the real number it approximates.
    """
    if not 1 <= s <= 40:
        raise ValueError("s must lie in 1..40")
    if trials < 10**4:
        raise ValueError("trials must be >= 10^4")
    bits = max(256, int(2 * C1 * s / math.log(2)) + 64)
    den = 1 << bits
    threshold = C1 * s
    hits = 0
    for m in _uniform_dyadics(trials, bits, seed):
        # compare logs with a relative slack so that q = 2 meets C1 = log 2 exactly
        if math.log(_q_at_depth(m, den, s)) >= threshold * (1 - 1e-12):
            hits += 1
    return hits / trials


@dataclass(frozen=True)
class WiltonTrace:
    partial_sums: np.ndarray
    width: float  # max - min over the last 10 partial sums


def wilton_convergence(x, n_max: int) -> WiltonTrace:
    """Partial sums of sum_{n>=1} (-1)^n log(q_{n+1}) / q_n for n = 1..n_max-1.

    ``x`` is a real in (0, 1) or a sequence of partial quotients.
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    if isinstance(x, (list, tuple, np.ndarray)):
        digits = [int(b) for b in x]
    else:
        digits = list(cf_real(x, n_max).digits)
    if len(digits) < n_max:
        raise ValueError(f"only {len(digits)} partial quotients available, {n_max} needed")
    _, q = convergents(digits[:n_max])
    terms = [(-1) ** n * math.log(q[n + 1]) / q[n] for n in range(1, n_max)]
    partial = np.array([math.fsum(terms[: i + 1]) for i in range(len(terms))])
    tail = partial[-10:]
    return WiltonTrace(partial, float(tail.max() - tail.min()))


def gauss_samples(n: int, seed: int = 0) -> np.ndarray:
    """n draws from the Gauss measure via its inverse distribution function 2^U - 1."""
    u = np.random.default_rng(seed).random(n)
    return np.exp2(u) - 1


LOG_SQUARE_GAUSS = 1.5 * 1.2020569031595942 / math.log(2)  # int log^2(1/x) dm = 3 zeta(3) / (2 log 2)


def transfer_log_moments(n_max: int, samples: int = 10**5, seed: int = 0) -> np.ndarray:
    """Monte Carlo estimates of int |T^n l|^2 dm for n = 0..n_max."""
    x = gauss_samples(samples, seed)
    x = x[x > 0]
    beta = np.ones_like(x)
    out = []
    for n in range(n_max + 1):
        out.append(float(np.mean((beta * np.log(1 / x)) ** 2)))
        beta = beta * x
        y = 1 / x
        x = y - np.floor(y)
        x = np.where(x > 0, x, np.finfo(float).tiny)
    return np.array(out)


def contraction_ratios(n_values: Sequence[int], samples: int = 10**5, seed: int = 0) -> dict[int, float]:
    """Ratio of int |T^n l|^2 dm to golden^(2(n-1)) int |l|^2 dm; at most 1 when contraction holds."""
    golden = (math.sqrt(5) - 1) / 2
    moments = transfer_log_moments(max(n_values), samples, seed)
    return {n: moments[n] / (golden ** (2 * (n - 1)) * LOG_SQUARE_GAUSS) for n in n_values}


# ---------------------------------------------------------------- exact inequalities on digit vectors

def random_digit_vectors(count: int, max_depth: int = 12, max_digit: int = 50, seed: int = 0):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        s = int(rng.integers(1, max_depth + 1))
        yield tuple(int(b) for b in rng.integers(1, max_digit + 1, size=s))


def cell_length_bound_holds(digits: Sequence[int]) -> bool:
    """length(C(b)) <= 2^s / prod b_j^2, checked in exact integer arithmetic."""
    length = make_cell(digits).length
    bound = Fraction(2 ** len(digits), math.prod(b * b for b in digits))
    return length <= bound


def denominator_bound_holds(digits: Sequence[int]) -> bool:
    """q_s <= 2^s prod b_j^2, exact."""
    _, q = convergents(digits)
    return q[-1] <= 2 ** len(digits) * math.prod(b * b for b in digits)


def alpha_pair_products_ok(x: Fraction) -> bool:
    """alpha_m alpha_{m+1} <= 1/2 along the exact expansion of x."""
    from .contfrac import cf_rational

    alphas = cf_rational(Fraction(x)).alphas
    return all(a * b <= Fraction(1, 2) for a, b in zip(alphas, alphas[1:]))


def as_dict(row: SweepRow) -> dict:
    return asdict(row)


def default_threads() -> int:
    value = os.environ.get("NBSUMS_THREADS")
    if value is None:
        return 1
    try:
        return max(1, int(value))
    except ValueError:
        raise ValueError(f"NBSUMS_THREADS must be an integer, got {value!r}") from None
