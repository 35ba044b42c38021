"""Continued fractions, the Gauss map, cells and the Gauss measure.

Rationals are :class:`fractions.Fraction` (always reduced) and are expanded
exactly. Floats (or any real type supporting ``1/x`` and ``int``, such as
``mpmath.mpf``) follow a separate path that stops once the residual is
indistinguishable from zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

ReducedFraction = Fraction

FLOAT_RESIDUAL_EPS = 1e-12


class PrecisionExhausted(ArithmeticError):
    """A floating expansion ran out of reliable digits before the requested depth."""


class DepthUnavailable(ValueError):
    """A rational has fewer continued-fraction levels than requested."""


@dataclass(frozen=True)
class CFExpansion:
    """Digits and derived sequences of x = [0; a_1, ..., a_L].

    Index conventions (list index == subscript):
      digits[j-1] = a_j                 for 1 <= j <= L
      p[j], q[j]  = convergent numerators/denominators, j = 0..L
                    (p[0] = 0, q[0] = 1; the seeds p_{-1} = 1, q_{-1} = 0 are implicit)
      alphas[j]   = alpha_j(x)          j = 0..L  (alphas[L] == 0 for rationals)
      betas[j]    = beta_j = alpha_0 ... alpha_j
      gammas[j]   = beta_{j-1} log(1/alpha_j), only where alpha_j != 0
    """

    digits: tuple[int, ...]
    p: tuple[int, ...]
    q: tuple[int, ...]
    alphas: tuple
    betas: tuple
    gammas: tuple[float, ...]
    exact: bool
    truncated: bool = False

    @property
    def depth(self) -> int:
        return len(self.digits)

    def beta(self, j: int):
        """beta_j with the convention beta_{-1} = 1."""
        if j == -1:
            return Fraction(1) if self.exact else 1.0
        return self.betas[j]

    def q_at(self, j: int) -> int:
        return 0 if j == -1 else self.q[j]

    def p_at(self, j: int) -> int:
        return 1 if j == -1 else self.p[j]


@dataclass(frozen=True)
class Cell:
    """The interval of numbers whose first s digits are b_1..b_s."""

    digits: tuple[int, ...]
    convergent_end: Fraction  # p_s / q_s
    mediant_end: Fraction  # (p_s + p_{s-1}) / (q_s + q_{s-1})
    q: tuple[int, ...] = field(repr=False)  # q_0..q_s

    @property
    def depth(self) -> int:
        return len(self.digits)

    @property
    def endpoints(self) -> tuple[Fraction, Fraction]:
        return tuple(sorted((self.convergent_end, self.mediant_end)))

    @property
    def length(self) -> Fraction:
        return abs(self.convergent_end - self.mediant_end)

    def contains(self, x) -> bool:
        lo, hi = self.endpoints
        return lo <= x <= hi


def _is_exact(x) -> bool:
    return isinstance(x, Rational)


def gauss_map(x):
    """alpha(x) = {1/x} on (0, 1); rationals stay exact."""
    if _is_exact(x):
        x = Fraction(x)
    if x == 0:
        raise ValueError("the Gauss map is undefined at 0")
    if not 0 < x < 1:
        raise ValueError(f"gauss_map expects x in (0, 1), got {x}")
    y = 1 / x
    return y - math.floor(y)


def _derived(digits, alphas, exact):
    p, q = convergents(digits)
    betas = []
    beta = Fraction(1) if exact else 1.0
    for a in alphas:
        beta = beta * a
        betas.append(beta)
    gammas = []
    prev = Fraction(1) if exact else 1.0
    for j, a in enumerate(alphas):
        if a == 0:
            break
        gammas.append(float(prev) * -_log(a))
        prev = betas[j]
    return tuple(p), tuple(q), tuple(betas), tuple(gammas)


def _log(a) -> float:
    if isinstance(a, Fraction):
        # keeps precision for tiny alphas with huge denominators
        return math.log(a.numerator) - math.log(a.denominator)
    return math.log(a)


def cf_rational(r: Fraction) -> CFExpansion:
    """Exact expansion of a rational in [0, 1) via iterated Gauss map."""
    r = Fraction(r)
    if not 0 <= r < 1:
        raise ValueError(f"cf_rational expects 0 <= h/k < 1, got {r}")
    alphas = [r]
    digits = []
    while alphas[-1] != 0:
        y = 1 / alphas[-1]
        a = math.floor(y)
        digits.append(a)
        alphas.append(y - a)
    p, q, betas, gammas = _derived(digits, alphas, exact=True)
    return CFExpansion(tuple(digits), p, q, tuple(alphas), betas, gammas, exact=True)


def cf_real(x, max_depth: int, eps: float = FLOAT_RESIDUAL_EPS) -> CFExpansion:
    """Floating expansion to ``max_depth`` digits.

    Stops early (``truncated=True``) when a residual alpha_j falls within
    ``eps`` of 0 or 1, where the next digit would be noise.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if _is_exact(x):
        raise TypeError("use cf_rational for exact input")
    if not 0 < x < 1:
        raise ValueError(f"cf_real expects x in (0, 1), got {x}")
    alphas = [x]
    digits = []
    truncated = False
    for _ in range(max_depth):
        y = 1 / alphas[-1]
        a = int(y)
        frac = y - a
        if frac > 1 - eps:
            a, frac = a + 1, 0 * frac
        digits.append(a)
        if frac < eps:
            alphas.append(0 * frac)
            truncated = True
            break
        alphas.append(frac)
    p, q, betas, gammas = _derived(digits, alphas, exact=False)
    return CFExpansion(tuple(digits), p, q, tuple(alphas), betas, gammas,
                       exact=False, truncated=truncated)


def expand(x, depth: int | None = None) -> CFExpansion:
    """Exact expansion for rationals, floating expansion otherwise."""
    if _is_exact(x):
        return cf_rational(Fraction(x))
    exp = cf_real(x, depth if depth is not None else 60)
    if depth is not None and exp.depth < depth:
        raise PrecisionExhausted(f"only {exp.depth} reliable digits of {x!r}, {depth} requested")
    return exp


def convergents(digits: Sequence[int]) -> tuple[list[int], list[int]]:
    """p_j, q_j for j = 0..s (p_0 = 0, q_0 = 1)."""
    p, q = [0], [1]
    p_prev, q_prev = 1, 0
    for b in digits:
        p_prev, p_next = p[-1], b * p[-1] + p_prev
        q_prev, q_next = q[-1], b * q[-1] + q_prev
        p.append(p_next)
        q.append(q_next)
    return p, q


def make_cell(digits: Sequence[int]) -> Cell:
    digits = tuple(int(b) for b in digits)
    if not digits:
        raise ValueError("a cell needs at least one digit")
    if any(b < 1 for b in digits):
        raise ValueError("cell digits must be positive")
    p, q = convergents(digits)
    conv = Fraction(p[-1], q[-1])
    med = Fraction(p[-1] + p[-2], q[-1] + q[-2])
    return Cell(digits, conv, med, tuple(q))


def locate_cell(x, s: int) -> Cell:
    """The depth-s cell containing x."""
    if s < 1:
        raise ValueError("depth must be >= 1")
    if _is_exact(x):
        exp = cf_rational(Fraction(x))
        if exp.depth < s:
            raise DepthUnavailable(f"{x} has depth {exp.depth} < {s}")
    else:
        exp = cf_real(x, s)
        if exp.depth < s:
            raise DepthUnavailable(f"{x!r} has only {exp.depth} reliable digits")
    return make_cell(exp.digits[:s])


def gauss_measure(a, b) -> float:
    """m([a, b]) = log((1+b)/(1+a)) / log 2."""
    if not 0 <= a <= b <= 1:
        raise ValueError(f"need 0 <= a <= b <= 1, got [{a}, {b}]")
    return math.log1p((b - a) / (1 + a)) / math.log(2)


def gauss_preimage_measure(a: float, b: float, n_terms: int = 10**6) -> float:
    """m of alpha^{-1}([a, b]) = union over n >= 1 of [1/(n+b), 1/(n+a)].

    The first ``n_terms`` branches are summed explicitly; the remaining
    branches telescope to log((n_terms+1+a)/(n_terms+1+b)) / log 2.
    """
    import numpy as np

    if not 0 <= a <= b <= 1:
        raise ValueError(f"need 0 <= a <= b <= 1, got [{a}, {b}]")
    n = np.arange(1, n_terms + 1, dtype=float)
    lo = 1 / (n + b)
    hi = 1 / (n + a)
    head = math.fsum(np.log1p((hi - lo) / (1 + lo)))
    tail = math.log1p((b - a) / (n_terms + 1 + a))
    return (head + tail) / math.log(2)


def _level(x, s: int) -> CFExpansion:
    exp = expand(x) if _is_exact(x) else cf_real(x, s + 1)
    if exp.depth <= s or exp.alphas[s] == 0:
        raise DepthUnavailable(f"{x!r} has no nonzero alpha_{s}")
    return exp


def alpha_derivative(x, s: int) -> float:
    """d alpha_s / dx = (-1)^s (q_s + alpha_s q_{s-1})^2 inside a depth-s cell."""
    exp = _level(x, s)
    Q = exp.q[s] + exp.alphas[s] * exp.q_at(s - 1)
    return float((-1) ** s * Q * Q)


def gamma_derivative(x, s: int) -> float:
    """d gamma_s / dx = (-1)^(s-1) [q_{s-1} log(1/alpha_s) + 1/beta_s] inside a depth-s cell."""
    exp = _level(x, s)
    a = exp.alphas[s]
    return (-1) ** (s - 1) * (exp.q_at(s - 1) * -_log(a) + 1 / float(exp.betas[s]))
