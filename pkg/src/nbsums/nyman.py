"""Critical-line zeta, the Nyman-Beurling Gram form and d_N^2.

d^2(a) = (1/2pi) int |1 - zeta(1/2+it) D(1/2+it)|^2 dt / (1/4 + t^2)
       = 1 - 2 sum_n a_n lambda_n + sum_{h,k} a_h a_k b_{h,k}

The Gram entries b_{h,k} come in closed form through Vasyunin sums. The
linear terms lambda_n are obtained by quadrature on a fixed panel grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import moebius
from .sums import vasyunin_V_reduced

ZETA_T_MAX = 500.0
GRAM_CONSTANT = math.log(2 * math.pi) - np.euler_gamma
PANEL_WIDTH = 1.0
_NODES_FINE, _NODES_COARSE = 20, 10


class QuadratureFailure(ArithmeticError):
    """A critical-line integral did not reach its tolerance."""


class IllConditioned(ArithmeticError):
    def __init__(self, message: str, cond: float):
        super().__init__(message)
        self.cond = cond


class GramBuildError(ArithmeticError):
    """The assembled Gram matrix is not symmetric positive semidefinite."""


@dataclass(frozen=True)
class DirichletCoefficients:
    """a_1..a_N of D(s) = sum a_n n^{-s}; ``a[0]`` is a_1."""

    a: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.a, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("need at least one coefficient")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "a", arr)

    @property
    def N(self) -> int:
        return self.a.size


@dataclass(frozen=True)
class GramMatrix:
    N: int
    b: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.b).min())


@dataclass(frozen=True)
class DN2Result:
    value: float
    tail_est: float
    quad_err: float


@dataclass(frozen=True)
class Minimizer:
    coeffs: DirichletCoefficients
    value: float
    cond: float
    lambdas: np.ndarray


# ---------------------------------------------------------------- zeta

@lru_cache(maxsize=32)
def _eta_weights(n: int) -> np.ndarray:
    """Borwein's weights (-1)^k (d_n - d_k)/d_n, from exact integers."""
    d = []
    acc = 0
    for i in range(n + 1):
        acc += math.factorial(n + i - 1) * 4**i // (math.factorial(n - i) * math.factorial(2 * i))
        d.append(acc)
    dn = d[-1]
    return np.array([(-1) ** k * float(Fraction(dn - d[k], dn)) for k in range(n)])


def _eta_terms(t_abs_max: float) -> int:
    # error ~ (3 + sqrt 8)^{-n} e^{pi |t| / 2}; 40 extra nats of margin
    return int(math.ceil((math.pi / 2 * t_abs_max + 40) / math.log(3 + math.sqrt(8))))


def zeta_half_line(t, chunk: int = 4096):
    """zeta(1/2 + it) for |t| <= 500; scalar in, scalar out."""
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if arr.size == 0:
        return arr.astype(complex)
    tmax = float(np.max(np.abs(arr)))
    if not tmax <= ZETA_T_MAX:
        raise ValueError(f"zeta_half_line supports |t| <= {ZETA_T_MAX}, got {tmax}")
    n = _eta_terms(tmax)
    w = _eta_weights(n)
    logk = np.log(np.arange(1, n + 1))
    out = np.empty(arr.size, dtype=complex)
    for i in range(0, arr.size, chunk):
        s = 0.5 + 1j * arr[i : i + chunk]
        eta = np.exp(-np.outer(s, logk)) @ w
        out[i : i + chunk] = eta / (1 - 2 ** (1 - s))
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------- quadrature grid

@dataclass(frozen=True)
class _Grid:
    T_max: float
    t: np.ndarray
    w: np.ndarray  # includes 1/(pi (1/4 + t^2))
    zeta: np.ndarray


def _panel_nodes(a: np.ndarray, b: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    half = (b - a)[:, None] / 2
    t = (half * (x + 1) + a[:, None]).ravel()
    return t, (half * w).ravel()


@lru_cache(maxsize=8)
def _critical_grid(T_max: float, nodes: int) -> _Grid:
    panels = max(1, int(math.ceil(T_max / PANEL_WIDTH)))
    edges = np.linspace(0.0, T_max, panels + 1)
    t, w = _panel_nodes(edges[:-1], edges[1:], nodes)
    w = w / (math.pi * (0.25 + t * t))
    return _Grid(T_max, t, w, zeta_half_line(t))


def _check_T(T_max: float) -> float:
    T_max = float(T_max)
    if not 10 <= T_max <= ZETA_T_MAX:
        raise ValueError(f"T_max must lie in [10, {ZETA_T_MAX}], got {T_max}")
    return T_max


def _dirichlet_on(grid: _Grid, a: np.ndarray) -> np.ndarray:
    n = np.arange(1, a.size + 1)
    return np.exp(-np.outer(0.5 + 1j * grid.t, np.log(n))) @ a


def _integrate(T_max: float, fn) -> tuple[float, float]:
    """(1/pi) int_0^T fn(grid) / (1/4+t^2) dt with a coarse-vs-fine error estimate."""
    fine = _critical_grid(T_max, _NODES_FINE)
    coarse = _critical_grid(T_max, _NODES_COARSE)
    vf = math.fsum(fine.w * fn(fine))
    vc = math.fsum(coarse.w * fn(coarse))
    return vf, abs(vf - vc)


def _log_tail(C: float, T: float) -> float:
    # (1/pi) int_T^oo C log^2 t / t^2 dt
    L = math.log(T)
    return C / math.pi * (L * L + 2 * L + 2) / T


def _tail_constant(T_max: float, fn) -> float:
    grid = _critical_grid(T_max, _NODES_FINE)
    sel = grid.t >= T_max / 2
    return float(np.max(fn(grid)[sel] / np.log(grid.t[sel]) ** 2))


def dn2_quadrature(coeffs: DirichletCoefficients, T_max: float = 200.0,
                   quad_tol: float = 1e-6) -> DN2Result:
    """d^2 by direct quadrature of |1 - zeta D|^2 over [0, T_max] (even integrand)."""
    T_max = _check_T(T_max)
    a = coeffs.a

    def fn(grid):
        return np.abs(1 - grid.zeta * _dirichlet_on(grid, a)) ** 2

    value, err = _integrate(T_max, fn)
    if err > quad_tol:
        raise QuadratureFailure(f"panel quadrature error {err:.3g} exceeds {quad_tol}")
    return DN2Result(value, _log_tail(_tail_constant(T_max, fn), T_max), err)


def zetaD_square_integral(coeffs: DirichletCoefficients, T_max: float = 500.0) -> DN2Result:
    """(1/pi) int_0^T |zeta D|^2 / (1/4+t^2) dt, which tends to a^T B a."""
    T_max = _check_T(T_max)
    a = coeffs.a

    def fn(grid):
        return np.abs(grid.zeta * _dirichlet_on(grid, a)) ** 2

    value, err = _integrate(T_max, fn)
    return DN2Result(value, _log_tail(_tail_constant(T_max, fn), T_max), err)


def linear_terms(N: int, T_max: float = 500.0) -> tuple[np.ndarray, float]:
    """lambda_n = (1/pi) Re int_0^oo zeta(1/2+it) n^{-1/2-it} dt / (1/4+t^2), n = 1..N.

    Returns the values and the largest coarse-vs-fine quadrature discrepancy.
    Beyond T_max only the constant term of zeta, present for n = 1, is kept.
    """
    T_max = _check_T(T_max)
    out = np.empty(N)
    worst = 0.0
    for n in range(1, N + 1):
        def fn(grid, n=n):
            return (grid.zeta * np.exp(-(0.5 + 1j * grid.t) * math.log(n))).real

        out[n - 1], err = _integrate(T_max, fn)
        worst = max(worst, err)
    out[0] += 2 * (math.pi / 2 - math.atan(2 * T_max)) / math.pi
    return out, worst


# ---------------------------------------------------------------- Gram form

def gram_entry(h: int, k: int) -> float:
    """b_{h,k} via Vasyunin sums; common factors scale out as b_{gh', gk'} = b_{h',k'}/g."""
    if h < 1 or k < 1:
        raise ValueError("indices must be positive")
    g = math.gcd(h, k)
    h, k = h // g, k // g
    core = (GRAM_CONSTANT / 2 * (1 / h + 1 / k)
            + (k - h) / (2 * h * k) * math.log(h / k)
            - math.pi / (2 * h * k) * (vasyunin_V_reduced(h, k) + vasyunin_V_reduced(k, h)))
    return core / g


def gram_matrix(N: int, psd_tol: float = 1e-8) -> GramMatrix:
    if N < 1:
        raise ValueError("N must be >= 1")
    b = np.empty((N, N))
    for h in range(1, N + 1):
        for k in range(h, N + 1):
            b[h - 1, k - 1] = b[k - 1, h - 1] = gram_entry(h, k)
    lam_min = float(np.linalg.eigvalsh(b).min())
    if lam_min < -psd_tol:
        raise GramBuildError(f"Gram matrix of order {N} has eigenvalue {lam_min:.3e}")
    meta = {"gram_constant": GRAM_CONSTANT, "min_eigenvalue": lam_min, "psd_tol": psd_tol}
    return GramMatrix(N, b, meta)


def vn_coefficients(N: int) -> DirichletCoefficients:
    """a_n = mu(n) (1 - log n / log N)."""
    if N < 2:
        raise ValueError("V_N needs N >= 2")
    logN = math.log(N)
    return DirichletCoefficients(np.array([moebius(n) * (1 - math.log(n) / logN) for n in range(1, N + 1)]))


def quadratic_form(coeffs: DirichletCoefficients, gram: GramMatrix) -> float:
    if coeffs.N != gram.N:
        raise ValueError(f"{coeffs.N} coefficients against a Gram matrix of order {gram.N}")
    a = coeffs.a
    return float(a @ gram.b @ a)


def dn2_gram(coeffs: DirichletCoefficients, gram: GramMatrix, lambdas: np.ndarray) -> float:
    """1 - 2 a.lambda + a^T B a."""
    return 1.0 - 2.0 * float(coeffs.a @ lambdas[: coeffs.N]) + quadratic_form(coeffs, gram)


def minimize_dn2(N: int, T_max: float = 500.0, cond_limit: float = 1e12) -> Minimizer:
    """Exact minimiser of the quadratic d^2 over real a_1..a_N (normal equations B a = lambda)."""
    if not 1 <= N <= 50:
        raise ValueError("minimize_dn2 supports 1 <= N <= 50")
    gram = gram_matrix(N)
    lambdas, _ = linear_terms(N, T_max)
    cond = float(np.linalg.cond(gram.b))
    if cond > cond_limit:
        raise IllConditioned(f"Gram matrix condition number {cond:.3e}", cond)
    a = np.linalg.solve(gram.b, lambdas)
    return Minimizer(DirichletCoefficients(a), 1.0 - float(lambdas @ a), cond, lambdas)


def sine_orthogonality(m1: int, m2: int, nodes: int = 20) -> float:
    """2 int_0^1 sin(2 pi m1 v) sin(2 pi m2 v) dv, panel Gauss-Legendre."""
    if m1 < 1 or m2 < 1:
        raise ValueError("frequencies must be positive")
    panels = m1 + m2
    edges = np.linspace(0.0, 1.0, panels + 1)
    v, w = _panel_nodes(edges[:-1], edges[1:], nodes)
    return 2 * math.fsum(w * np.sin(2 * np.pi * m1 * v) * np.sin(2 * np.pi * m2 * v))
