"""Command-line front end.

Every subcommand produces a table (columns + rows) and optional summary
lines, written as CSV (with ``#`` metadata lines) or as JSON carrying a
schema version string. Exit codes: 0 success, 2 invalid input, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__

SCHEMA_VERSION = "nbsums-output/1"
THREADS_ENV = "NBSUMS_THREADS"

OUTPUT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["schema", "tool", "version", "command", "params", "columns", "rows"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "tool": {"const": "nbsums"},
        "version": {"type": "string"},
        "command": {"type": "string"},
        "params": {"type": "object"},
        "columns": {"type": "array", "items": {"type": "string"}},
        "rows": {"type": "array", "items": {"type": "array"}},
        "summary": {"type": "object"},
    },
}


class UsageError(ValueError):
    pass


@dataclass
class Table:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    text: str | None = None  # plain-text result, used instead of the table when set


# ---------------------------------------------------------------- formatting

def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value)


def _json_value(value):
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return float(format(v, ".12g")) if math.isfinite(v) else str(v)
    return str(value)


def render(command: str, params: dict, table: Table, out_format: str) -> str:
    if table.text is not None and out_format == "csv":
        return table.text + "\n"
    if out_format == "json":
        doc = {
            "schema": SCHEMA_VERSION,
            "tool": "nbsums",
            "version": __version__,
            "command": command,
            "params": {k: _json_value(v) for k, v in sorted(params.items())},
            "columns": table.columns,
            "rows": [[_json_value(v) for v in row] for row in table.rows],
        }
        summary = dict(table.summary)
        if table.text is not None:
            summary["message"] = table.text
        if summary:
            doc["summary"] = {k: _json_value(v) for k, v in summary.items()}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# nbsums {__version__} {command}\n")
    for key, value in sorted(params.items()):
        buf.write(f"# {key}={fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([fmt(v) for v in row])
    for key, value in table.summary.items():
        buf.write(f"# {key}={fmt(value)}\n")
    return buf.getvalue()


# ---------------------------------------------------------------- argument parsing helpers

def parse_number(text: str):
    """An exact Fraction for ``a/b`` or integer strings, a float otherwise."""
    text = text.strip()
    if "/" in text or text.lstrip("-").isdigit():
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    named = {"golden": (math.sqrt(5) - 1) / 2, "sqrt2": math.sqrt(2) - 1}
    if text in named:
        return named[text]
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_digits(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"digits must be comma-separated integers: {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {value}")
    return value


def _default_threads() -> int:
    value = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


# ---------------------------------------------------------------- commands

def cmd_cf(a) -> Table:
    from .contfrac import cf_rational, expand

    x = a.x
    if isinstance(x, Fraction):
        exp = cf_rational(x)
    else:
        exp = expand(x, None if a.depth is None else a.depth)
    t = Table(["j", "a_j", "p_j", "q_j", "alpha_j"])
    for j in range(exp.depth + 1):
        t.rows.append([j, exp.digits[j - 1] if j else None, exp.p[j], exp.q[j], float(exp.alphas[j])])
    t.summary = {"depth": exp.depth, "exact": exp.exact, "truncated": exp.truncated}
    return t


def cmd_cell(a) -> Table:
    from .contfrac import gauss_measure, make_cell

    cell = make_cell(a.digits)
    lo, hi = cell.endpoints
    return Table(["digits", "left", "right", "length", "gauss_measure"],
                 [[" ".join(map(str, cell.digits)), lo, hi, cell.length, gauss_measure(float(lo), float(hi))]])


def _check_hk(h: int, k: int, need_coprime: bool = True) -> Fraction:
    if k < 2:
        raise UsageError("k must be >= 2")
    if h < 0:
        raise UsageError("h must be >= 0")
    if need_coprime and math.gcd(h, k) != 1:
        raise UsageError(f"h/k must be reduced, gcd({h}, {k}) = {math.gcd(h, k)}")
    return Fraction(h, k)


def cmd_gsum(a) -> Table:
    from .sums import g_rational, g_series
    from .wilton import g_via_wilton

    if a.k < 1:
        raise UsageError("k must be >= 1")
    r = Fraction(a.h, a.k)
    if a.method == "rational":
        return Table(["h", "k", "g"], [[a.h, a.k, g_rational(r)]])
    if a.method == "series":
        value, width = g_series(r, a.terms)
        return Table(["h", "k", "g", "width"], [[a.h, a.k, value, width]])
    frac = r - math.floor(r)
    value = 0.0 if frac == 0 else g_via_wilton(frac)
    return Table(["h", "k", "g"], [[a.h, a.k, value]])


def cmd_vasyunin(a) -> Table:
    from .sums import vasyunin_V

    return Table(["h", "k", "V"], [[a.h, a.k, vasyunin_V(_check_hk(a.h, a.k))]])


def cmd_cotangent(a) -> Table:
    from .sums import cotangent_c0

    return Table(["h", "k", "c0"], [[a.h, a.k, cotangent_c0(_check_hk(a.h, a.k))]])


def cmd_wilton(a) -> Table:
    from .wilton import G_func, delta_func, wilton_W

    x = a.x
    if not 0 < x < 1:
        raise UsageError("x must lie in (0, 1)")
    W = wilton_W(x, a.terms)
    G = G_func(x, a.depth)
    delta = delta_func(x)
    t = Table(["x", "W", "W_err", "G", "G_err", "delta", "W_minus_2G_minus_2delta"],
              [[x, W.value, W.error, G.value, G.error, delta, W.value - 2 * G.value - 2 * delta]])
    return t


def cmd_gram(a) -> Table:
    from .nyman import gram_matrix

    gm = gram_matrix(a.N)
    t = Table(["h", "k", "b"])
    for h in range(1, a.N + 1):
        for k in range(1, a.N + 1):
            t.rows.append([h, k, gm.b[h - 1, k - 1]])
    t.summary = {"min_eigenvalue": gm.meta["min_eigenvalue"]}
    return t


def _coefficients(a):
    from .nyman import DirichletCoefficients, vn_coefficients

    if a.coeffs == "vn":
        return vn_coefficients(a.N)
    if a.coeffs == "zero":
        return DirichletCoefficients(np.zeros(a.N))
    values = [float(v) for v in a.coeffs.split(",")]
    if len(values) != a.N:
        raise UsageError(f"{len(values)} coefficients given for N = {a.N}")
    return DirichletCoefficients(np.array(values))


def cmd_dn2(a) -> Table:
    from .nyman import dn2_gram, dn2_quadrature, gram_matrix, linear_terms

    coeffs = _coefficients(a)
    res = dn2_quadrature(coeffs, a.Tmax)
    t = Table(["N", "Tmax", "value", "tail_est"], [[a.N, a.Tmax, res.value, res.tail_est]])
    lambdas, _ = linear_terms(a.N, max(a.Tmax, 10.0))
    t.summary = {"gram_value": dn2_gram(coeffs, gram_matrix(a.N), lambdas)}
    return t


def cmd_minimize(a) -> Table:
    from .nyman import dn2_gram, gram_matrix, minimize_dn2, vn_coefficients

    m = minimize_dn2(a.N, a.Tmax, a.cond_limit)
    t = Table(["n", "a_n", "lambda_n"])
    for n in range(1, a.N + 1):
        t.rows.append([n, m.coeffs.a[n - 1], m.lambdas[n - 1]])
    t.summary = {"minimum": m.value, "cond": m.cond}
    if a.N >= 2:
        vn = dn2_gram(vn_coefficients(a.N), gram_matrix(a.N), m.lambdas)
        t.summary.update({"dn2_VN": vn, "dn2_VN_times_logN": vn * math.log(a.N)})
    return t


SWEEP_COLUMNS = ["k", "B", "eta", "terms", "S", "sigma1", "sigma2", "sigma3",
                 "sigma11", "sigma12", "max_g", "seconds"]


def cmd_sweep(a) -> Table:
    from .experiments import SweepSpec, exponent_fit, primes_between, run_sweep

    if a.k_min < 2 or a.k_max < a.k_min:
        raise UsageError("need 2 <= k-min <= k-max")
    ks = primes_between(a.k_min, a.k_max) if a.primes_only else tuple(range(a.k_min, a.k_max + 1))
    if not ks:
        raise UsageError("no moduli in range")
    spec = SweepSpec(ks, a.B, a.eta, a.w, a.theta, a.seed)
    res = run_sweep(spec, threads=a.threads, timed=a.timing)
    t = Table(SWEEP_COLUMNS)
    for r in res.rows:
        t.rows.append([r.k, r.B, r.eta, r.terms, r.S, r.sigma1, r.sigma2, r.sigma3,
                       r.sigma11, r.sigma12, r.max_g, r.seconds if a.timing else None])
    if a.fit:
        fit = exponent_fit(res.rows)
        t.summary = {"fit_exponent": fit.exponent, "fit_r2": fit.r2,
                     "fit_used": fit.used, "fit_dropped": fit.dropped}
    return t


def cmd_vaughan_check(a) -> Table:
    from .arith import VaughanParams, moebius_sieve, vaughan_table

    table = vaughan_table(a.limit, VaughanParams(a.w))
    mu = moebius_sieve(a.limit).values[1:].astype(np.int64)
    total = table.c1[1:] + table.c2[1:] + table.c3[1:]
    exact = int(np.sum(total == mu))
    status = "ok" if exact == a.limit else "FAIL"
    t = Table(["limit", "w", "exact", "status"], [[a.limit, a.w, exact, status]])
    t.text = f"{status}, {exact}/{a.limit} exact"
    if exact != a.limit:
        raise NumericFailure(t)
    return t


def cmd_corollary(a) -> Table:
    from .experiments import corollary_compare

    c = corollary_compare(a.N, a.k, a.eps)
    return Table(["N", "k", "eps", "cutoff", "full", "truncated", "difference"],
                 [[a.N, a.k, a.eps, c.cutoff, c.full, c.truncated, c.difference]])


def cmd_stats(a) -> Table:
    from .experiments import contraction_ratios, qs_tail_stats, wilton_convergence

    if a.kind == "qs-tail":
        frac = qs_tail_stats(a.s, a.C1, a.trials, a.seed)
        return Table(["s", "C1", "trials", "seed", "fraction"], [[a.s, a.C1, a.trials, a.seed, frac]])
    if a.kind == "contraction":
        ratios = contraction_ratios(range(2, a.n_max + 1), a.trials, a.seed)
        return Table(["n", "ratio"], [[n, r] for n, r in ratios.items()])
    x = a.x if a.x is not None else (math.sqrt(5) - 1) / 2
    trace = wilton_convergence(float(x), a.n_max)
    t = Table(["n", "partial_sum"], [[n + 1, v] for n, v in enumerate(trace.partial_sums)])
    t.summary = {"width_last10": trace.width}
    return t


class NumericFailure(ArithmeticError):
    def __init__(self, table: Table):
        super().__init__(table.text)
        self.table = table


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nbsums", description="Cotangent sums, continued fractions and "
                                "Nyman-Beurling computations.")
    p.add_argument("--version", action="version", version=f"nbsums {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write to this path instead of stdout")
    common.add_argument("--config", help="JSON file of parameter defaults for this subcommand")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=_positive_int, default=_default_threads(),
                        help=f"worker processes (default from ${THREADS_ENV}, else 1)")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("cf", cmd_cf, "continued-fraction expansion")
    sp.add_argument("--x", type=parse_number, required=True, help="a/b, a decimal, 'golden' or 'sqrt2'")
    sp.add_argument("--depth", type=_positive_int)

    sp = add("cell", cmd_cell, "cell endpoints, length and Gauss measure")
    sp.add_argument("--digits", type=parse_digits, required=True)

    sp = add("gsum", cmd_gsum, "g(h/k)")
    sp.add_argument("--h", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--method", choices=("rational", "series", "wilton"), default="rational")
    sp.add_argument("--terms", type=_positive_int, default=10**5)

    for name, func, what in (("vasyunin", cmd_vasyunin, "Vasyunin sum V(h/k)"),
                             ("cotangent", cmd_cotangent, "cotangent sum c0(h/k)")):
        sp = add(name, func, what)
        sp.add_argument("--h", type=int, required=True)
        sp.add_argument("--k", type=int, required=True)

    sp = add("wilton", cmd_wilton, "Wilton function, G and delta")
    sp.add_argument("--x", type=parse_number, required=True)
    sp.add_argument("--terms", type=_positive_int, default=60)
    sp.add_argument("--depth", type=_positive_int, default=60)

    sp = add("gram", cmd_gram, "Gram matrix b_{h,k}")
    sp.add_argument("--N", type=_positive_int, required=True)

    sp = add("dn2", cmd_dn2, "d_N^2 by quadrature")
    sp.add_argument("--N", type=_positive_int, required=True)
    sp.add_argument("--Tmax", type=float, default=200.0)
    sp.add_argument("--coeffs", default="vn", help="'vn', 'zero' or comma-separated a_1..a_N")

    sp = add("minimize", cmd_minimize, "minimise d_N^2 over a_1..a_N")
    sp.add_argument("--N", type=_positive_int, required=True)
    sp.add_argument("--Tmax", type=float, default=500.0)
    sp.add_argument("--cond-limit", type=float, default=1e12, help="refuse Gram matrices above this condition number")

    sp = add("sweep", cmd_sweep, "Moebius-weighted sums of g and their Vaughan decomposition")
    sp.add_argument("--k-min", type=int, required=True)
    sp.add_argument("--k-max", type=int, required=True)
    sp.add_argument("--primes-only", action="store_true")
    sp.add_argument("--B", default="k", help="a number, 'k' or 'k^c'")
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--w", type=float, default=10.0)
    sp.add_argument("--theta", type=float, default=1e4)
    sp.add_argument("--fit", action="store_true")
    sp.add_argument("--timing", action="store_true", help="fill the seconds column")

    sp = add("vaughan-check", cmd_vaughan_check, "verify mu = c1 + c2 + c3")
    sp.add_argument("--limit", type=_positive_int, required=True)
    sp.add_argument("--w", type=float, default=10.0)

    sp = add("corollary", cmd_corollary, "full vs truncated weighted Vasyunin sums")
    sp.add_argument("--N", type=_positive_int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--eps", type=float, required=True)

    sp = add("stats", cmd_stats, "Monte Carlo and convergence statistics")
    sp.add_argument("--kind", choices=("qs-tail", "contraction", "wilton-trace"), required=True)
    sp.add_argument("--s", type=int, default=20)
    sp.add_argument("--C1", type=float, default=1.5)
    sp.add_argument("--trials", type=int, default=10**4)
    sp.add_argument("--n-max", type=int, default=8)
    sp.add_argument("--x", type=parse_number)
    return p


_PLUMBING = {"format", "out", "config", "func", "command"}


def _config_path(argv) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _apply_config(parser: argparse.ArgumentParser, argv) -> None:
    """Install config values as subcommand defaults before argv is parsed."""
    path = _config_path(argv)
    command = next((tok for tok in argv if tok in _subparsers(parser)), None)
    if path is None or command is None:
        return
    with open(path, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    sub = _subparsers(parser)[command]
    allowed = {act.dest for act in sub._actions} - _PLUMBING - {"help"}
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
    # config supplies defaults; explicit flags on the command line win
    converted = {}
    for action in sub._actions:
        if action.dest in cfg:
            value = cfg[action.dest]
            if action.type is not None and not isinstance(value, bool):
                value = action.type(str(value))
            converted[action.dest] = value
            action.required = False
    sub.set_defaults(**converted)


def _subparsers(parser: argparse.ArgumentParser) -> dict:
    return parser._subparsers._group_actions[0].choices


def _params(ns: argparse.Namespace) -> dict:
    return {k: v for k, v in vars(ns).items() if k not in _PLUMBING and k != "threads" and v is not None}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _apply_config(parser, argv)
    except (UsageError, ValueError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"nbsums: config error: {exc}", file=stderr)
        return 2
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        table = ns.func(ns)
        code = 0
    except NumericFailure as exc:
        table, code = exc.table, 3
    except (UsageError, ValueError, TypeError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"nbsums {ns.command}: error: {exc}", file=stderr)
        return 2
    except ArithmeticError as exc:
        print(f"nbsums {ns.command}: numeric failure: {exc}", file=stderr)
        return 3
    text = render(ns.command, _params(ns), table, ns.format)
    if ns.out:
        with open(ns.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())
