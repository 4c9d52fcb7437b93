"""Command-line front end.

Every run is described by a :class:`RunConfig`; the JSON output embeds that
config (and the library version) so ``bds rerun report.json`` reproduces it.

JSON output has sorted keys, and exact rationals are written as ``"num/den"``
strings. CSV output (numeric commands only) has the fixed columns

    n, x, value, target, abs_err, rel_err, rate

with empty cells where a field does not apply. Per command:

* ``eval`` / ``deriv``: ``value`` is ``B(f, x)`` or ``D^r B(f, x)``. ``target``
  is the exact value when ``f`` is a polynomial, and ``rate`` is empty.
* ``voronovskaja``: ``value`` is ``n (D^r B(f, x) - f^(r)(x))``, ``target`` is
  the published limit, and ``rate`` is the fitted decay of the residual.
* ``convergence``: ``value`` is ``D^r B(f, x)``, ``target`` is ``f^(r)(x)``,
  and ``rate`` is the fitted error decay.
* ``errorbound``: ``value`` is the sup error on ``[a1, b1]``, ``target`` is
  ``omega_2 + ||f||_mu / n``, and ``rate`` is their ratio.

Exit status is 0 on success, 2 on invalid input, 3 when a numerical
procedure fails to converge, and 1 when ``selftest`` finds a failing check.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np

from . import __version__, kernels
from .analysis import (
    DEFAULT_N_GRID,
    error_bound_ratio,
    pointwise_convergence_check,
    ratio_bounded,
    resolve_jobs,
    voronovskaja_check,
    voronovskaja_limit,
)
from .basis import q_identity_sides, q_table, series_window
from .errors import BDSError, ConvergenceError, ParameterError
from .functions import REGISTRY, get_function, self_check
from .moments import (
    baskakov_U_moments,
    central_from_raw,
    central_moments,
    exact_operator_poly,
    raw_moments,
)
from .operator import apply_derivative_grid, apply_grid
from .params import ShapeParams, to_fraction
from .quadrature import QuadratureConfig, b_monomial_moment, integrate_b_weighted

COMMANDS = ("eval", "deriv", "moments", "umoments", "voronovskaja", "convergence",
            "errorbound", "qpoly", "selftest")
CSV_COLUMNS = ("n", "x", "value", "target", "abs_err", "rel_err", "rate")
NUMERIC = {"eval", "deriv", "voronovskaja", "convergence", "errorbound"}


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: ShapeParams
    n_grid: Tuple[Fraction, ...] = ()
    x_grid: Tuple[Fraction, ...] = (Fraction(1),)
    f_id: str = "t2"
    r: int = 0
    max_m: int = 4
    intervals: Tuple[Fraction, ...] = (Fraction(1, 5), Fraction(3), Fraction(1, 2), Fraction(2))
    output_format: str = "json"
    output_path: Optional[str] = None
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    seed: int = 0

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ParameterError(f"unknown command {self.command!r}")
        if self.f_id not in REGISTRY:
            raise ParameterError(f"unknown function id {self.f_id!r}; known: {', '.join(sorted(REGISTRY))}")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ParameterError("n grid must be strictly increasing")
        if self.output_format not in ("json", "csv"):
            raise ParameterError(f"unknown output format {self.output_format!r}")
        if self.output_format == "csv" and self.command not in NUMERIC:
            raise ParameterError(f"csv output is only available for {', '.join(sorted(NUMERIC))}")
        if self.r < 0 or self.max_m < 0:
            raise ParameterError("r and max_m must be nonnegative")

    @property
    def ns(self) -> Tuple[Fraction, ...]:
        return self.n_grid or (self.params.n,)

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "params": self.params.to_json(),
            "n_grid": [str(n) for n in self.n_grid],
            "x_grid": [str(x) for x in self.x_grid],
            "f_id": self.f_id,
            "r": self.r,
            "max_m": self.max_m,
            "intervals": [str(v) for v in self.intervals],
            "output_format": self.output_format,
            "output_path": self.output_path,
            "quadrature": self.quadrature.to_json(),
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RunConfig":
        q = data.get("quadrature", {})
        return cls(
            command=data["command"],
            params=ShapeParams.from_json(data["params"]),
            n_grid=tuple(to_fraction(v) for v in data.get("n_grid", [])),
            x_grid=tuple(to_fraction(v) for v in data.get("x_grid", ["1"])),
            f_id=data.get("f_id", "t2"),
            r=int(data.get("r", 0)),
            max_m=int(data.get("max_m", 4)),
            intervals=tuple(to_fraction(v) for v in data.get("intervals", ["1/5", "3", "1/2", "2"])),
            output_format=data.get("output_format", "json"),
            output_path=data.get("output_path"),
            quadrature=QuadratureConfig(**q) if q else QuadratureConfig(),
            seed=int(data.get("seed", 0)),
        )


def _row(n=None, x=None, value=None, target=None, rate=None):
    abs_err = rel_err = None
    if value is not None and target is not None:
        abs_err = abs(value - target)
        rel_err = abs_err / max(abs(target), 1e-12)
    return {"n": None if n is None else str(n), "x": None if x is None else str(x), "value": value,
            "target": target, "abs_err": abs_err, "rel_err": rel_err, "rate": rate}


def _exact_target(cfg: RunConfig, params: ShapeParams, x: Fraction, r: int):
    f = get_function(cfg.f_id)
    poly = getattr(f, "poly", None)
    if poly is None or poly.degree >= params.c + 1:
        return None
    return float(exact_operator_poly(params, poly).derivative(r)(x))


def _cmd_eval(cfg: RunConfig, jobs: int, derivative: bool):
    f = get_function(cfg.f_id)
    xs = [float(x) for x in cfg.x_grid]
    rows = []
    for n in cfg.ns:
        p = cfg.params.with_n(n)
        if derivative:
            results = apply_derivative_grid(p, f, cfg.r, xs, cfg.quadrature)
        else:
            results = apply_grid(p, f, xs, cfg.quadrature)
        for x, res in zip(cfg.x_grid, results):
            row = _row(n, x, res.value, _exact_target(cfg, p, x, cfg.r if derivative else 0))
            row.update(truncation_k=res.truncation_k, tail_bound=res.tail_bound, atom_weight=res.atom_weight)
            rows.append(row)
    return rows, {"rows": rows}


def _single_x(cfg: RunConfig) -> float:
    if len(cfg.x_grid) != 1:
        raise ParameterError(f"{cfg.command} takes exactly one x")
    return float(cfg.x_grid[0])


def _cmd_voronovskaja(cfg: RunConfig, jobs: int):
    f = get_function(cfg.f_id)
    x = _single_x(cfg)
    ns = cfg.n_grid or DEFAULT_N_GRID
    rep = voronovskaja_check(cfg.params, f, cfg.r, x, cfg.quadrature, ns, jobs)
    rows = [_row(n, cfg.x_grid[0], v, rep.target, rep.fitted_rate) for n, v in zip(ns, rep.observed)]
    result = rep.to_json()
    result["derived_limit"] = voronovskaja_limit(cfg.params, f, cfg.r, x)
    return rows, result


def _cmd_convergence(cfg: RunConfig, jobs: int):
    f = get_function(cfg.f_id)
    ns = cfg.n_grid or DEFAULT_N_GRID
    rep = pointwise_convergence_check(cfg.params, f, cfg.r, _single_x(cfg), cfg.quadrature, ns, jobs)
    rows = [_row(n, cfg.x_grid[0], v, rep.target, rep.fitted_rate) for n, v in zip(ns, rep.extra["values"])]
    return rows, rep.to_json()


def _cmd_errorbound(cfg: RunConfig, jobs: int):
    f = get_function(cfg.f_id)
    ns = cfg.n_grid or tuple(2 ** e for e in range(6, 13))
    out = error_bound_ratio(cfg.params, f, cfg.r, cfg.intervals, ns, cfg.quadrature, jobs)
    rows = [_row(n, None, r.lhs, r.rhs, r.ratio) for n, r in zip(ns, out)]
    result = {
        "rows": [{"n": r.n, "lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio, "rhs_outer": r.rhs_outer,
                  "ratio_outer": r.ratio_outer} for r in out],
        "bounded": bool(ratio_bounded(out)),
        "bounded_outer": bool(ratio_bounded(out, outer=True)),
    }
    return rows, result


def _cmd_moments(cfg: RunConfig, jobs: int):
    table = central_moments(cfg.params, cfg.max_m)
    raw = raw_moments(cfg.params, cfg.max_m)
    dual = central_from_raw(raw, cfg.max_m) == list(table.central)
    return None, {"table": table.to_json(), "raw": [p.to_strings() for p in raw], "dual_path_equal": dual}


def _cmd_umoments(cfg: RunConfig, jobs: int):
    us = baskakov_U_moments(cfg.params.n, cfg.params.gamma, cfg.max_m)
    return None, {"U": [u.to_strings() for u in us]}


def _cmd_qpoly(cfg: RunConfig, jobs: int):
    table = q_table(cfg.r, cfg.params.gamma)
    return None, {"r": cfg.r, "gamma": str(cfg.params.gamma),
                  "Q": {f"{i},{j}": q.to_strings() for (i, j), q in table.items()}}


def selftest_checks(seed: int = 0) -> dict:
    """A fast subset of the invariant suite; returns ``{name: passed}``."""
    rng = random.Random(seed)
    checks = {}
    one = get_function("t0")
    worst = 0.0
    for p in (ShapeParams.of(8, "1/2", 1, 2), ShapeParams.of(32, 1), ShapeParams.of(128, 2, 1, 2)):
        for res in apply_grid(p, one, [0.0, 0.1, 1.0, 5.0]):
            worst = max(worst, abs(res.value - 1.0))
    checks["normalization"] = worst <= 1e-12
    ok = True
    for p in (ShapeParams.of(8, 1, 1, 2), ShapeParams.of(16, "1/2", 2, 2), ShapeParams.of(64, 2)):
        ok &= list(central_moments(p, 6).central) == central_from_raw(raw_moments(p, 6), 6)
    checks["dual_path_moments"] = ok
    ok = True
    for _ in range(5):
        p = ShapeParams.of(Fraction(rng.randint(1, 40), rng.randint(1, 4)), Fraction(rng.randint(1, 6), rng.randint(1, 3)))
        k, r, x = rng.randint(0, 12), rng.randint(0, 4), Fraction(rng.randint(1, 20), rng.randint(1, 10))
        lhs, rhs = q_identity_sides(p, k, r, x)
        ok &= lhs == rhs
    checks["q_identity"] = ok
    p = ShapeParams.of(12, 1)
    errs = [abs(integrate_b_weighted(p, k, lambda t, j=j: t ** j, growth_mu=j) / float(b_monomial_moment(p, k, j)) - 1)
            for k in (1, 5, 20) for j in (0, 2, 4)]
    checks["quadrature_vs_exact"] = max(errs) < 1e-10
    p = ShapeParams.of(32, 1)
    f = get_function("t2")
    h = 1e-3
    vals = [r.value for r in apply_grid(p, f, [1 - h, 1, 1 + h])]
    fd = (vals[0] - 2 * vals[1] + vals[2]) / h ** 2
    d2 = apply_derivative_grid(p, f, 2, [1.0])[0].value
    checks["derivative_vs_fd"] = abs(fd - d2) <= 1e-6 * abs(d2)
    try:
        for g in REGISTRY.values():
            self_check(g)
        checks["registry"] = True
    except AssertionError:
        checks["registry"] = False
    w = series_window(ShapeParams.of(16, 1), 2.0)
    checks["series_mass"] = abs(float(np.sum(w.weights)) + np.exp(w.atom_log_weight) - 1) <= 1e-12
    return {k: bool(v) for k, v in checks.items()}


def _cmd_selftest(cfg: RunConfig, jobs: int):
    checks = selftest_checks(cfg.seed)
    return None, {"checks": checks, "passed": all(checks.values()), "backend": kernels.BACKEND}


HANDLERS = {
    "eval": lambda c, j: _cmd_eval(c, j, False),
    "deriv": lambda c, j: _cmd_eval(c, j, True),
    "voronovskaja": _cmd_voronovskaja,
    "convergence": _cmd_convergence,
    "errorbound": _cmd_errorbound,
    "moments": _cmd_moments,
    "umoments": _cmd_umoments,
    "qpoly": _cmd_qpoly,
    "selftest": _cmd_selftest,
}


def render(cfg: RunConfig, rows, result) -> str:
    if cfg.output_format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(["" if row[c] is None else (repr(row[c]) if isinstance(row[c], float) else row[c])
                             for c in CSV_COLUMNS])
        return buf.getvalue()
    doc = {"config": cfg.to_json(), "version": __version__, "result": result}
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def run(cfg: RunConfig, jobs: int = 1) -> Tuple[int, str]:
    """Execute ``cfg``; returns ``(exit_status, rendered_output)``.

    Errors are not caught here; :func:`main` maps them to exit codes.
    """
    rows, result = HANDLERS[cfg.command](cfg, jobs)
    status = 1 if cfg.command == "selftest" and not result["passed"] else 0
    return status, render(cfg, rows, result)


def _common(parser):
    parser.add_argument("--n", default="64", help="operator index n (rational, e.g. 64 or 129/2)")
    parser.add_argument("--gamma", default="1", help="shape parameter gamma > 0 (rational)")
    parser.add_argument("--alpha", default="0", help="Stancu shift alpha (rational)")
    parser.add_argument("--beta", default="0", help="Stancu shift beta >= alpha (rational)")
    parser.add_argument("--format", dest="output_format", choices=("json", "csv"), default="json")
    parser.add_argument("--output", dest="output_path", default=None, help="write here instead of stdout")
    parser.add_argument("--jobs", type=int, default=None, help="worker processes (env BDS_JOBS overrides)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--rel-tol", type=float, default=QuadratureConfig.rel_tol)
    parser.add_argument("--abs-tol", type=float, default=QuadratureConfig.abs_tol)
    parser.add_argument("--max-refinements", type=int, default=QuadratureConfig.max_refinements)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bds", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"bds {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        _common(sp)
        if name in NUMERIC:
            sp.add_argument("--f", dest="f_id", default="t2", help="function id from the registry")
            sp.add_argument("--x", nargs="+", default=["1"], help="evaluation point(s)")
            sp.add_argument("--n-grid", nargs="+", default=None, help="increasing n values")
            sp.add_argument("--r", type=int, default=1 if name == "deriv" else 0, help="derivative order")
        if name == "errorbound":
            sp.add_argument("--intervals", nargs=4, default=["1/5", "3", "1/2", "2"], metavar=("A", "B", "A1", "B1"))
        if name in ("moments", "umoments"):
            sp.add_argument("--max-m", type=int, default=4)
        if name == "qpoly":
            sp.add_argument("--r", type=int, default=2)
    rerun = sub.add_parser("rerun", help="re-run the config embedded in a JSON report")
    rerun.add_argument("report")
    rerun.add_argument("--output", dest="output_path", default=None)
    rerun.add_argument("--jobs", type=int, default=None)
    return parser


def config_from_args(args) -> RunConfig:
    params = ShapeParams.of(args.n, args.gamma, args.alpha, args.beta)
    kw = {}
    if hasattr(args, "f_id"):
        kw.update(f_id=args.f_id, x_grid=tuple(to_fraction(x) for x in args.x), r=args.r,
                  n_grid=tuple(to_fraction(n) for n in args.n_grid) if args.n_grid else ())
    if hasattr(args, "intervals"):
        kw["intervals"] = tuple(to_fraction(v) for v in args.intervals)
    if hasattr(args, "max_m"):
        kw["max_m"] = args.max_m
    if args.command == "qpoly":
        kw["r"] = args.r
    return RunConfig(
        command=args.command, params=params, output_format=args.output_format,
        output_path=args.output_path, seed=args.seed,
        quadrature=QuadratureConfig(args.rel_tol, args.abs_tol, args.max_refinements), **kw)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "rerun":
            with open(args.report, encoding="utf-8") as fh:
                cfg = RunConfig.from_json(json.load(fh)["config"])
        else:
            cfg = config_from_args(args)
        destination = args.output_path or cfg.output_path
        status, text = run(cfg, resolve_jobs(args.jobs))
    except ConvergenceError as exc:
        print(f"bds: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (BDSError, ValueError, OSError, KeyError) as exc:
        print(f"bds: invalid input: {exc}", file=sys.stderr)
        return 2
    if destination:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
