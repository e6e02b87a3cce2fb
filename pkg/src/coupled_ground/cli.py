"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 non-convergence.  Results go to stdout or CSV files, logs to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .beta import BetaProblem, beta_bounds, beta_direct, beta_star, sobolev_constant
from .errors import ParameterError, SolverError
from .functionals import SystemParams, coercivity_constants, grad_lower_bound
from .scalar import ScalarParams, gn_constant, lambda_scalar, mass_threshold_b, scalar_energy_m, solve_Up
from .solver import GroundStateResult, SolveConfig, minimize_ground
from .verify import run_suites

log = logging.getLogger("coupled_ground")

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_NONCONV = 0, 1, 2, 3

RESULT_COLUMNS = (
    "a", "b", "beta", "C_ab", "m_p", "m_q", "lambda1", "lambda2", "mass_u", "mass_v",
    "residual", "iterations", "converged", "semitrivial", "strict_margin",
)
REQUIRED_KEYS = ("p", "q", "r1", "r2", "mu1", "mu2", "beta", "a", "b")
DEFAULTS = {
    "dim": 3,
    "radius": 15.0,
    "points": 1501,
    "tol_residual": 1e-4,
    "max_iters": 20000,
    "seed_mode": "scalar_seed",
}
SWEEP_KEYS = ("a", "b", "beta")
DIRECT_RADII = (20.0, 40.0, 80.0)


class InputError(Exception):
    """Bad user input; reported with exit code 2."""


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.12g" % float(x)


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    radius: float
    points: int
    tol_residual: float
    max_iters: int
    seed_mode: str

    def solve_config(self) -> SolveConfig:
        return SolveConfig(
            self.params,
            radius=self.radius,
            points=self.points,
            init=self.seed_mode,
            tol_residual=self.tol_residual,
            max_iters=self.max_iters,
        )

    def with_value(self, key: str, value: float) -> "RunConfig":
        return replace(self, params=replace(self.params, **{key: value}))


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise InputError("configuration must be a JSON object")
    unknown = sorted(set(raw) - set(REQUIRED_KEYS) - set(DEFAULTS))
    if unknown:
        raise InputError(f"unknown configuration key(s): {', '.join(unknown)}")
    for key in REQUIRED_KEYS:
        if key not in raw:
            raise InputError(f"missing required configuration key: {key}")
    cfg = {**DEFAULTS, **raw}
    try:
        params = SystemParams(
            int(cfg["dim"]), *(float(cfg[k]) for k in REQUIRED_KEYS)
        )
        if cfg["seed_mode"] not in ("scalar_seed", "gaussian_seed"):
            raise InputError(f"seed_mode must be scalar_seed or gaussian_seed, got {cfg['seed_mode']!r}")
        run = RunConfig(params, float(cfg["radius"]), int(cfg["points"]), float(cfg["tol_residual"]),
                        int(cfg["max_iters"]), cfg["seed_mode"])
        run.solve_config().grid  # validates radius and points
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    return run


def load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    return parse_config(raw)


# --------------------------------------------------------------------------
# output


def result_row(res: GroundStateResult) -> list[str]:
    pr = res.params
    mp, mq = res.closed_form_levels
    vals = (pr.a, pr.b, pr.beta, res.energy, mp, mq, res.lambda1, res.lambda2, res.masses[0],
            res.masses[1], res.residual, res.iterations, res.converged, res.semitrivial, res.strict_margin)
    return [fmt(v) for v in vals]


def results_csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    w.writerows(rows)
    return buf.getvalue()


def profiles_csv(res: GroundStateResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("r", "u", "v"))
    g = res.pair.grid
    for r, u, v in zip(g.nodes, res.pair.u.values, res.pair.v.values):
        w.writerow((fmt(r), fmt(u), fmt(v)))
    return buf.getvalue()


def table(pairs: list[tuple[str, object]], form: str) -> str:
    if form == "csv":
        return results_like(pairs)
    width = max(len(k) for k, _ in pairs)
    return "".join(f"{k:<{width}}  {fmt(v) if not isinstance(v, str) else v}\n" for k, v in pairs)


def results_like(pairs: list[tuple[str, object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([k for k, _ in pairs])
    w.writerow([fmt(v) if not isinstance(v, str) else v for _, v in pairs])
    return buf.getvalue()


def write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# --------------------------------------------------------------------------
# commands


def cmd_scalar(args) -> int:
    U = solve_Up(args.dim, args.p)
    rows: list[tuple[str, object]] = [
        ("dim", args.dim), ("p", args.p), ("mass_sq", U.mass_sq), ("grad_sq", U.grad_sq),
        ("pnorm_pow", U.pnorm_pow), ("shoot_height", U.shoot_height),
    ]
    if args.mu is not None or args.a is not None:
        sp = ScalarParams(args.dim, args.p, args.mu if args.mu is not None else 1.0,
                          args.a if args.a is not None else 1.0)
        rows += [("mu", sp.mu), ("a", sp.mass), ("lambda", lambda_scalar(sp, U.mass_sq)),
                 ("m", scalar_energy_m(sp, U.mass_sq))]
    sys.stdout.write(table(rows, args.format))
    return EXIT_OK


def cmd_constants(args) -> int:
    run = load_config(args.config)
    pr = run.params
    N = pr.dim
    tau, c0 = coercivity_constants(pr)
    cn = [gn_constant(N, s) for s in (pr.p, pr.q, pr.r)]
    rows: list[tuple[str, object]] = [
        ("lambda_p", lambda_scalar(ScalarParams(N, pr.p, pr.mu1, pr.a))),
        ("lambda_q", lambda_scalar(ScalarParams(N, pr.q, pr.mu2, pr.b))),
        ("m_p", scalar_energy_m(ScalarParams(N, pr.p, pr.mu1, pr.a))),
        ("m_q", scalar_energy_m(ScalarParams(N, pr.q, pr.mu2, pr.b))),
        ("b_star", mass_threshold_b(N, pr.p, pr.q, pr.mu1, pr.mu2, pr.a)),
        ("tau", tau), ("C0", c0),
        ("gn_p", cn[0]), ("gn_q", cn[1]), ("gn_r", cn[2]),
        ("delta_ab", grad_lower_bound(pr, *cn)),
        ("beta_p_r1", beta_star(BetaProblem(N, pr.p, pr.mu1, pr.a, pr.r1))),
        ("beta_q_r2", beta_star(BetaProblem(N, pr.q, pr.mu2, pr.b, pr.r2))),
    ]
    sys.stdout.write(table(rows, args.format))
    return EXIT_OK


def cmd_beta(args) -> int:
    bp = BetaProblem(args.dim, args.p, args.mu, args.a, args.r)
    rows: list[tuple[str, object]] = [("beta_star", beta_star(bp))]
    if args.dim >= 3:
        try:
            lo, hi = beta_bounds(bp, sobolev_constant(args.dim))
            rows += [("lower", lo), ("upper", hi)]
        except ParameterError as exc:
            rows += [("bounds", f"unavailable: {exc}")]
        sys.stdout.write(table(rows, args.format))
    else:
        sys.stdout.write(table(rows, args.format))
        sys.stdout.write("radius,beta_estimate\n" if args.format == "csv" else "\nradius  beta_estimate\n")
        for R in args.radii:
            val = beta_direct(bp, R, int(round(R * args.points_per_unit)) + 1)
            sep = "," if args.format == "csv" else "  "
            sys.stdout.write(f"{fmt(R)}{sep}{fmt(val)}\n")
    return EXIT_OK


def _solve_row(run: RunConfig) -> GroundStateResult:
    return minimize_ground(run.solve_config())


def cmd_solve(args) -> int:
    run = load_config(args.config)
    res = _solve_row(run)
    write_text(args.out, results_csv([result_row(res)]))
    if args.profiles:
        write_text(args.profiles, profiles_csv(res))
    for note in res.notes:
        log.info("%s", note)
    if not res.converged:
        log.warning("solve did not converge (residual %.3g)", res.residual)
        return EXIT_NONCONV
    return EXIT_OK


def parse_values(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"--values must be a comma-separated list of numbers: {exc}") from exc
    if not vals:
        raise InputError("--values is empty")
    return vals


def cmd_sweep(args) -> int:
    run = load_config(args.config)
    if args.vary not in SWEEP_KEYS:
        raise InputError(f"--vary must be one of {', '.join(SWEEP_KEYS)}")
    try:
        runs = [run.with_value(args.vary, v) for v in parse_values(args.values)]
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    jobs = args.jobs or os.cpu_count() or 1
    if jobs == 1 or len(runs) == 1:
        results = [_solve_row(r) for r in runs]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(runs))) as ex:
            results = list(ex.map(_solve_row, runs))  # map keeps the input order
    write_text(args.out, results_csv([result_row(r) for r in results]))
    bad = sum(not r.converged for r in results)
    if bad:
        log.warning("%d of %d sweep rows did not converge", bad, len(results))
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_suites(args.level)
    for r in results:
        sys.stdout.write(r.line() + "\n")
    failed = [r.name for r in results if not r.passed]
    if failed:
        sys.stdout.write(f"{len(failed)} suite(s) failed: {', '.join(failed)}\n")
        return EXIT_VERIFY
    sys.stdout.write(f"all {len(results)} suites passed\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with 2 as well; keep the message on stderr
        self.print_usage(sys.stderr)
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="coupled-ground", description="Normalized ground states of coupled NLS systems.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("scalar", help="scalar ground state U_p and its rescalings")
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--mu", type=float)
    s.add_argument("--a", type=float)
    s.add_argument("--format", choices=("text", "csv"), default="text")
    s.set_defaults(func=cmd_scalar)

    c = sub.add_parser("constants", help="levels, thresholds and bounds for a configuration")
    c.add_argument("config")
    c.add_argument("--format", choices=("text", "csv"), default="text")
    c.set_defaults(func=cmd_constants)

    b = sub.add_parser("beta", help="coupling threshold from the weighted eigenproblem")
    b.add_argument("--dim", type=int, required=True)
    b.add_argument("--p", type=float, required=True)
    b.add_argument("--mu", type=float, default=1.0)
    b.add_argument("--a", type=float, default=1.0)
    b.add_argument("--r", type=float, default=2.0)
    b.add_argument("--radii", type=lambda t: [float(x) for x in t.split(",")], default=list(DIRECT_RADII),
                   help="ball radii for the finite-domain estimate (N <= 2)")
    b.add_argument("--points-per-unit", type=float, default=100.0)
    b.add_argument("--format", choices=("text", "csv"), default="text")
    b.set_defaults(func=cmd_beta)

    so = sub.add_parser("solve", help="compute a ground state from a JSON configuration")
    so.add_argument("config")
    so.add_argument("--out", default="-", help="result CSV (default stdout)")
    so.add_argument("--profiles", help="CSV with r, u(r), v(r) on the computation grid")
    so.set_defaults(func=cmd_solve)

    sw = sub.add_parser("sweep", help="solve for several values of a, b or beta")
    sw.add_argument("config")
    sw.add_argument("--vary", required=True)
    sw.add_argument("--values", required=True, help="comma-separated list")
    sw.add_argument("--out", default="-")
    sw.add_argument("--jobs", type=int, default=0, help="worker processes (default: all cores)")
    sw.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run the bundled self-checks")
    v.add_argument("level", choices=("fast", "full"))
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONV


if __name__ == "__main__":
    sys.exit(main())
