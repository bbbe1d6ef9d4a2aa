"""Command-line front end: ``gtvspline {interpolate,denoise,recover-measure,verify-operator,demo}``.

Scenarios are described by an INI file (``[section]`` / ``key = value``) or an
equivalent JSON object of sections; see the README for the keys. Every run
writes ``spline.json``, ``samples.csv``, ``innovation.csv`` and
``report.json`` to ``--out``.

Exit codes: 0 success, 2 infeasible, 3 configuration error, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .biortho import canonical_system, measurement_system
from .errors import BracketFailure, GTVError, InfeasibleProblem, UnsupportedOperator
from .io import write_csv, write_json
from .measurements import (
    ApertureSample,
    DerivativeAtPoint,
    IdealSample,
    QuasiIdealSample,
    box_profile,
    gaussian_profile,
    moment,
    point_sample,
)
from .operators import from_descriptor, identity
from .problem import ConstraintSet, GridSpec, build_problem
from .rightinv import RightInverse
from .solvers import solve_constrained, solve_interpolation_lp, solve_penalized
from .spline import NonuniformSpline, from_report
from .verify import operator_suite

log = logging.getLogger("gtvspline")

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_CONFIG = 3
EXIT_VERIFY = 4

SAMPLES_POINTS = 1001


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# configuration


def read_config(path) -> dict[str, dict]:
    """Sections of an INI or JSON config as plain dictionaries."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not all(isinstance(v, dict) for v in data.values()):
            raise ConfigError("JSON config must map section names to objects")
        return {k.lower(): dict(v) for k, v in data.items()}
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return {s.lower(): dict(parser[s]) for s in parser.sections()}


def _floats(v) -> list[float]:
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    if isinstance(v, (int, float)):
        return [float(v)]
    return [float(x) for x in str(v).replace(",", " ").split()]


def _float(sec: dict, key: str, default=None):
    if key not in sec:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return default
    try:
        return float(sec[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} = {sec[key]!r} is not a number") from exc


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


def parse_operator(sec: dict):
    desc = {"kind": sec.get("kind", "derivative")}
    for key in ("order", "gamma"):
        if key in sec:
            desc[key] = float(sec[key]) if key == "gamma" else int(float(sec[key]))
    if "roots" in sec:
        desc["roots"] = _floats(sec["roots"])
    try:
        return from_descriptor(desc)
    except (ValueError, KeyError, GTVError) as exc:
        raise ConfigError(f"bad operator {desc}: {exc}") from exc


def _locations(sec: dict) -> list[float]:
    if "locations" in sec:
        return _floats(sec["locations"])
    if "count" in sec:
        n = int(float(sec["count"]))
        lo, hi = _float(sec, "lo", 0.0), _float(sec, "hi", 1.0)
        # cell midpoints, so no sample sits on the span ends
        return [lo + (i + 0.5) * (hi - lo) / n for i in range(n)]
    raise ConfigError("measurements need 'locations' or 'count'")


def parse_measurements(sec: dict, op) -> list:
    kind = sec.get("kind", "sample")
    if kind == "moment":
        orders = [int(x) for x in _floats(sec.get("orders", "0 1 2 3 4"))]
        lo, hi = _float(sec, "lo", 0.0), _float(sec, "hi", 1.0)
        return [moment(m, lo, hi) for m in orders]
    xs = _locations(sec)
    if kind == "sample":
        width = _float(sec, "width", 1e-2)
        return [point_sample(op, x, width) for x in xs]
    if kind == "ideal":
        return [IdealSample(x) for x in xs]
    if kind == "quasi":
        return [QuasiIdealSample(x, _float(sec, "width", 1e-2)) for x in xs]
    if kind == "box":
        prof = box_profile(_float(sec, "width", 0.1))
        return [ApertureSample(prof, x) for x in xs]
    if kind == "gaussian":
        prof = gaussian_profile(_float(sec, "sigma", 0.05))
        return [ApertureSample(prof, x) for x in xs]
    if kind == "derivative":
        order = int(_float(sec, "order", 0.0))
        return [DerivativeAtPoint(x, order) for x in xs]
    raise ConfigError(f"unknown measurement kind {kind!r}")


@dataclass
class RunConfig:
    """Fully defaulted scenario."""

    operator: object
    measurements: list
    y: np.ndarray
    truth: NonuniformSpline | None
    noise: float
    seed: int | None
    constraint: ConstraintSet
    grid: GridSpec
    method: str
    lam: float | None
    strict: bool


def build_run_config(cfg: dict, args, command: str) -> RunConfig:
    op_sec = cfg.get("operator", {})
    if command == "recover-measure":
        op = identity()
    elif command == "denoise" and not op_sec:
        op = from_descriptor({"kind": "derivative", "order": 1})
    else:
        op = parse_operator(op_sec)
    if "measurements" not in cfg:
        raise ConfigError("missing [measurements] section")
    try:
        ms = parse_measurements(cfg["measurements"], op)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if not ms:
        raise ConfigError("no measurements")
    data = cfg.get("data", {})
    seed = args.seed if args.seed is not None else (
        int(float(data["seed"])) if "seed" in data else None)
    noise = _float(data, "noise", 0.0)
    truth = None
    if "values" in data:
        y = np.array(_floats(data["values"]))
    elif "truth_knots" in data:
        knots = _floats(data["truth_knots"])
        weights = _floats(data.get("truth_weights", ""))
        null = _floats(data.get("truth_null", "")) or np.zeros(op.nullspace_dim)
        try:
            truth = NonuniformSpline(op, knots, weights, null)
        except ValueError as exc:
            raise ConfigError(f"bad ground truth: {exc}") from exc
        y = truth.measure(ms)
    else:
        raise ConfigError("[data] needs 'values' or a ground truth ('truth_knots', ...)")
    if noise > 0:
        if seed is None:
            raise ConfigError("a seed is required when noise > 0")
        y = y + noise * np.random.default_rng(seed).standard_normal(y.size)
    if y.size != len(ms):
        raise ConfigError(f"{len(ms)} measurements but {y.size} data values")

    con = cfg.get("constraint", {})
    kind = con.get("kind", "ball" if command == "denoise" else "point")
    eps_raw = con.get("epsilon", "auto")
    if args.epsilon is not None:
        kind, eps_raw = ("ball", args.epsilon) if args.epsilon > 0 else ("point", 0.0)
    if kind == "point":
        constraint = ConstraintSet.point(y)
    elif kind == "ball":
        if str(eps_raw) == "auto":
            eps = noise * math.sqrt(len(ms))
        else:
            eps = _float({"epsilon": eps_raw}, "epsilon")
        constraint = ConstraintSet.ball(y, eps)
    elif kind == "box":
        h = _float(con, "halfwidth")
        constraint = ConstraintSet.box(y - h, y + h)
    else:
        raise ConfigError(f"unknown constraint kind {kind!r}")

    g = cfg.get("grid", {})
    n = args.grid_n if args.grid_n is not None else (int(float(g["n"])) if "n" in g else None)
    grid = GridSpec(float(g["lo"]) if "lo" in g else None, float(g["hi"]) if "hi" in g else None,
                    n, _float(g, "margin", 0.1))

    sol = cfg.get("solver", {})
    lam = args.lam if args.lam is not None else (float(sol["lambda"]) if "lambda" in sol else None)
    method = sol.get("method", "penalized" if lam is not None else "auto")
    if args.lam is not None:
        method = "penalized"
    if method == "penalized" and lam is None:
        raise ConfigError("penalized solver needs a lambda")
    if method not in ("auto", "lp", "penalized", "constrained"):
        raise ConfigError(f"unknown solver method {method!r}")
    strict = bool(args.strict) or _bool(sol.get("strict", False))
    return RunConfig(op, ms, y, truth, noise, seed, constraint, grid, method, lam, strict)


# --------------------------------------------------------------------------
# commands


def _solve(rc: RunConfig):
    problem = build_problem(rc.operator, rc.measurements, constraint=rc.constraint,
                            grid_spec=rc.grid, strict=rc.strict)
    method = rc.method
    if method == "auto":
        method = "constrained" if rc.constraint.kind == "ball" else "lp"
    if method == "penalized":
        report = solve_penalized(problem, rc.lam)
    elif method == "constrained":
        report = solve_constrained(problem)
    else:
        report = solve_interpolation_lp(problem)
    return problem, report


def _write_outputs(out: Path, problem, report, spline, summary: dict):
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "spline.json", spline.to_dict())
    if problem.mode == "measure":
        write_csv(out / "samples.csv", ("x", "value"), zip(problem.grid, report.a))
    else:
        xs = np.linspace(problem.grid[0], problem.grid[-1], SAMPLES_POINTS)
        spline.write_samples_csv(out / "samples.csv", xs)
    spline.write_innovation_csv(out / "innovation.csv")
    write_json(out / "report.json", summary)


def _summary(command, rc, problem, report, spline, checks) -> dict:
    return {
        "command": command,
        "operator": problem.operator.descriptor(),
        "mode": problem.mode,
        "M": problem.M,
        "N": problem.N,
        "N0": problem.N0,
        "K": spline.K,
        "beta": report.objective,
        "gtv": spline.gtv(),
        "residual": report.residual,
        "B": problem.bound,
        "constraint": rc.constraint.kind,
        "epsilon": rc.constraint.epsilon,
        "lambda": report.lam,
        "method": report.method,
        "status": report.status,
        "iterations": report.iterations,
        "null_in_basis": report.null_in_basis,
        "seed": rc.seed,
        "checks": checks,
    }


def _print_checks(checks: dict, stream=None):
    stream = stream or sys.stdout
    for name, verdict in checks.items():
        print(f"{name:<28s} {verdict}", file=stream)


def _reconstruct(command: str, rc: RunConfig, out: Path) -> int:
    problem, report = _solve(rc)
    spline = from_report(problem, report)
    K, M, N0 = spline.K, problem.M, problem.N0
    checks = {"K <= M": "PASS" if K <= M else "FAIL"}
    if command == "interpolate":
        bound = M - N0 if report.null_in_basis else M
        checks["K <= M - N0"] = "PASS" if K <= bound else "FAIL"
    summary = _summary(command, rc, problem, report, spline, checks)
    _write_outputs(out, problem, report, spline, summary)
    print(f"{command}: K = {K}, M = {M}, N0 = {N0}, beta = {report.objective:.12g}, "
          f"residual = {report.residual:.3g}, B = {problem.bound:.6g}")
    _print_checks(checks)
    return EXIT_OK if all(v == "PASS" for v in checks.values()) else EXIT_VERIFY


def cmd_interpolate(rc: RunConfig, out: Path) -> int:
    return _reconstruct("interpolate", rc, out)


def cmd_denoise(rc: RunConfig, out: Path) -> int:
    return _reconstruct("denoise", rc, out)


def cmd_recover_measure(rc: RunConfig, out: Path) -> int:
    return _reconstruct("recover-measure", rc, out)


def cmd_verify_operator(cfg: dict, args, out: Path) -> int:
    op = parse_operator(cfg.get("operator", {}))
    shift_inv = bool(args.shift_invariant) or _bool(cfg.get("operator", {}).get("shift_invariant", False))
    try:
        system = canonical_system(op)
    except UnsupportedOperator:
        if "measurements" not in cfg:
            raise ConfigError(f"{op} has no canonical boundary functionals; "
                              f"give [measurements] to build them")
        system = measurement_system(op, parse_measurements(cfg["measurements"], op))
    seed = args.seed if args.seed is not None else 0
    checks = operator_suite(RightInverse(system, shift_invariant=shift_inv), seed=seed)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", {
        "command": "verify-operator",
        "operator": op.descriptor(),
        "shift_invariant": shift_inv,
        "seed": seed,
        "checks": [c.to_dict() for c in checks],
    })
    print(f"verify-operator: {op}{' (shift-invariant kernel)' if shift_inv else ''}")
    for c in checks:
        val = "-" if c.skipped else f"{c.value:.3e}"
        print(f"{c.name:<24s} {val:>12s}  {c.verdict}  {c.note}".rstrip())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


DEMO_CONFIG = {
    "operator": {"kind": "derivative", "order": "1"},
    "measurements": {"kind": "sample", "count": "40", "lo": "0", "hi": "1"},
    "data": {"truth_knots": "0.3 0.7", "truth_weights": "1 -2", "truth_null": "0.5",
             "noise": "0.05", "seed": "0"},
    "constraint": {"kind": "ball", "epsilon": "auto"},
    "grid": {"lo": "0", "hi": "1", "n": "401"},
}


# --------------------------------------------------------------------------
# entry point


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gtvspline",
                                description="Sparse spline reconstruction by gTV minimization.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("interpolate", "denoise", "recover-measure", "verify-operator", "demo"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, required=name != "demo")
        sp.add_argument("--out", type=Path, default=Path("out"))
        sp.add_argument("--seed", type=int)
        sp.add_argument("--grid-n", type=int, dest="grid_n")
        sp.add_argument("--lambda", type=float, dest="lam")
        sp.add_argument("--epsilon", type=float)
        sp.add_argument("--strict", action="store_true")
        sp.add_argument("--shift-invariant", action="store_true", dest="shift_invariant",
                        help="verify-operator: use the uncorrected kernel rho(x - y)")
    return p


def main(argv=None) -> int:
    level = os.environ.get("GTV_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args = make_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "demo":
            cfg = {k: dict(v) for k, v in DEMO_CONFIG.items()}
            if args.config is not None:
                cfg.update(read_config(args.config))
            rc = build_run_config(cfg, args, "denoise")
            return _reconstruct("denoise", rc, args.out)
        cfg = read_config(args.config)
        if args.command == "verify-operator":
            return cmd_verify_operator(cfg, args, args.out)
        rc = build_run_config(cfg, args, args.command)
        handler = {"interpolate": cmd_interpolate, "denoise": cmd_denoise,
                   "recover-measure": cmd_recover_measure}[args.command]
        return handler(rc, args.out)
    except (InfeasibleProblem, BracketFailure) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, OSError, GTVError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
