"""Command-line surface: evaluate energies, repair trajectories, emit
divergence certificates, and check boundedness conditions.

Exit codes are disjoint across commands: 0 success (converged energy, all
repairs clean, divergent certificate, no violation found); 2 bad input or
failed precondition; 3 a violation verdict (including slope fields
rejected before a repair); 4 a non-converged energy or an inconclusive
certificate.

The default divergence cap (1e12) can be overridden with the environment
variable VARIGAP_CAP or the --cap flag.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import report as report_mod
from .conditions import STATUS_INVALID, STATUS_OK, check_B, check_R, check_Ry, check_zero_speed
from .expr import ExprError
from .functional import (
    IntegrandError,
    PreconditionError,
    STATUS_CONVERGED,
    VERDICT_DIVERGENT,
    energy,
    gap_certificate,
)
from .lagrangian import Lagrangian, RhoPair
from .quadrature import QuadConfig
from .repair import RhoRejectedError, repair, sweep_csv
from .trajectory import (
    AnalyticTrajectory,
    PLTrajectory,
    TrajectoryError,
    discretize,
    from_json as trajectory_from_json,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_VIOLATION = 3
EXIT_DIVERGED = 4

_BUILTIN_TRAJECTORIES = {
    "sqrt": lambda: AnalyticTrajectory("sqrt"),
    "zero": lambda: AnalyticTrajectory("constant", (0.0,)),
    "identity": lambda: AnalyticTrajectory("affine", (0.0, 1.0)),
}


class InputError(ValueError):
    pass


def _load_json(path: str) -> dict:
    return json.loads(Path(path).read_text())


def _load_lagrangian(source: str) -> Lagrangian:
    if source.startswith("builtin:"):
        return Lagrangian.builtin(source.split(":", 1)[1])
    return Lagrangian.from_json(_load_json(source))


def _load_trajectory(source: str, args: argparse.Namespace):
    if source.startswith("builtin:"):
        name = source.split(":", 1)[1]
        if name not in _BUILTIN_TRAJECTORIES:
            known = ", ".join(sorted(_BUILTIN_TRAJECTORIES))
            raise InputError(f"unknown builtin trajectory {name!r} (known: {known})")
        y = _BUILTIN_TRAJECTORIES[name]()
    else:
        y = trajectory_from_json(_load_json(source))
    n = getattr(args, "discretize", None)
    if n is not None and isinstance(y, AnalyticTrajectory):
        y = discretize(y, n, getattr(args, "grading", 2.0))
    return y


def _load_rho(path: str) -> RhoPair:
    return RhoPair.from_json(_load_json(path))


def _default_cap() -> float:
    raw = os.environ.get("VARIGAP_CAP")
    if raw is None:
        return 1e12
    try:
        return float(raw)
    except ValueError as exc:
        raise InputError(f"VARIGAP_CAP is not a number: {raw!r}") from exc


def _make_quad(args: argparse.Namespace) -> QuadConfig:
    cap = args.cap if args.cap is not None else _default_cap()
    return QuadConfig(tol=args.tol, cap=cap)


def _emit(args: argparse.Namespace, text: str) -> None:
    sys.stdout.write(text)
    output = getattr(args, "output", None)
    if output:
        Path(output).write_text(text)


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _parse_floats(raw: str, what: str, count: int | None = None) -> list[float]:
    try:
        values = [float(piece) for piece in raw.split(",")]
    except ValueError as exc:
        raise InputError(f"{what} must be comma-separated numbers, got {raw!r}") from exc
    if count is not None and len(values) != count:
        raise InputError(f"{what} needs exactly {count} numbers, got {len(values)}")
    return values


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_evaluate(args: argparse.Namespace) -> int:
    L = _load_lagrangian(args.lagrangian)
    y = _load_trajectory(args.trajectory, args)
    quad = _make_quad(args)
    result = energy(L, y, quad)
    if args.out == "csv":
        value = result.value.to_json()
        cell = value if isinstance(value, str) else repr(value)
        text = (
            "value,status,lower_bound,segments_evaluated\n"
            f"{cell},{result.status},{result.lower_bound!r},{result.segments_evaluated}\n"
        )
    else:
        text = _json_text(result.to_json())
    _emit(args, text)
    return EXIT_OK if result.status == STATUS_CONVERGED else EXIT_DIVERGED


def cmd_repair(args: argparse.Namespace) -> int:
    L = _load_lagrangian(args.lagrangian)
    y = _load_trajectory(args.trajectory, args)
    if not isinstance(y, PLTrajectory):
        raise InputError("repair needs a piecewise-linear trajectory (use --discretize N)")
    rho = _load_rho(args.rho)
    quad = _make_quad(args)
    if args.sweep is not None:
        thresholds = _parse_floats(args.sweep, "--sweep")
        if any(b <= a for a, b in zip(thresholds[:-1], thresholds[1:])):
            raise InputError("--sweep thresholds must be strictly increasing")
    else:
        thresholds = [args.threshold]
    try:
        reports = [
            repair(y, L, rho, p=args.p, threshold=m, quad=quad, mode=args.mode)
            for m in thresholds
        ]
    except RhoRejectedError as exc:
        _emit(args, _json_text(exc.verdict.to_json()))
        return EXIT_VIOLATION
    if args.out == "csv":
        text = sweep_csv(reports)
    elif len(reports) == 1:
        text = _json_text(reports[0].to_json())
    else:
        text = _json_text([r.to_json() for r in reports])
    _emit(args, text)
    if args.figure:
        report_mod.save_sweep_figure(reports, args.figure)
    return EXIT_OK


def cmd_gap_demo(args: argparse.Namespace) -> int:
    y = _load_trajectory(args.trajectory, args)
    if not isinstance(y, PLTrajectory):
        raise InputError(
            "the certificate needs a piecewise-linear trajectory (use --discretize N)"
        )
    quad = _make_quad(args)
    cert = gap_certificate(y, quad)
    if args.out == "csv":
        text = cert.to_csv()
    elif args.out == "svg":
        text = report_mod.bounds_svg(cert)
    else:
        text = _json_text(cert.to_json())
    _emit(args, text)
    if args.figure:
        report_mod.save_bounds_figure(cert, args.figure)
    return EXIT_OK if cert.verdict == VERDICT_DIVERGENT else EXIT_DIVERGED


def cmd_check(args: argparse.Namespace) -> int:
    L = _load_lagrangian(args.lagrangian)
    cap = args.cap if args.cap is not None else _default_cap()
    condition = args.condition
    if condition == "R":
        if args.rho is None or args.interval is None:
            raise InputError("condition R needs --rho and --interval a,b")
        lo, hi = _parse_floats(args.interval, "--interval", 2)
        verdict = check_R(L, _load_rho(args.rho), (lo, hi), samples=args.samples, cap=cap)
    elif condition == "Ry":
        if args.rho is None or args.trajectory is None:
            raise InputError("condition Ry needs --rho and --trajectory")
        y = _load_trajectory(args.trajectory, args)
        verdict = check_Ry(L, _load_rho(args.rho), y, samples=args.samples, cap=cap)
    elif condition == "B":
        if args.box is None:
            raise InputError("condition B needs --box K,r")
        K, r = _parse_floats(args.box, "--box", 2)
        verdict = check_B(L, K, r, samples_per_axis=args.samples_per_axis, cap=cap)
    else:  # zero-speed
        if args.interval is None:
            raise InputError("condition zero-speed needs --interval a,b")
        lo, hi = _parse_floats(args.interval, "--interval", 2)
        verdict = check_zero_speed(L, (lo, hi), samples=args.samples, cap=cap)
    _emit(args, _json_text(verdict.to_json()))
    if verdict.status == STATUS_OK:
        return EXIT_OK
    if verdict.status == STATUS_INVALID:
        return EXIT_INPUT
    return EXIT_VIOLATION


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser, trajectory: str = "required") -> None:
    if trajectory:
        sub.add_argument(
            "--trajectory",
            required=trajectory == "required",
            help="trajectory JSON path or builtin:{sqrt,zero,identity}",
        )
        sub.add_argument(
            "--discretize",
            type=int,
            default=None,
            metavar="N",
            help="interpolate an analytic trajectory on N graded segments",
        )
        sub.add_argument(
            "--grading", type=float, default=2.0, help="mesh grading exponent (default 2)"
        )
    sub.add_argument("--tol", type=float, default=1e-8, help="quadrature tolerance")
    sub.add_argument(
        "--cap", type=float, default=None, help="divergence cap (default 1e12 or VARIGAP_CAP)"
    )
    sub.add_argument("--seed", type=int, default=0, help="seed echoing the run configuration")
    sub.add_argument("--output", help="also write the emitted payload to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varigap",
        description="numerical toolkit for 1-D autonomous variational problems",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p_eval = commands.add_parser("evaluate", help="evaluate the energy of a trajectory")
    p_eval.add_argument("--lagrangian", required=True, help="JSON path or builtin:NAME")
    _add_common(p_eval)
    p_eval.add_argument("--out", choices=("json", "csv"), default="json")
    p_eval.set_defaults(func=cmd_evaluate)

    p_rep = commands.add_parser("repair", help="run the Lipschitz repair pipeline")
    p_rep.add_argument("--lagrangian", required=True)
    p_rep.add_argument("--rho", required=True, help="slope-field JSON path")
    p_rep.add_argument("--p", type=float, default=1.0, help="Sobolev exponent (default 1)")
    p_rep.add_argument("--threshold", type=float, default=8.0, help="slope threshold")
    p_rep.add_argument("--sweep", help="comma-separated increasing thresholds")
    p_rep.add_argument("--mode", choices=("ode", "constant"), default="ode")
    _add_common(p_rep)
    p_rep.add_argument("--out", choices=("json", "csv"), default="json")
    p_rep.add_argument("--figure", help="render the sweep to this image file")
    p_rep.set_defaults(func=cmd_repair)

    p_gap = commands.add_parser("gap-demo", help="emit the divergence certificate")
    _add_common(p_gap)
    p_gap.add_argument("--out", choices=("json", "csv", "svg"), default="json")
    p_gap.add_argument("--figure", help="render the bound sequence to this image file")
    p_gap.set_defaults(func=cmd_gap_demo)

    p_chk = commands.add_parser("check", help="check a boundedness condition")
    p_chk.add_argument("--lagrangian", required=True)
    p_chk.add_argument(
        "--condition", choices=("R", "Ry", "B", "zero-speed"), default="R"
    )
    p_chk.add_argument("--rho", help="slope-field JSON path")
    p_chk.add_argument("--interval", help="a,b for conditions R and zero-speed")
    p_chk.add_argument("--box", help="K,r for condition B")
    p_chk.add_argument("--samples", type=int, default=4096)
    p_chk.add_argument("--samples-per-axis", type=int, default=129)
    _add_common(p_chk, trajectory="optional")
    p_chk.set_defaults(func=cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RhoRejectedError as exc:
        sys.stdout.write(_json_text(exc.verdict.to_json()))
        return EXIT_VIOLATION
    except (
        InputError,
        ExprError,
        TrajectoryError,
        PreconditionError,
        IntegrandError,
        json.JSONDecodeError,
        FileNotFoundError,
        KeyError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
