"""Command line entry point: ``projquant {eval,invariance,coeffs,flat-compare}``.

Exit codes: 0 pass, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from .expr import ExprError, parse
from .flat import quantize_flat
from .jets import DomainError
from .oracle import MAX_STAGE, SIDES, OracleParams, closed_form_tau_degree, compare_with_engine, develop
from .quantization import CriticalShiftError, quantize
from .sampling import random_alpha
from .scene import Scene, SceneError, load_scene, parse_number

DEFAULT_SEED = 20240611
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("projquant")


class InputError(Exception):
    pass


def fmt(x: float) -> str:
    """17 significant digits, as a JSON number."""
    x = float(x)
    if not np.isfinite(x):
        return '"' + repr(x) + '"'
    return format(x, ".17g")


def record(**fields) -> str:
    parts = []
    for key, value in fields.items():
        if isinstance(value, (list, tuple)):
            text = "[" + ", ".join(fmt(v) for v in value) + "]"
        elif isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, (int, float)):
            text = fmt(value) if isinstance(value, float) else str(value)
        else:
            text = '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'
        parts.append(f'"{key}": {text}')
    return "{" + ", ".join(parts) + "}"


def parse_points(text: str, m: int) -> list[tuple[float, ...]]:
    """``"0.1,0.2; 0.3,0.4"`` -> two points."""
    points = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        try:
            pt = tuple(float(parse_number(x.strip(), "--points")) for x in chunk.split(","))
        except SceneError as exc:
            raise InputError(str(exc)) from None
        if len(pt) != m:
            raise InputError(f"--points: point {chunk.strip()!r} has {len(pt)} coordinates, chart has {m}")
        points.append(pt)
    if not points:
        raise InputError("--points: no points given")
    return points


def _points(args, scene: Scene):
    pts = parse_points(args.points, scene.chart.dim) if args.points else scene.points
    if not pts:
        raise InputError("no evaluation points: add 'points' to the scene or pass --points")
    return pts


def cmd_eval(args) -> int:
    scene = load_scene(args.scene)
    scene.check_shift()
    for pt in _points(args, scene):
        value = quantize(scene.connection, scene.symbol, scene.density, scene.lam, scene.mu, pt)
        print(record(point=pt, value=value))
    return EXIT_OK


def cmd_invariance(args) -> int:
    scene = load_scene(args.scene)
    scene.check_shift()
    m = scene.chart.dim
    if args.alpha:
        if len(args.alpha) != m:
            raise InputError(f"--alpha needs {m} expressions, got {len(args.alpha)}")
        alpha = [parse(a, scene.chart) for a in args.alpha]
        source = "flag"
    elif scene.alpha is not None:
        alpha, source = scene.alpha, "scene"
    else:
        alpha = random_alpha(scene.chart, np.random.default_rng(args.seed))
        source = f"seed {args.seed}"
    changed = scene.connection.projective_change(alpha)
    worst = 0.0
    for pt in _points(args, scene):
        q = quantize(scene.connection, scene.symbol, scene.density, scene.lam, scene.mu, pt)
        q2 = quantize(changed, scene.symbol, scene.density, scene.lam, scene.mu, pt)
        dev = abs(q2 - q) / max(1.0, abs(q))
        worst = max(worst, dev)
        print(record(point=pt, value=q, value_changed=q2, deviation=dev))
    ok = worst <= args.tolerance
    print(record(alpha=source, max_deviation=worst, tolerance=args.tolerance, passed=ok))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_coeffs(args) -> int:
    if not 0 <= args.stage <= MAX_STAGE:
        raise InputError(f"stage must be in [0, {MAX_STAGE}], got {args.stage}")
    if args.m < 2:
        raise InputError(f"m must be >= 2, got {args.m}")
    params = OracleParams(args.m, args.lam, args.k, args.delta)
    poly = develop(args.side, params, args.stage)
    print(poly.format())
    print("# closed-form tau regrouping")
    for t in range(args.stage + 1):
        print(f"t={t}: {closed_form_tau_degree(args.stage, t, args.side, params)}")
    report = compare_with_engine(args.stage, args.side, params)
    print("# comparison with the engine")
    print(report)
    print("PASS" if report.ok else "FAIL")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_flat_compare(args) -> int:
    scene = load_scene(args.scene)
    if not scene.connection.is_flat_chart():
        raise InputError(f"{args.scene}: flat-compare needs every Christoffel symbol to be 0")
    scene.check_shift()
    worst = 0.0
    for pt in _points(args, scene):
        q = quantize(scene.connection, scene.symbol, scene.density, scene.lam, scene.mu, pt)
        q_flat = quantize_flat(scene.symbol, scene.density, scene.lam, scene.mu, pt)
        worst = max(worst, abs(q - q_flat))
        print(record(point=pt, value=q, value_flat=q_flat, deviation=abs(q - q_flat)))
    ok = worst <= args.tolerance
    print(record(max_deviation=worst, tolerance=args.tolerance, passed=ok))
    return EXIT_OK if ok else EXIT_FAIL


def _fraction(text: str) -> Fraction:
    try:
        return parse_number(text, "argument")
    except SceneError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="projquant", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def scene_cmd(name, help, tol):
        s = sub.add_parser(name, help=help)
        s.add_argument("--scene", required=True, metavar="PATH")
        s.add_argument("--points", metavar="LIST", help='override scene points, e.g. "0.1,0.2;0.3,0.4"')
        if tol is not None:
            s.add_argument("--tolerance", type=float, default=tol)
        return s

    s = scene_cmd("eval", "evaluate Q(conn, S)(f) at the scene points", None)
    s.set_defaults(func=cmd_eval)

    s = scene_cmd("invariance", "compare Q under a projective change of connection", 1e-7)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--alpha", nargs="+", metavar="EXPR", help="one-form components (default: scene or random)")
    s.set_defaults(func=cmd_invariance)

    s = sub.add_parser("coeffs", help="dump the exact term recursion at a stage")
    s.add_argument("--stage", type=int, required=True)
    s.add_argument("--side", choices=SIDES, default="nabla")
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--lam", type=_fraction, default=Fraction(1, 2))
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--delta", type=_fraction, default=Fraction(0))
    s.set_defaults(func=cmd_coeffs)

    s = scene_cmd("flat-compare", "compare the engine with the flat formula", 1e-12)
    s.set_defaults(func=cmd_flat_compare)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except CriticalShiftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SceneError, InputError, ExprError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
