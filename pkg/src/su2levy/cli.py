"""Command-line interface: ``su2levy {check,density,simulate,compare,gap}``.

Exit codes: 0 ok, 2 bad input, 3 small time unresolved, 4 bad simulation
parameters, 5 comparison failed, 6 hypothesis (H) violated.
"""

import argparse
import json
import math
import sys

import numpy as np

from .density import density_profile
from .errors import HypothesisHViolated, InvalidSpec, SmallTimeUnresolved, TimeMismatch
from .generator import hypothesis_H, is_conjugate_invariant, is_inverse_invariant, load_spec, spectral_gap
from .simulate import PathConfig, SampleSet, compare, default_dt, simulate_terminal

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_SMALL_TIME = 3
EXIT_BAD_SIM = 4
EXIT_COMPARE_FAILED = 5
EXIT_NO_H = 6


def format_float(x):
    return f"{x:.17g}"


def dumps(obj):
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return "null"
        s = format_float(x)
        return s if any(ch in s for ch in ".en") else s + ".0"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _positive_float(s):
    v = float(s)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s!r}")
    return v


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s!r}")
    return v


def _seed(s):
    v = int(s)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    parser = argparse.ArgumentParser(prog="su2levy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="generator spec JSON")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        return p

    common(sub.add_parser("check", help="structural checks of a generator"))

    p = common(sub.add_parser("density", help="density profile over conjugacy angles"))
    p.add_argument("--t", type=_positive_float, required=True)
    p.add_argument("--kmax", type=_positive_int, default=None)
    p.add_argument("--grid", type=_positive_int, default=2049)
    p.add_argument("--force-general", action="store_true")

    p = common(sub.add_parser("simulate", help="Monte Carlo terminal samples"))
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--paths", type=_positive_int, default=10000)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--seed", type=_seed, default=0)

    p = common(sub.add_parser("compare", help="compare samples with the series density"))
    p.add_argument("--t", type=_positive_float, required=True)
    p.add_argument("--samples", required=True, help="sample CSV from 'simulate'")
    p.add_argument("--kmax", type=_positive_int, default=None)
    p.add_argument("--bins", type=_positive_int, default=50)
    p.add_argument("--force-general", action="store_true")

    p = common(sub.add_parser("gap", help="spectral gap and per-level decay rates"))
    p.add_argument("--kmax", type=_positive_int, default=20)
    return parser


def cmd_check(args, spec):
    h = hypothesis_H(spec)
    notes = []
    if not h:
        notes.append("hypothesis (H) fails: densities and the spectral gap are not guaranteed")
    if spec.levy.total_mass == 0:
        notes.append("no jumps")
    report = {
        "hypothesis_H": h,
        "inverse_invariant": is_inverse_invariant(spec),
        "conjugate_invariant": is_conjugate_invariant(spec),
        "levy_mass": spec.levy.total_mass,
        "notes": notes,
    }
    _write(dumps(report) + "\n", args.out)
    return EXIT_OK


def cmd_density(args, spec):
    try:
        prof = density_profile(spec, args.t, args.grid, k_max=args.kmax, force_general=args.force_general)
    except SmallTimeUnresolved as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SMALL_TIME
    print(f"k_max={prof.k_max} tail_estimate={format_float(prof.tail_estimate)}", file=sys.stderr)
    _write(prof.to_csv(), args.out)
    return EXIT_OK


def cmd_simulate(args, spec):
    dt = args.dt if args.dt is not None else min(default_dt(spec), args.t if args.t > 0 else 1.0)
    try:
        config = PathConfig(args.t, dt, args.paths, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_SIM
    samples = simulate_terminal(spec, config)
    _write(samples.to_csv(), args.out)
    return EXIT_OK


def cmd_compare(args, spec):
    try:
        with open(args.samples) as fh:
            samples = SampleSet.from_csv(fh.read(), args.t)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        report = compare(spec, args.t, samples, k_max=args.kmax, bins=args.bins, force_general=args.force_general)
    except TimeMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except SmallTimeUnresolved as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SMALL_TIME
    _write(dumps(report.to_dict()) + "\n", args.out)
    return EXIT_OK if report.passed else EXIT_COMPARE_FAILED


def cmd_gap(args, spec):
    try:
        sg = spectral_gap(spec, args.kmax)
    except HypothesisHViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_H
    report = {"gap": sg.gap, "attained_k": sg.attained_k, "certified": sg.certified, "per_k_rates": list(sg.rates)}
    _write(dumps(report) + "\n", args.out)
    return EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "density": cmd_density,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "gap": cmd_gap,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        spec = load_spec(args.config)
    except (OSError, InvalidSpec) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    return COMMANDS[args.command](args, spec)


if __name__ == "__main__":
    sys.exit(main())
