"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

from ._parse import ParseError
from .bounds import bound_curve, compute_tmin, parse_meta
from .configs import PRESET_NAMES, ConfigError, load_config, preset, with_overrides
from .distributions import kl_divergence, parse_arm, perturb_bounded
from .policies import parse_policy
from .results import emit
from .simulator import default_checkpoints, run_batch

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def _positive_int(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(v) and v == int(v) and v >= 0):
        raise argparse.ArgumentTypeError(f"not a nonnegative integer: {text!r}")
    return int(v)


def _overrides(p):
    p.add_argument("--horizon", type=_positive_int)
    p.add_argument("--reps", type=_positive_int)
    p.add_argument("--seed", type=_positive_int)


class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors, not I/O errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="robust-bandits", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="run an experiment from a YAML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    _overrides(p)

    p = sub.add_parser("preset", help="run a built-in experiment")
    p.add_argument("name", choices=PRESET_NAMES)
    p.add_argument("--out", required=True)
    _overrides(p)

    p = sub.add_parser("bounds", help="regret upper bound curve as CSV")
    p.add_argument("--policy", required=True, help="e.g. 'r-ucb(f=logpow(1,1))'")
    p.add_argument("--meta", required=True, help="e.g. 'sg(1, gaps=[0,2])'")
    p.add_argument("--tmax", required=True, type=_positive_int)
    p.add_argument("--points", type=_positive_int, default=64)
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("tmin", help="validity threshold report")
    p.add_argument("--policy", required=True)
    p.add_argument("--meta", required=True)

    p = sub.add_parser("perturb", help="KL perturbation of a bounded distribution")
    p.add_argument("--dist", required=True, help="e.g. 'uniform(0,1)'")
    p.add_argument("--a", required=True, type=float, help="target KL divergence")
    p.add_argument("--b", required=True, type=float, help="target minimum mean")

    sub.add_parser("selfcheck", help="run estimator-oracle and concentration checks")
    return ap


def _run(config, out_dir):
    start = time.perf_counter()
    trajectories = run_batch(config)
    wall = time.perf_counter() - start
    paths = emit(trajectories, out_dir, config, wall)
    print(f"{len(trajectories)} runs in {wall:.1f}s; wrote {', '.join(str(p) for p in paths.values())}")


def cmd_run(args):
    config = with_overrides(load_config(args.config), args.horizon, args.reps, args.seed)
    _run(config, args.out)


def cmd_preset(args):
    config = preset(args.name)
    _run(with_overrides(config, args.horizon, args.reps, args.seed), args.out)


def cmd_bounds(args):
    spec, meta = parse_policy(args.policy), parse_meta(args.meta)
    if args.tmax < 3:
        raise ValueError("--tmax must be at least 3")
    ts = [t for t in default_checkpoints(args.tmax, max(args.points, 2)) if t >= 3]
    rows = bound_curve(spec, meta, ts)
    fh = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "bound"])
        w.writerows((t, repr(b)) for t, b in rows)
    finally:
        if args.out:
            fh.close()


def cmd_tmin(args):
    report = compute_tmin(parse_policy(args.policy), parse_meta(args.meta))
    print(json.dumps({
        "t_min": report.t_min,
        "components": report.components,
        "rules": report.rules,
        "info": report.info,
    }, indent=2))


def cmd_perturb(args):
    F = parse_arm(args.dist)
    Fp = perturb_bounded(F, args.a, args.b)
    print(json.dumps({
        "perturbed": Fp.to_text(),
        "gamma": Fp.gamma,
        "v": Fp.v,
        "v_prime": Fp.v_prime,
        "mean": Fp.mean(),
        "kl": kl_divergence(F, Fp),
    }, indent=2))


def cmd_selfcheck(args):
    from .selfcheck import run_all

    if not run_all():
        return EXIT_INVALID


COMMANDS = {
    "run": cmd_run,
    "preset": cmd_preset,
    "bounds": cmd_bounds,
    "tmin": cmd_tmin,
    "perturb": cmd_perturb,
    "selfcheck": cmd_selfcheck,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.cmd](args) or EXIT_OK
    except (ConfigError, ParseError, ValueError, TypeError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
