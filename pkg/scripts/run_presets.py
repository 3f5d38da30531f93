"""Run every built-in experiment and write results/<preset>/{raw,summary}.csv + meta.json.

    python3 scripts/run_presets.py [--horizon 100000] [--reps 200] [--out results]
"""
import argparse
import time
from pathlib import Path

from robust_bandits.configs import PRESET_HORIZON, PRESET_NAMES, PRESET_REPS, preset
from robust_bandits.results import emit
from robust_bandits.simulator import run_batch, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=PRESET_HORIZON)
    ap.add_argument("--reps", type=int, default=PRESET_REPS)
    ap.add_argument("--out", default="results")
    ap.add_argument("names", nargs="*", default=list(PRESET_NAMES))
    args = ap.parse_args()

    for name in args.names:
        cfg = preset(name, horizon=args.horizon, reps=args.reps)
        t0 = time.perf_counter()
        trs = run_batch(cfg)
        wall = time.perf_counter() - t0
        emit(trs, Path(args.out) / name, cfg, wall)
        summary = summarize(trs)
        finals = {lab: summary.table(lab)["mean"][-1] for lab in summary.labels}
        print(f"{name:15s} {wall:6.1f}s  " + "  ".join(f"{k}: {v:.1f}" for k, v in finals.items()))


if __name__ == "__main__":
    main()
