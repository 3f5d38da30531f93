"""Sigma-aware UCB told the wrong sigma versus R-UCB, which needs no sigma.

Prints mean regret and regret / log t at a few rounds for both policies;
the misinformed baseline's regret / log t keeps growing.
"""
import argparse
import math

import numpy as np

from robust_bandits.configs import preset, with_overrides
from robust_bandits.simulator import run_batch, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=100_000)
    ap.add_argument("--reps", type=int, default=200)
    args = ap.parse_args()

    cfg = with_overrides(preset("inconsistency"), horizon=args.horizon, reps=args.reps)
    summary = summarize(run_batch(cfg))
    cps = np.array(cfg.checkpoints)
    targets = [10**k for k in range(2, 8) if 10**k < cfg.horizon] + [cfg.horizon]
    idx = sorted({int(np.abs(cps - x).argmin()) for x in targets})
    for label in summary.labels:
        tab = summary.table(label)
        print(label)
        for i in idx:
            t, m = int(tab["t"][i]), float(tab["mean"][i])
            print(f"  t={t:>8d}  mean regret {m:10.1f}  regret/log t {m / math.log(t):8.1f}")


if __name__ == "__main__":
    main()
