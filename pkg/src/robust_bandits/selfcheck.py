"""Quick runtime checks of the estimators, the compiled kernel and a concentration width."""
from __future__ import annotations

import math

import numpy as np

from .distributions import BanditInstance, Gaussian
from .estimators import MoMState, TruncatedMeanState
from .policies import RUCB, RUCBG, RUCBGMoM
from .scaling import InvLogPower, LogPower
from .simulator import run_single, run_single_reference


def _naive_mom(xs, t):
    log_t = math.log(t)
    if len(xs) <= 32 * log_t:
        return float(np.median(xs))
    q = math.ceil(32 * log_t)
    n = math.ceil(len(xs) / q)
    return float(np.median([np.mean(xs[i:i + n]) for i in range(0, len(xs), n)]))


def check_truncated(steps=2000, seed=1):
    rng = np.random.default_rng(seed)
    xs = rng.standard_t(1.5, steps) * 3
    taus = np.sort(rng.uniform(0, 20, steps))
    st = TruncatedMeanState()
    worst = 0.0
    for i, (x, tau) in enumerate(zip(xs, taus)):
        st.absorb(x)
        got = st.query(tau)
        seen = xs[: i + 1]
        want = math.fsum(seen[np.abs(seen) <= tau]) / (i + 1)
        worst = max(worst, abs(got - want) / max(abs(want), 1e-300))
    return worst <= 1e-12, f"max relative error {worst:.2e}"


def check_mom(max_u=200, seed=2):
    rng = np.random.default_rng(seed)
    xs = list(rng.pareto(2.5, max_u))
    worst = 0.0
    for t in (3, 10, 100, 10_000):
        st = MoMState()
        for u in range(1, max_u + 1):
            st.absorb(xs[u - 1])
            got, want = st.query(t), _naive_mom(xs[:u], t)
            worst = max(worst, abs(got - want) / max(abs(want), 1e-300))
    return worst <= 1e-12, f"max relative error {worst:.2e}"


def check_replay(horizon=2000, seed=3):
    inst = BanditInstance((Gaussian(0.0, 1.0), Gaussian(0.5, 2.0), Gaussian(0.2, 0.5)))
    specs = [RUCB(LogPower(1, 2)), RUCBG(LogPower(1, 2)), RUCBGMoM(LogPower(1, 1), InvLogPower(1, 1))]
    for spec in specs:
        a = run_single(inst, spec, horizon, seed, record_arms=True)
        b = run_single_reference(inst, spec, horizon, seed)
        if not (np.array_equal(a.arms, b.arms) and np.array_equal(a.regret, b.regret)):
            return False, f"kernel and reference disagree for {spec.to_text()}"
    return True, "kernel matches reference for r-ucb, r-ucb-g and r-ucb-g-mom"


def check_concentration(u=100, reps=20_000, seed=4):
    width = math.sqrt(2 * math.log(1 / 0.05) / u)
    rng = np.random.default_rng(seed)
    means = rng.standard_normal((reps, u)).mean(axis=1)
    freq = float(np.mean(means >= width))
    limit = 0.05 + 3 * math.sqrt(0.05 * 0.95 / reps)
    return freq <= limit, f"exceedance frequency {freq:.4f} (limit {limit:.4f})"


CHECKS = {
    "truncated-mean oracle": check_truncated,
    "median-of-means oracle": check_mom,
    "kernel replay": check_replay,
    "gaussian concentration": check_concentration,
}


def run_all(out=print) -> bool:
    ok = True
    for name, fn in CHECKS.items():
        passed, detail = fn()
        ok &= passed
        out(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return ok
