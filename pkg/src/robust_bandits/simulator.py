"""Seeded Monte-Carlo regret experiments.

Rewards for a run come from per-arm streams: arm i's n-th pull receives the
n-th draw of a generator seeded by child i of ``SeedSequence(seed)``. The
whole stream table is drawn up front, so a run is a pure function of
(instance, policy, horizon, seed).

Regret is pseudo-regret: the gap of the pulled arm, accumulated.
"""
from __future__ import annotations

import functools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .distributions import BanditInstance
from .policies import (
    RUCB,
    RUCBG,
    AlphaUCB,
    PolicySpec,
    RUCBGMoM,
    init_policy,
    round_params,
    select_arm,
    update_policy,
)

MASK64 = (1 << 64) - 1
N_CHECKPOINTS = 64


def splitmix64(x: int) -> int:
    """SplitMix64 step: golden-gamma increment followed by the avalanche finalizer."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix64(master_seed: int, policy_index: int, rep: int) -> int:
    """Replication seed: splitmix64(splitmix64(splitmix64(master) ^ policy) ^ rep)."""
    h = splitmix64(master_seed & MASK64)
    h = splitmix64(h ^ (policy_index & MASK64))
    return splitmix64(h ^ (rep & MASK64))


def default_checkpoints(horizon: int, n: int = N_CHECKPOINTS, extra=()) -> tuple:
    """n log-spaced rounds in [1, horizon], deduplicated upward, ending at horizon."""
    if horizon < 1:
        raise ValueError("horizon must be positive")
    if horizon <= n:
        pts = list(range(1, horizon + 1))
    else:
        pts = []
        for x in np.geomspace(1, horizon, n):
            c = int(round(x))
            if pts and c <= pts[-1]:
                c = pts[-1] + 1
            pts.append(c)
        pts[-1] = horizon
    return tuple(sorted(set(pts) | {int(e) for e in extra if 1 <= e <= horizon}))


@dataclass(frozen=True)
class ExperimentConfig:
    instance: BanditInstance
    policies: tuple  # of (label, PolicySpec)
    horizon: int
    reps: int
    master_seed: int
    checkpoints: tuple | None = None

    def __post_init__(self):
        pols = tuple((str(lab), spec) for lab, spec in self.policies)
        object.__setattr__(self, "policies", pols)
        if not pols:
            raise ValueError("at least one policy is required")
        labels = [lab for lab, _ in pols]
        if len(set(labels)) != len(labels):
            raise ValueError(f"policy labels must be unique, got {labels}")
        if self.horizon < self.instance.k:
            raise ValueError(f"horizon {self.horizon} is below the arm count {self.instance.k}")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not 0 <= self.master_seed <= MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        cps = self.checkpoints
        cps = default_checkpoints(self.horizon) if cps is None else tuple(int(c) for c in cps)
        if not cps or list(cps) != sorted(set(cps)) or cps[0] < 1 or cps[-1] > self.horizon:
            raise ValueError("checkpoints must be distinct, sorted and within [1, horizon]")
        object.__setattr__(self, "checkpoints", cps)


@dataclass
class Trajectory:
    label: str
    rep: int
    checkpoints: tuple
    regret: np.ndarray
    arms: np.ndarray | None = field(default=None, repr=False)

    @property
    def final(self) -> float:
        return float(self.regret[-1])

    def at(self, t: int) -> float:
        return float(self.regret[self.checkpoints.index(t)])


@dataclass(frozen=True)
class SummaryRow:
    policy: str
    t: int
    mean: float
    std: float
    q10: float
    q90: float


@dataclass(frozen=True)
class Summary:
    rows: tuple

    def table(self, label: str) -> dict[str, np.ndarray]:
        rows = [r for r in self.rows if r.policy == label]
        if not rows:
            raise KeyError(label)
        return {
            name: np.array([getattr(r, name) for r in rows])
            for name in ("t", "mean", "std", "q10", "q90")
        }

    @property
    def labels(self) -> list[str]:
        return list(dict.fromkeys(r.policy for r in self.rows))


# --------------------------------------------------------------------------
# runs


def draw_rewards(instance: BanditInstance, horizon: int, seed: int) -> np.ndarray:
    children = np.random.SeedSequence(seed).spawn(instance.k)
    table = np.empty((instance.k, horizon))
    for i, (arm, ss) in enumerate(zip(instance.arms, children)):
        table[i] = arm.sample(np.random.default_rng(ss), horizon)
    return table


def _kind_code(spec) -> int:
    if isinstance(spec, RUCBG):
        return _kernels.R_UCB_G
    if isinstance(spec, RUCBGMoM):
        return _kernels.MOM
    if isinstance(spec, (RUCB, AlphaUCB)):
        return _kernels.R_UCB
    raise TypeError(f"not a policy spec: {spec!r}")


@functools.lru_cache(maxsize=32)
def _schedule(spec: PolicySpec, horizon: int):
    ft = np.empty(horizon + 1)
    aux = np.empty(horizon + 1)
    lnt = np.empty(horizon + 1)
    for t in range(horizon + 1):
        ft[t], aux[t], lnt[t] = round_params(spec, t)
    qt = np.array([math.ceil(32.0 * x) for x in lnt], dtype=np.int64)
    for a in (ft, aux, lnt, qt):
        a.flags.writeable = False
    return ft, aux, lnt, qt


def run_single(instance: BanditInstance, spec: PolicySpec, horizon: int, seed: int,
               checkpoints=None, label: str = "", rep: int = 0,
               record_arms: bool = False) -> Trajectory:
    if horizon < instance.k:
        raise ValueError("horizon must be at least the number of arms")
    cps = default_checkpoints(horizon) if checkpoints is None else tuple(checkpoints)
    rewards = draw_rewards(instance, horizon, seed)
    ft, aux, lnt, qt = _schedule(spec, horizon)
    out = np.zeros(len(cps))
    arms = np.empty(horizon if record_arms else 0, dtype=np.int64)
    _kernels.run_policy(
        _kind_code(spec), rewards, np.asarray(instance.gaps, dtype=float),
        ft, aux, lnt, qt, np.asarray(cps, dtype=np.int64), out, arms,
    )
    return Trajectory(label, rep, cps, out, arms if record_arms else None)


def run_single_reference(instance: BanditInstance, spec: PolicySpec, horizon: int, seed: int,
                         checkpoints=None, label: str = "", rep: int = 0,
                         rewards: np.ndarray | None = None) -> Trajectory:
    """Same run stepped through PolicyState in pure Python (slow; for testing)."""
    cps = default_checkpoints(horizon) if checkpoints is None else tuple(checkpoints)
    if rewards is None:
        rewards = draw_rewards(instance, horizon, seed)
    state = init_policy(spec, instance.k)
    wanted = set(cps)
    out, arms = [], []
    cum = 0.0
    for t in range(1, horizon + 1):
        arm = select_arm(state, t)
        update_policy(state, arm, float(rewards[arm, state.counts[arm]]), t)
        arms.append(arm)
        cum += instance.gaps[arm]
        if t in wanted:
            out.append(cum)
    return Trajectory(label, rep, cps, np.array(out), np.array(arms, dtype=np.int64))


def thread_count() -> int:
    env = os.environ.get("BANDIT_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("BANDIT_THREADS must be a positive integer")
        return n
    return os.cpu_count() or 1


def run_batch(config: ExperimentConfig, threads: int | None = None) -> list[Trajectory]:
    """All (policy, rep) runs, ordered by policy then rep."""
    tasks = [
        (p, label, spec, j)
        for p, (label, spec) in enumerate(config.policies)
        for j in range(config.reps)
    ]
    for _, _, spec, _ in tasks[:: config.reps]:
        _schedule(spec, config.horizon)  # build schedules once, outside the pool

    def work(task):
        p, label, spec, j = task
        return run_single(config.instance, spec, config.horizon,
                          mix64(config.master_seed, p, j), config.checkpoints, label, j)

    n = min(threads or thread_count(), len(tasks))
    if n <= 1:
        return [work(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(work, tasks))


# --------------------------------------------------------------------------
# statistics


def nearest_rank(sorted_vals, p: float) -> float:
    n = len(sorted_vals)
    rank = max(1, math.ceil(p * n - 1e-9))
    return float(sorted_vals[rank - 1])


def summarize(trajectories, checkpoints=None) -> Summary:
    trajectories = list(trajectories)
    if not trajectories:
        raise ValueError("nothing to summarize")
    cps = tuple(checkpoints) if checkpoints is not None else tuple(trajectories[0].checkpoints)
    groups: dict[str, list] = {}
    for tr in trajectories:
        if tuple(tr.checkpoints) != cps:
            raise ValueError("all trajectories must share the same checkpoints")
        groups.setdefault(tr.label, []).append(tr.regret)
    rows = []
    for label, regs in groups.items():
        m = np.vstack(regs)
        n = m.shape[0]
        mean = m.mean(axis=0)
        std = m.std(axis=0, ddof=1) if n > 1 else np.zeros(m.shape[1])
        srt = np.sort(m, axis=0)
        for c, t in enumerate(cps):
            rows.append(SummaryRow(label, t, float(mean[c]), float(std[c]),
                                   nearest_rank(srt[:, c], 0.1), nearest_rank(srt[:, c], 0.9)))
    return Summary(tuple(rows))


@dataclass(frozen=True)
class BootstrapResult:
    diff: float
    lower: float
    passed: bool


def bootstrap_greater(a, b, resamples: int = 10_000, level: float = 0.95,
                      seed: int = 0) -> BootstrapResult:
    """One-sided bootstrap test of mean(a) > mean(b).

    Resamples each group independently; passes when the (1 - level) quantile
    of the resampled mean difference is above zero.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rng = np.random.default_rng(seed)
    ma = a[rng.integers(0, len(a), (resamples, len(a)))].mean(axis=1)
    mb = b[rng.integers(0, len(b), (resamples, len(b)))].mean(axis=1)
    lower = float(np.quantile(ma - mb, 1 - level))
    return BootstrapResult(float(a.mean() - b.mean()), lower, lower > 0)
