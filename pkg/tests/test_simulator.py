import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robust_bandits.bounds import InstanceMeta, compute_tmin, regret_bound
from robust_bandits.distributions import BanditInstance, Bernoulli, Gaussian, PointMass, SubGaussian
from robust_bandits.policies import RUCB, RUCBG, AlphaUCB, RUCBGMoM
from robust_bandits.scaling import InvLogPower, LogLog, LogPower, prior_informed_sg
from robust_bandits.simulator import (
    ExperimentConfig,
    Trajectory,
    bootstrap_greater,
    default_checkpoints,
    mix64,
    run_batch,
    run_single,
    splitmix64,
    summarize,
)

TWO_GAUSS = BanditInstance((Gaussian(0, 1), Gaussian(2, 1)))


def test_splitmix64_reference_value():
    # first output of the reference SplitMix64 generator seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_mix64_composition():
    assert mix64(7, 1, 2) == splitmix64(splitmix64(splitmix64(7) ^ 1) ^ 2)
    seeds = {mix64(123, p, j) for p in range(3) for j in range(100)}
    assert len(seeds) == 300
    assert all(0 <= s < 2**64 for s in seeds)


def test_default_checkpoints():
    cps = default_checkpoints(100_000)
    assert len(cps) == 64
    assert cps[0] == 1 and cps[-1] == 100_000
    assert list(cps) == sorted(set(cps))
    assert default_checkpoints(10) == tuple(range(1, 11))
    assert 10_000 in default_checkpoints(100_000, extra=(10_000,))


# -- single runs --------------------------------------------------------------------


def test_zero_gap_instances_have_zero_regret():
    tr = run_single(BanditInstance((Gaussian(1, 1),) * 3), RUCB(LogLog(1)), 500, 1)
    assert not tr.regret.any()
    tr = run_single(BanditInstance((Gaussian(1, 1),)), RUCBG(LogPower(1, 2)), 500, 1)
    assert not tr.regret.any()


def _oracle_point_mass(means, horizon):
    k = len(means)
    mu_star = max(means)
    u = [0] * k
    cum, out = 0.0, []
    for t in range(1, horizon + 1):
        if t <= k:
            a = t - 1
        else:
            idx = [means[i] + math.sqrt(math.log(t) ** 2 / u[i]) for i in range(k)]
            a = max(range(k), key=lambda i: (idx[i], -i))
        u[a] += 1
        cum += mu_star - means[a]
        out.append(cum)
    return out


def test_point_mass_run_matches_oracle():
    inst = BanditInstance((PointMass(1.0), PointMass(0.0)))
    tr = run_single(inst, RUCB(LogPower(1, 1)), 50, 0, checkpoints=range(1, 51))
    assert list(tr.regret) == _oracle_point_mass((1.0, 0.0), 50)


SPECS = [RUCB(LogPower(1, 1)), RUCBG(LogPower(1, 2)), RUCBGMoM(LogPower(1, 1), InvLogPower(1, 1)), AlphaUCB(1)]


@settings(max_examples=20, deadline=None)
@given(spec_i=st.integers(0, 3), seed=st.integers(0, 2**64 - 1), horizon=st.integers(3, 3000))
def test_trajectory_invariants(spec_i, seed, horizon):
    inst = BanditInstance((Gaussian(0, 1), Bernoulli(0.4), Gaussian(0.3, 2)))
    tr = run_single(inst, SPECS[spec_i], horizon, seed)
    assert np.all(np.diff(tr.regret) >= 0)
    assert np.all(tr.regret <= max(inst.gaps) * np.array(tr.checkpoints) + 1e-9)
    assert tr.checkpoints[-1] == horizon


def test_run_single_rejects_short_horizon():
    with pytest.raises(ValueError):
        run_single(BanditInstance((Gaussian(0, 1),) * 3), RUCB(LogLog(1)), 2, 0)


# -- batches ----------------------------------------------------------------------------


def _config(seed=5, reps=3):
    return ExperimentConfig(
        TWO_GAUSS,
        (("a", RUCB(LogPower(1, 1))), ("b", RUCBG(LogPower(1, 2)))),
        horizon=2000, reps=reps, master_seed=seed,
    )


def test_batch_is_deterministic_and_ordered():
    a, b = run_batch(_config()), run_batch(_config())
    assert [(t.label, t.rep) for t in a] == [("a", 0), ("a", 1), ("a", 2), ("b", 0), ("b", 1), ("b", 2)]
    assert all(np.array_equal(x.regret, y.regret) for x, y in zip(a, b))


def test_batch_seeds_matter():
    a, b = run_batch(_config(seed=5)), run_batch(_config(seed=6))
    assert any(not np.array_equal(x.regret, y.regret) for x, y in zip(a, b))


def test_threaded_equals_sequential(monkeypatch):
    seq = run_batch(_config(reps=6), threads=1)
    par = run_batch(_config(reps=6), threads=4)
    assert all(np.array_equal(x.regret, y.regret) for x, y in zip(seq, par))
    monkeypatch.setenv("BANDIT_THREADS", "3")
    env = run_batch(_config(reps=6))
    assert all(np.array_equal(x.regret, y.regret) for x, y in zip(seq, env))


def test_replication_uses_mixed_seed():
    cfg = _config()
    tr = run_batch(cfg)[4]  # policy 1, rep 1
    solo = run_single(cfg.instance, cfg.policies[1][1], cfg.horizon, mix64(5, 1, 1), cfg.checkpoints)
    assert np.array_equal(tr.regret, solo.regret)


@pytest.mark.parametrize(
    "kwargs",
    [dict(horizon=1), dict(reps=0), dict(master_seed=-1), dict(checkpoints=(5, 3)),
     dict(checkpoints=(1, 10**9)), dict(policies=())],
)
def test_config_validation(kwargs):
    base = dict(instance=TWO_GAUSS, policies=(("a", RUCB(LogLog(1))),), horizon=100, reps=1, master_seed=0)
    base.update(kwargs)
    with pytest.raises(ValueError):
        ExperimentConfig(**base)


def test_duplicate_labels_rejected():
    with pytest.raises(ValueError, match="unique"):
        ExperimentConfig(TWO_GAUSS, (("a", RUCB(LogLog(1))), ("a", AlphaUCB(1))), 100, 1, 0)


# -- summaries -----------------------------------------------------------------------------


def _tr(label, values, cps=(1,)):
    return Trajectory(label, 0, tuple(cps), np.array(values, dtype=float))


def test_summarize_examples():
    s = summarize([_tr("p", [3.0])])
    assert (s.rows[0].mean, s.rows[0].std) == (3.0, 0.0)
    s = summarize([_tr("p", [0.0]), _tr("p", [2.0])])
    assert s.rows[0].mean == 1.0
    assert s.rows[0].std == pytest.approx(math.sqrt(2), rel=1e-15)
    s = summarize([_tr("p", [float(v)]) for v in range(1, 11)])
    assert (s.rows[0].q10, s.rows[0].q90) == (1.0, 9.0)


def test_summarize_errors():
    with pytest.raises(ValueError):
        summarize([])
    with pytest.raises(ValueError):
        summarize([_tr("p", [1.0]), _tr("p", [1.0, 2.0], cps=(1, 2))])


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=50))
def test_summary_ordering(values):
    s = summarize([_tr("p", [v]) for v in values]).rows[0]
    assert s.std >= 0
    assert min(values) <= s.q10 <= s.q90 <= max(values)
    assert s.std == pytest.approx(np.std(values, ddof=1) if len(values) > 1 else 0.0, rel=1e-9, abs=1e-9)


def test_summary_table_and_labels():
    s = summarize(run_batch(_config()))
    assert s.labels == ["a", "b"]
    tab = s.table("a")
    assert list(tab["t"]) == list(default_checkpoints(2000))
    assert np.all(tab["q10"] <= tab["q90"])


def test_bootstrap():
    rng = np.random.default_rng(0)
    a, b = rng.normal(1.0, 1, 200), rng.normal(0.0, 1, 200)
    assert bootstrap_greater(a, b).passed
    assert not bootstrap_greater(b, a).passed
    same = bootstrap_greater(a, a)
    assert same.diff == 0.0 and not same.passed


# -- empirical regret against the bound ------------------------------------------------------


def test_empirical_regret_below_bound_small():
    f = prior_informed_sg(1, LogLog(1))
    meta = InstanceMeta((2, 0), SubGaussian(1))
    t_min = compute_tmin("r_ucb", meta, f).t_min
    cfg = ExperimentConfig(TWO_GAUSS, (("p", RUCB(f)),), 10_000, 100, 11)
    tab = summarize(run_batch(cfg)).table("p")
    for t, m in zip(tab["t"], tab["mean"]):
        if t >= t_min:
            assert m < regret_bound("r_ucb", meta, f, t=int(t))
