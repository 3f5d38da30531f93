"""Index policies: R-UCB, R-UCB-G, R-UCB-G-MoM and the sigma-aware alpha-UCB baseline.

Every policy pulls arms 0..k-1 once in order during rounds 1..k, then picks the
arm with the largest index, breaking ties toward the lowest arm index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from ._parse import Call, ParseError, bind, fmt, parse
from .estimators import MoMState, RunningMean, TruncatedMeanState
from .scaling import (
    DecayFn,
    DomainError,
    ScalingFn,
    decay_from_node,
    scaling_from_node,
    validate,
)


@dataclass(frozen=True)
class RUCB:
    f: ScalingFn
    kind = "r_ucb"

    def to_text(self):
        return f"r-ucb(f={self.f.to_text()})"


@dataclass(frozen=True)
class RUCBG:
    f: ScalingFn
    kind = "r_ucb_g"

    def __post_init__(self):
        if not self.f(3) > 1:
            raise ValueError(f"r-ucb-g needs f(t) > 1, but f(3) = {self.f(3)}")
        validate(self.f, strict=False)

    def to_text(self):
        return f"r-ucb-g(f={self.f.to_text()})"


@dataclass(frozen=True)
class RUCBGMoM:
    f: ScalingFn
    g: DecayFn
    kind = "r_ucb_g_mom"

    def to_text(self):
        return f"r-ucb-g-mom(f={self.f.to_text()},g={self.g.to_text()})"


@dataclass(frozen=True)
class AlphaUCB:
    """UCB with width sqrt(2 alpha sigma^2 log t / u); needs the true sigma."""

    sigma: float
    alpha: float = 2.0
    kind = "alpha_ucb"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("alpha-ucb needs sigma > 0")
        if not self.alpha > 1:
            raise ValueError("alpha-ucb needs alpha > 1")

    @property
    def width_const(self) -> float:
        return 2.0 * self.alpha * self.sigma * self.sigma

    def to_text(self):
        return f"alpha-ucb(sigma={fmt(self.sigma)},alpha={fmt(self.alpha)})"


PolicySpec = RUCB | RUCBG | RUCBGMoM | AlphaUCB


def round_params(spec: PolicySpec, t: int) -> tuple[float, float, float]:
    """(f(t), aux(t), log t) at scaling round max(t, 3).

    aux is 1/log f(t) for R-UCB-G, g(t) for the MoM policy and 0 otherwise.
    The simulator kernels use these exact values, so both paths agree bitwise.
    """
    t = max(int(t), 3)
    log_t = math.log(t)
    if isinstance(spec, AlphaUCB):
        return spec.width_const, 0.0, log_t
    f_t = spec.f(t)
    if isinstance(spec, RUCBG):
        return f_t, 1.0 / math.log(f_t), log_t
    if isinstance(spec, RUCBGMoM):
        return f_t, spec.g(t), log_t
    return f_t, 0.0, log_t


@dataclass
class PolicyState:
    spec: PolicySpec
    k: int
    t: int = 0
    counts: list = field(default_factory=list)
    estimators: list = field(default_factory=list)

    @property
    def total_samples(self) -> int:
        est = self.estimators
        if isinstance(self.spec, RUCBG):
            return sum(e.total_count for e in est)
        if isinstance(self.spec, RUCBGMoM):
            return sum(len(e.samples) for e in est)
        return sum(e.count for e in est)


def _new_estimator(spec):
    if isinstance(spec, RUCBG):
        return TruncatedMeanState()
    if isinstance(spec, RUCBGMoM):
        return MoMState()
    return RunningMean()


def init_policy(spec: PolicySpec, k: int) -> PolicyState:
    if not isinstance(spec, (RUCB, RUCBG, RUCBGMoM, AlphaUCB)):
        raise TypeError(f"not a policy spec: {spec!r}")
    if k < 1:
        raise ValueError("need at least one arm")
    return PolicyState(spec, k, 0, [0] * k, [_new_estimator(spec) for _ in range(k)])


def ucb_index(state: PolicyState, arm: int, t: int) -> float:
    if t < 3:
        raise DomainError(f"indices are defined from round 3, got t={t}")
    u = state.counts[arm]
    if u < 1:
        raise ValueError(f"arm {arm} has not been pulled yet")
    spec = state.spec
    f_t, aux, log_t = round_params(spec, t)
    est = state.estimators[arm]
    if isinstance(spec, RUCBG):
        return est.query(f_t) + (aux + 16.0 * f_t * log_t / u)
    if isinstance(spec, RUCBGMoM):
        return est.query(t) + f_t * (32.0 * log_t / u) ** aux
    return est.sum / est.count + math.sqrt(f_t * log_t / u)


def select_arm(state: PolicyState, t: int) -> int:
    if t < 1:
        raise ValueError("rounds start at 1")
    if t <= state.k:
        return t - 1
    if state.k == 1:
        return 0
    best, best_val = 0, -math.inf
    for i in range(state.k):
        v = ucb_index(state, i, t)
        if v > best_val:
            best, best_val = i, v
    return best


def update_policy(state: PolicyState, arm: int, reward: float, t: int | None = None) -> PolicyState:
    if not 0 <= arm < state.k:
        raise IndexError(f"arm {arm} out of range for k={state.k}")
    state.estimators[arm].absorb(reward)
    state.counts[arm] += 1
    state.t = state.t + 1 if t is None else t
    return state


# --------------------------------------------------------------------------
# text form


def policy_from_node(node) -> PolicySpec:
    if not isinstance(node, Call):
        raise ParseError(f"expected a policy, got {node!r}")
    name = node.name.replace("-", "_")
    if name == "r_ucb":
        return RUCB(scaling_from_node(bind(node, ["f"])["f"]))
    if name == "r_ucb_g":
        return RUCBG(scaling_from_node(bind(node, ["f"])["f"]))
    if name == "r_ucb_g_mom":
        kw = bind(node, ["f", "g"])
        return RUCBGMoM(scaling_from_node(kw["f"]), decay_from_node(kw["g"]))
    if name == "alpha_ucb":
        kw = bind(node, ["sigma", "alpha"], {"alpha": 2.0})
        return AlphaUCB(kw["sigma"], kw["alpha"])
    raise ParseError(f"unknown policy {node.name!r}")


def parse_policy(text: str) -> PolicySpec:
    return policy_from_node(parse(text))
