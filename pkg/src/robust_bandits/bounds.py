"""Regret upper bounds, validity thresholds and the classical lower-bound curve."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from ._parse import Call, ParseError, bind, fmt, parse
from .distributions import (
    BernoulliFamily,
    Bounded,
    GaussianFamily,
    HeavyTailed,
    SubExponential,
    SubGaussian,
    _kl_bernoulli,
)
from .policies import RUCB, RUCBG, AlphaUCB, PolicySpec, RUCBGMoM
from .scaling import DecayFn, ScalingFn, first_true, log_dominance_point

KINDS = ("r_ucb", "r_ucb_g", "r_ucb_g_mom")


class BoundInvalid(ValueError):
    pass


class LowerBoundInfinite(ValueError):
    pass


@dataclass(frozen=True)
class InstanceMeta:
    """Gaps plus a class certificate (or a parametric family for the lower bound)."""

    gaps: tuple
    certificate: object

    def __post_init__(self):
        gaps = tuple(float(d) for d in self.gaps)
        if any(not (d >= 0 and math.isfinite(d)) for d in gaps):
            raise ValueError(f"gaps must be finite and nonnegative, got {gaps}")
        object.__setattr__(self, "gaps", gaps)

    @property
    def positive_gaps(self) -> tuple:
        return tuple(d for d in self.gaps if d > 0)

    def to_text(self) -> str:
        c = self.certificate
        gaps = "[" + ",".join(fmt(d) for d in self.gaps) + "]"
        if isinstance(c, SubGaussian):
            head = f"sg({fmt(c.sigma)}"
        elif isinstance(c, SubExponential):
            head = f"se({fmt(c.v)},{fmt(c.alpha)}"
        elif isinstance(c, HeavyTailed):
            head = f"g({fmt(c.eps)},{fmt(c.B)}"
        elif isinstance(c, Bounded):
            head = f"bounded({fmt(c.a)},{fmt(c.b)}"
        elif isinstance(c, GaussianFamily):
            head = f"gaussian({fmt(c.sigma)}"
        elif isinstance(c, BernoulliFamily):
            head = f"bernoulli({fmt(c.mu_star)}"
        else:
            raise TypeError(f"unknown certificate {c!r}")
        return f"{head},gaps={gaps})"


_META_SIGNATURES = {
    "sg": (SubGaussian, ["sigma"]),
    "se": (SubExponential, ["v", "alpha"]),
    "g": (HeavyTailed, ["eps", "b"]),
    "bounded": (Bounded, ["a", "b"]),
    "gaussian": (GaussianFamily, ["sigma"]),
    "bernoulli": (BernoulliFamily, ["mu_star"]),
}


def parse_meta(text: str) -> InstanceMeta:
    """e.g. ``sg(1, gaps=[0, 2])`` or ``g(1, 1, gaps=[0, 2])``."""
    node = parse(text)
    if not isinstance(node, Call) or node.name not in _META_SIGNATURES:
        raise ParseError(f"unknown instance class in {text!r}; expected one of {sorted(_META_SIGNATURES)}")
    cls, params = _META_SIGNATURES[node.name]
    kw = bind(node, params + ["gaps"])
    gaps = kw["gaps"]
    if not isinstance(gaps, tuple):
        raise ParseError("gaps must be a list such as [0, 2]")
    return InstanceMeta(gaps, cls(*[kw[p] for p in params]))


# --------------------------------------------------------------------------
# upper bounds


def _kind(policy) -> str:
    if isinstance(policy, str):
        kind = policy.replace("-", "_")
        if kind not in KINDS:
            raise ValueError(f"unknown policy kind {policy!r}")
        return kind
    if isinstance(policy, AlphaUCB):
        raise ValueError("no oblivious regret bound for alpha-ucb")
    return policy.kind


def _fg(policy, f, g):
    if not isinstance(policy, str):
        f = policy.f
        g = getattr(policy, "g", None)
    if f is None:
        raise ValueError("a scaling function f is required")
    return f, g


def _sg_like(cert):
    """Certificates usable by the R-UCB bound, normalised to SG or SE."""
    if isinstance(cert, Bounded):
        return SubGaussian(max((cert.b - cert.a) / 2, 1e-300))
    if isinstance(cert, GaussianFamily):
        return SubGaussian(cert.sigma)
    if isinstance(cert, (SubGaussian, SubExponential)):
        return cert
    raise ValueError(f"r-ucb bounds need an sg/se certificate, got {cert!r}")


def _heavy(cert) -> HeavyTailed:
    if not isinstance(cert, HeavyTailed):
        raise ValueError(f"this bound needs a g(eps, B) certificate, got {cert!r}")
    return cert


def regret_bound(policy, meta: InstanceMeta, f: ScalingFn | None = None,
                 g: DecayFn | None = None, t: int | None = None) -> float:
    """Upper bound on expected regret at round t (valid for t above t_min).

    ``policy`` is a kind name ("r_ucb", "r_ucb_g", "r_ucb_g_mom") or a
    PolicySpec, in which case f and g are taken from it.
    """
    kind = _kind(policy)
    f, g = _fg(policy, f, g)
    if t is None or t < 3:
        raise ValueError(f"bounds are defined for t >= 3, got {t}")
    f_t, log_t = f(t), math.log(t)
    total = 0.0
    if kind == "r_ucb":
        cert = _sg_like(meta.certificate)
        for d in meta.positive_gaps:
            term = 4 * f_t * log_t / d
            if isinstance(cert, SubExponential):
                term = max(term, f_t * log_t * d * (cert.alpha / cert.v**2) ** 2)
            total += term + 4 * d
    elif kind == "r_ucb_g":
        _heavy(meta.certificate)
        log_f = math.log(f_t)
        for d in meta.positive_gaps:
            if d * log_f <= 2:
                raise BoundInvalid(
                    f"bound invalid below t1: gap {d} * log f(t) = {d * log_f:.4g} <= 2 at t={t}"
                )
            total += 32 * f_t * log_t / (1 - 2 / (d * log_f)) + 4 * d
    else:
        _heavy(meta.certificate)
        if g is None:
            raise ValueError("the median-of-means bound needs a decay function g")
        g_t = g(t)
        for d in meta.positive_gaps:
            total += d * (2 * f_t / d) ** (1 / g_t) * 32 * log_t + 4 * d
    return total


def bound_curve(policy, meta, ts, f=None, g=None) -> list[tuple[int, float]]:
    """(t, bound) pairs; rounds where the bound is not yet valid get NaN."""
    out = []
    for t in ts:
        try:
            out.append((t, regret_bound(policy, meta, f, g, t)))
        except BoundInvalid:
            out.append((t, math.nan))
    return out


# --------------------------------------------------------------------------
# thresholds


@dataclass(frozen=True)
class ThresholdReport:
    t_min: int
    components: dict
    rules: dict
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.components and self.t_min != max(self.components.values()):
            raise ValueError("t_min must equal the largest component")


def tmin_conditions(policy, meta: InstanceMeta, f=None, g=None) -> dict[str, tuple[Callable[[int], bool], str]]:
    """The monotone (false then true) conditions whose first-true rounds make up t_min."""
    kind = _kind(policy)
    f, g = _fg(policy, f, g)
    if kind == "r_ucb":
        cert = _sg_like(meta.certificate)
        if isinstance(cert, SubGaussian):
            level, rule = 8 * cert.sigma**2, "f(t) > 8 sigma^2"
        else:
            level, rule = 8 * cert.v**2, "f(t) > 8 v^2"
        return {"t0": (lambda t: f(t) > level, rule)}

    cert = _heavy(meta.certificate)
    eps, B = cert.eps, cert.B
    if kind == "r_ucb_g":
        # 3B log x < 2 x^eps fails only on a bounded interval of x; past its
        # right end it holds for good, so require f(t) beyond that point.
        x_hi = log_dominance_point(eps, 1.5 * B)

        def cond0(t):
            x = f(t)
            return x >= x_hi and 3 * B * math.log(x) < 2 * x**eps

        min_gap = min(meta.positive_gaps, default=math.inf)

        def cond1(t):
            return min_gap == math.inf or min_gap * math.log(f(t)) > 2

        return {
            "t0": (cond0, "3B log f(t) < 2 f(t)^eps for all later t"),
            "t1": (cond1, "min gap * log f(t) > 2"),
        }

    if g is None:
        raise ValueError("the median-of-means threshold needs a decay function g")
    g_level = eps / (1 + eps)
    return {
        "t0_g": (lambda t: g(t) < g_level, "g(t) < eps/(1+eps)"),
        "t0_f": (lambda t: f(t) ** (1 + eps) > 12 * B, "f(t)^(1+eps) > 12B"),
    }


def _pull_term(kind, meta, f, g, d, t):
    """Per-arm pull-count bound without the additive constant."""
    f_t, log_t = f(t), math.log(t)
    if kind == "r_ucb":
        cert = _sg_like(meta.certificate)
        if isinstance(cert, SubGaussian):
            return 4 * f_t * log_t / d**2
        return f_t * log_t * max(4 / d**2, (cert.alpha / cert.v**2) ** 2)
    if kind == "r_ucb_g":
        log_f = math.log(f_t)
        if d * log_f <= 2:
            return -math.inf
        return 32 * f_t * log_t / (d**2 * (1 - 2 / (d * log_f)))
    return (2 * f_t / d) ** (1 / g(t)) * 32 * log_t


def compute_tmin(policy, meta: InstanceMeta, f=None, g=None) -> ThresholdReport:
    kind = _kind(policy)
    f, g = _fg(policy, f, g)
    conds = tmin_conditions(kind, meta, f, g)
    components = {name: first_true(pred) for name, (pred, _) in conds.items()}
    rules = {name: rule for name, (_, rule) in conds.items()}
    t_min = max(components.values())

    # Informational: the round after which every pull-count term exceeds t_min,
    # i.e. the crossover that makes the displayed bound hold in its simple form.
    info = {}
    gaps = meta.positive_gaps
    if gaps:
        def crossover(t):
            return all(_pull_term(kind, meta, f, g, d, t) >= t_min for d in gaps)
        try:
            info["t_crossover"] = first_true(crossover, start=t_min)
        except ArithmeticError:
            info["t_crossover"] = None
    return ThresholdReport(t_min, components, rules, info)


def sub_threshold_pulls(meta: InstanceMeta, f: ScalingFn, t: int, u_i: float) -> float:
    """Weaker bound on E[T_i(t)] below the threshold: u_i + (t-u_i) t^(1 - c f(t) log t)."""
    cert = meta.certificate
    if isinstance(cert, Bounded):
        c = 2 / (cert.b - cert.a) ** 2
    elif isinstance(cert, (SubGaussian, GaussianFamily)):
        c = 1 / (2 * cert.sigma**2)
    elif isinstance(cert, SubExponential):
        c = 1 / (2 * cert.v**2)
    else:
        raise ValueError(f"sub-threshold bound needs a bounded, sg or se certificate, got {cert!r}")
    if not 0 <= u_i <= t:
        raise ValueError(f"need 0 <= u_i <= t, got u_i={u_i}, t={t}")
    if u_i == t:
        return float(t)
    exponent = (1 - c * f(t) * math.log(t)) * math.log(t)
    return u_i + (t - u_i) * math.exp(exponent)


def lower_bound_curve(meta: InstanceMeta, n: int) -> float:
    """sum over suboptimal arms of (gap / d_i) log n for a known parametric family."""
    cert = meta.certificate
    if not isinstance(cert, (GaussianFamily, BernoulliFamily)):
        raise LowerBoundInfinite(
            "d = 0; lower bound infinite (distribution-oblivious class admits perturbations "
            "with arbitrarily small KL)"
        )
    total = 0.0
    for d in meta.positive_gaps:
        if isinstance(cert, GaussianFamily):
            di = d * d / (2 * cert.sigma**2)
        else:
            di = _kl_bernoulli(cert.mu_star - d, cert.mu_star)
        total += d / di
    return total * math.log(n)
