"""Slow-growing scaling functions f(t) and slow-decaying functions g(t).

Functions are defined on integer rounds t >= 3 (so that ``log(log(t)) > 0``).
Callers evaluating at earlier rounds map t to ``max(t, 3)`` themselves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ._parse import Call, ParseError, bind, fmt, parse

T_MIN_DOMAIN = 3
SEARCH_LIMIT = 2**63
_FLOOR = 1e-12


class DomainError(ValueError):
    pass


class ThresholdOverflow(ArithmeticError):
    pass


def _check_t(t):
    if t < T_MIN_DOMAIN:
        raise DomainError(f"scaling functions are defined for t >= {T_MIN_DOMAIN}, got t={t}")


class ScalingFn:
    """Nondecreasing positive f(t)."""

    constant_like = False

    def _value(self, t: float) -> float:
        raise NotImplementedError

    def __call__(self, t) -> float:
        _check_t(t)
        return max(self._value(t), _FLOOR)

    def to_text(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.to_text()


class DecayFn:
    """Nonincreasing positive g(t)."""

    def _value(self, t: float) -> float:
        raise NotImplementedError

    def __call__(self, t) -> float:
        _check_t(t)
        return max(self._value(t), _FLOOR)

    def to_text(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.to_text()


def _positive(name, **kw):
    for k, v in kw.items():
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ValueError(f"{name}: {k} must be a positive real, got {v!r}")


@dataclass(frozen=True)
class LogPower(ScalingFn):
    """c * log(t)^alpha"""

    c: float
    alpha: float

    def __post_init__(self):
        _positive("logpow", c=self.c, alpha=self.alpha)

    def _value(self, t):
        return self.c * math.log(t) ** self.alpha

    def to_text(self):
        return f"logpow({fmt(self.c)},{fmt(self.alpha)})"


@dataclass(frozen=True)
class LogLog(ScalingFn):
    """c * log(log(t))"""

    c: float

    def __post_init__(self):
        _positive("loglog", c=self.c)

    def _value(self, t):
        return self.c * math.log(math.log(t))

    def to_text(self):
        return f"loglog({fmt(self.c)})"


@dataclass(frozen=True)
class Constant(ScalingFn):
    c: float

    constant_like = True

    def __post_init__(self):
        _positive("const", c=self.c)

    def _value(self, t):
        return float(self.c)

    def to_text(self):
        return f"const({fmt(self.c)})"


@dataclass(frozen=True)
class Affine(ScalingFn):
    """c0 + inner(t)"""

    c0: float
    inner: ScalingFn

    def __post_init__(self):
        if not (math.isfinite(self.c0) and self.c0 >= 0):
            raise ValueError(f"affine: c0 must be a nonnegative real, got {self.c0!r}")
        if not isinstance(self.inner, ScalingFn):
            raise TypeError("affine: inner must be a scaling function")

    @property
    def constant_like(self):
        return self.inner.constant_like

    def _value(self, t):
        return self.c0 + self.inner._value(t)

    def to_text(self):
        return f"affine({fmt(self.c0)},{self.inner.to_text()})"


def _log_phi(phi: ScalingFn, t) -> float:
    return max(math.log(phi(t)), _FLOOR)


@dataclass(frozen=True)
class Consistency(ScalingFn):
    """0.5 * exp(0.5 * log(phi(t))^(1-c)); pairs with :class:`ConsistencyDecay`."""

    phi: ScalingFn
    c: float

    def __post_init__(self):
        _check_c(self.c)

    @property
    def constant_like(self):
        return self.phi.constant_like

    def _value(self, t):
        return 0.5 * math.exp(0.5 * _log_phi(self.phi, t) ** (1 - self.c))

    def to_text(self):
        return f"consistency({self.phi.to_text()},{fmt(self.c)})"


@dataclass(frozen=True)
class InvLogPower(DecayFn):
    """c * log(t)^(-alpha)"""

    c: float
    alpha: float

    def __post_init__(self):
        _positive("invlogpow", c=self.c, alpha=self.alpha)

    def _value(self, t):
        return self.c * math.log(t) ** (-self.alpha)

    def to_text(self):
        return f"invlogpow({fmt(self.c)},{fmt(self.alpha)})"


@dataclass(frozen=True)
class ConsistencyDecay(DecayFn):
    """log(phi(t))^(-c)"""

    phi: ScalingFn
    c: float

    def __post_init__(self):
        _check_c(self.c)

    def _value(self, t):
        return _log_phi(self.phi, t) ** (-self.c)

    def to_text(self):
        return f"consistency({self.phi.to_text()},{fmt(self.c)})"


def _check_c(c):
    if not (isinstance(c, (int, float)) and 0 < c < 1):
        raise ValueError(f"consistency exponent c must lie in (0, 1), got {c!r}")


# --------------------------------------------------------------------------
# operations


def eval_scaling(f: ScalingFn | DecayFn, t: int) -> float:
    return f(t)


def validate(f: ScalingFn, strict: bool = True, grid=None) -> ScalingFn:
    """Grid check of positivity and monotonicity.

    With ``strict``, constant functions (and affine/consistency wrappers of
    them) are rejected because they do not diverge.
    """
    if strict and f.constant_like:
        raise ValueError(f"{f.to_text()} is not slow growing (it does not diverge)")
    grid = grid or [3, 4, 5, 10, 30, 100, 10**3, 10**4, 10**5, 10**6, 10**7]
    prev = None
    for t in grid:
        v = f(t)
        if not v > 0:
            raise ValueError(f"{f.to_text()} is not positive at t={t}")
        if prev is not None and v < prev:
            raise ValueError(f"{f.to_text()} decreases between grid points at t={t}")
        prev = v
    return f


def first_true(pred, start: int = T_MIN_DOMAIN, limit: int = SEARCH_LIMIT) -> int:
    """Smallest integer t >= start with pred(t), for pred monotone false -> true.

    Doubling to bracket, then bisection.
    """
    if pred(start):
        return start
    lo, hi = start, start * 2
    while not pred(hi):
        lo = hi
        hi *= 2
        if hi >= limit:
            if pred(limit - 1):
                hi = limit - 1
                break
            raise ThresholdOverflow(f"threshold overflow: condition not reached below 2^63")
    # invariant: pred(lo) false, pred(hi) true
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def inverse_threshold(f: ScalingFn, y: float) -> int:
    """Smallest integer t >= 3 with f(t) >= y."""
    if not math.isfinite(y):
        raise ValueError("threshold level must be finite")
    return first_true(lambda t: f(t) >= y)


def log_dominance_point(eps: float, scale: float) -> float:
    """Smallest c > 1 with ``log(x) <= x**eps / scale`` for every x >= c.

    ``h(x) = x**eps/scale - log(x)`` is convex in log-space with a single
    minimum at ``x* = (scale/eps)**(1/eps)``; its largest root lies above x*.
    Returns ``1 + 1e-9`` when h never goes negative on (1, inf).
    """
    if not (eps > 0 and scale > 0):
        raise ValueError("eps and scale must be positive")
    h = lambda x: x**eps / scale - math.log(x)
    log_xstar = math.log(scale / eps) / eps
    if log_xstar <= 0 or h(math.exp(log_xstar)) >= 0:
        return 1.0 + 1e-9
    lo = math.exp(log_xstar)
    hi = 2.0 * lo
    while h(hi) < 0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > 1e-9 * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if h(mid) < 0:
            lo = mid
        else:
            hi = mid
    return hi


def from_consistency_target(phi: ScalingFn, c: float) -> tuple[Consistency, ConsistencyDecay]:
    """Pair (f, g) for which (2 f(t)/gap)^(1/g(t)) <= phi(t) eventually."""
    _check_c(c)
    return Consistency(phi, c), ConsistencyDecay(phi, c)


def prior_informed_sg(sigma_guess: float, h: ScalingFn) -> Affine:
    """f(t) = 8 sigma^2 + h(t) for a believed sigma-subGaussian instance."""
    if not sigma_guess > 0:
        raise ValueError("sigma_guess must be positive")
    return Affine(8.0 * sigma_guess**2, h)


def prior_informed_g(eps_guess: float, B_guess: float, h: ScalingFn) -> Affine:
    """f(t) = c + h(t) with c the log-dominance point for the believed (eps, B)."""
    if not (eps_guess > 0 and B_guess > 0):
        raise ValueError("eps_guess and B_guess must be positive")
    return Affine(log_dominance_point(eps_guess, 3.0 * B_guess), h)


# --------------------------------------------------------------------------
# text form


def _num(node, name):
    if not isinstance(node, float):
        raise ParseError(f"{name} must be a number, got {node!r}")
    return node


def scaling_from_node(node) -> ScalingFn:
    if not isinstance(node, Call):
        raise ParseError(f"expected a scaling function, got {node!r}")
    n = node.name
    if n in ("logpow", "log_power"):
        kw = bind(node, ["c", "alpha"])
        return LogPower(_num(kw["c"], "c"), _num(kw["alpha"], "alpha"))
    if n == "loglog":
        return LogLog(_num(bind(node, ["c"], {"c": 1.0})["c"], "c"))
    if n in ("const", "constant"):
        return Constant(_num(bind(node, ["c"])["c"], "c"))
    if n == "affine":
        kw = bind(node, ["c0", "inner"])
        return Affine(_num(kw["c0"], "c0"), scaling_from_node(kw["inner"]))
    if n == "consistency":
        kw = bind(node, ["phi", "c"])
        return Consistency(scaling_from_node(kw["phi"]), _num(kw["c"], "c"))
    raise ParseError(f"unknown scaling function {n!r}")


def decay_from_node(node) -> DecayFn:
    if not isinstance(node, Call):
        raise ParseError(f"expected a decay function, got {node!r}")
    n = node.name
    if n in ("invlogpow", "inv_log_power"):
        kw = bind(node, ["c", "alpha"])
        return InvLogPower(_num(kw["c"], "c"), _num(kw["alpha"], "alpha"))
    if n == "consistency":
        kw = bind(node, ["phi", "c"])
        return ConsistencyDecay(scaling_from_node(kw["phi"]), _num(kw["c"], "c"))
    raise ParseError(f"unknown decay function {n!r}")


def parse_scaling(text: str) -> ScalingFn:
    return scaling_from_node(parse(text))


def parse_decay(text: str) -> DecayFn:
    return decay_from_node(parse(text))
