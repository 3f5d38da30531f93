"""Arm reward models, bandit instances, KL divergence and the KL perturbation.

All logarithms in this package are natural logarithms.

Every model is an immutable dataclass; randomness only ever comes from a
``numpy.random.Generator`` passed in by the caller.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from ._parse import Call, ParseError, bind, fmt, parse

# Monte-Carlo fallback for tail means without an implemented closed form.
TAIL_MC_SAMPLES = 1_000_000
TAIL_MC_SEED = 20_200_607

_NUDGE = 1e-9


# --------------------------------------------------------------------------
# class certificates


@dataclass(frozen=True)
class Bounded:
    a: float
    b: float

    def __post_init__(self):
        if not self.a <= self.b:
            raise ValueError(f"bounded certificate needs a <= b, got [{self.a}, {self.b}]")


@dataclass(frozen=True)
class SubGaussian:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class SubExponential:
    v: float
    alpha: float

    def __post_init__(self):
        if not (self.v > 0 and self.alpha >= 0):
            raise ValueError("subexponential certificate needs v > 0 and alpha >= 0")


@dataclass(frozen=True)
class HeavyTailed:
    """Membership in G(eps, B): E|X|^(1+eps) <= B."""

    eps: float
    B: float

    def __post_init__(self):
        if not (self.eps > 0 and self.B > 0):
            raise ValueError("heavy-tail certificate needs eps > 0 and B > 0")


@dataclass(frozen=True)
class GaussianFamily:
    """Parametric Gaussian family with known, shared sigma (lower-bound use only)."""

    sigma: float


@dataclass(frozen=True)
class BernoulliFamily:
    """Parametric Bernoulli family (lower-bound use only)."""

    mu_star: float


Certificate = Bounded | SubGaussian | SubExponential | HeavyTailed


# --------------------------------------------------------------------------
# arm models


class ArmModel:
    """Base class for reward distributions."""

    kind = "abstract"

    def mean(self) -> float:
        raise NotImplementedError

    def _draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int | None = None):
        if size is None:
            return float(self._draw(rng, 1)[0])
        return self._draw(rng, int(size))

    def support(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    @property
    def bounded(self) -> bool:
        lo, hi = self.support()
        return math.isfinite(lo) and math.isfinite(hi)

    def abs_moment(self, eps: float) -> float:
        raise NotImplementedError

    def tail_mean_with_error(self, M: float) -> tuple[float, float]:
        return _tail_mc(self, M)

    def certificate(self):
        return None

    def to_text(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.to_text()


def _check_real(**kw):
    for k, v in kw.items():
        if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v)):
            raise ValueError(f"{k} must be a finite real, got {v!r}")


@dataclass(frozen=True)
class Bernoulli(ArmModel):
    p: float
    kind = "bernoulli"

    def __post_init__(self):
        _check_real(p=self.p)
        if not 0 <= self.p <= 1:
            raise ValueError(f"bernoulli needs 0 <= p <= 1, got {self.p}")

    def mean(self):
        return float(self.p)

    def _draw(self, rng, n):
        return (rng.random(n) < self.p).astype(float)

    def support(self):
        return (0.0, 1.0)

    def abs_moment(self, eps):
        return float(self.p)

    def tail_mean_with_error(self, M):
        return (float(self.p) if 1.0 > M else 0.0), 0.0

    def certificate(self):
        return Bounded(0.0, 1.0)

    def to_text(self):
        return f"bernoulli({fmt(self.p)})"


@dataclass(frozen=True)
class Uniform(ArmModel):
    a: float
    b: float
    kind = "uniform"

    def __post_init__(self):
        _check_real(a=self.a, b=self.b)
        if not self.a < self.b:
            raise ValueError(f"uniform needs a < b, got ({self.a}, {self.b})")

    def mean(self):
        return 0.5 * (self.a + self.b)

    def _draw(self, rng, n):
        return rng.uniform(self.a, self.b, n)

    def support(self):
        return (float(self.a), float(self.b))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.a) & (x <= self.b), 1.0 / (self.b - self.a), 0.0)

    def abs_moment(self, eps):
        r = 1.0 + eps
        # d/dx sign(x)|x|^(r+1)/(r+1) = |x|^r
        G = lambda x: math.copysign(abs(x) ** (r + 1), x) / (r + 1)
        return (G(self.b) - G(self.a)) / (self.b - self.a)

    def tail_mean_with_error(self, M):
        G = lambda x: x * abs(x) / 2.0  # antiderivative of |x|
        total = 0.0
        lo, hi = max(self.a, M), self.b
        if hi > lo:
            total += G(hi) - G(lo)
        lo, hi = self.a, min(self.b, -M)
        if hi > lo:
            total += G(hi) - G(lo)
        return total / (self.b - self.a), 0.0

    def certificate(self):
        return Bounded(float(self.a), float(self.b))

    def to_text(self):
        return f"uniform({fmt(self.a)},{fmt(self.b)})"


@dataclass(frozen=True)
class Gaussian(ArmModel):
    mu: float
    sigma: float
    kind = "gaussian"

    def __post_init__(self):
        _check_real(mu=self.mu, sigma=self.sigma)
        if not self.sigma > 0:
            raise ValueError(f"gaussian needs sigma > 0, got {self.sigma}")

    def mean(self):
        return float(self.mu)

    def _draw(self, rng, n):
        return rng.normal(self.mu, self.sigma, n)

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2 * math.pi))

    def abs_moment(self, eps):
        # noncentral absolute moment via Kummer's function
        r = 1.0 + eps
        s = self.sigma
        return float(
            s**r * 2 ** (r / 2) * special.gamma((r + 1) / 2) / math.sqrt(math.pi)
            * special.hyp1f1(-r / 2, 0.5, -self.mu**2 / (2 * s * s))
        )

    def certificate(self):
        return SubGaussian(float(self.sigma))

    def to_text(self):
        return f"gaussian({fmt(self.mu)},{fmt(self.sigma)})"


@dataclass(frozen=True)
class Exponential(ArmModel):
    rate: float
    shift: float = 0.0
    kind = "exponential"

    def __post_init__(self):
        _check_real(rate=self.rate, shift=self.shift)
        if not self.rate > 0:
            raise ValueError(f"exponential needs rate > 0, got {self.rate}")

    def mean(self):
        return self.shift + 1.0 / self.rate

    def _draw(self, rng, n):
        return self.shift + rng.exponential(1.0 / self.rate, n)

    def support(self):
        return (float(self.shift), math.inf)

    def pdf(self, x):
        y = np.asarray(x, dtype=float) - self.shift
        return np.where(y >= 0, self.rate * np.exp(-self.rate * np.maximum(y, 0.0)), 0.0)

    def abs_moment(self, eps):
        r, lam, s = 1.0 + eps, self.rate, self.shift
        if s >= 0:
            # E[(s+Y)^r] = e^{lam s} lam^{-r} Gamma(r+1, lam s)
            log_val = lam * s - r * math.log(lam) + special.gammaln(r + 1)
            return float(math.exp(log_val) * special.gammaincc(r + 1, lam * s))
        f = lambda y: abs(s + y) ** r * lam * math.exp(-lam * y)
        left, _ = integrate.quad(f, 0.0, -s)
        right, _ = integrate.quad(f, -s, math.inf)
        return left + right

    def certificate(self):
        return SubExponential(2.0 / self.rate, 2.0 / self.rate)

    def to_text(self):
        if self.shift == 0:
            return f"exponential({fmt(self.rate)})"
        return f"exponential({fmt(self.rate)},{fmt(self.shift)})"


@dataclass(frozen=True)
class Pareto(ArmModel):
    """Pareto type I with scale ``x_m`` and shape ``a_shape`` (> 1 for a finite mean)."""

    x_m: float
    a_shape: float
    kind = "pareto"

    def __post_init__(self):
        _check_real(x_m=self.x_m, a_shape=self.a_shape)
        if not (self.x_m > 0 and self.a_shape > 1):
            raise ValueError(f"pareto needs x_m > 0 and shape > 1, got ({self.x_m}, {self.a_shape})")

    def mean(self):
        return self.a_shape * self.x_m / (self.a_shape - 1)

    def ppf(self, u):
        return self.x_m * (1.0 - np.asarray(u, dtype=float)) ** (-1.0 / self.a_shape)

    def _draw(self, rng, n):
        return self.ppf(rng.random(n))

    def support(self):
        return (float(self.x_m), math.inf)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        a, xm = self.a_shape, self.x_m
        return np.where(x >= xm, a * xm**a / np.maximum(x, xm) ** (a + 1), 0.0)

    def abs_moment(self, eps):
        r = 1.0 + eps
        if r >= self.a_shape:
            return math.inf
        return self.a_shape * self.x_m**r / (self.a_shape - r)

    def tail_mean_with_error(self, M):
        a, xm = self.a_shape, self.x_m
        if M <= xm:
            return self.mean(), 0.0
        return a * xm**a * M ** (1 - a) / (a - 1), 0.0

    def certificate(self):
        eps = 0.5 * (self.a_shape - 1)
        return HeavyTailed(eps, self.abs_moment(eps))

    def to_text(self):
        return f"pareto({fmt(self.x_m)},{fmt(self.a_shape)})"


@dataclass(frozen=True)
class PointMass(ArmModel):
    c: float
    kind = "point_mass"

    def __post_init__(self):
        _check_real(c=self.c)

    def mean(self):
        return float(self.c)

    def _draw(self, rng, n):
        return np.full(n, float(self.c))

    def support(self):
        return (float(self.c), float(self.c))

    def abs_moment(self, eps):
        return abs(self.c) ** (1.0 + eps)

    def tail_mean_with_error(self, M):
        return (abs(self.c) if abs(self.c) > M else 0.0), 0.0

    def certificate(self):
        return Bounded(float(self.c), float(self.c))

    def to_text(self):
        return f"point_mass({fmt(self.c)})"


@dataclass(frozen=True)
class Perturbed(ArmModel):
    """CDF ``(1-gamma) F(x)`` on ``x <= v``, then linear up to 1 on ``(v, v_prime]``."""

    base: ArmModel
    gamma: float
    v: float
    v_prime: float
    kind = "perturbed"

    def __post_init__(self):
        _check_real(gamma=self.gamma, v=self.v, v_prime=self.v_prime)
        if not 0 < self.gamma < 1:
            raise ValueError(f"perturbed needs gamma in (0,1), got {self.gamma}")
        if not self.v_prime > self.v:
            raise ValueError(f"perturbed needs v_prime > v, got v={self.v}, v_prime={self.v_prime}")
        lo, hi = self.base.support()
        if not (math.isfinite(lo) and hi <= self.v):
            raise ValueError("perturbed needs a bounded base with support below v")

    @property
    def _tail(self) -> Uniform:
        return Uniform(self.v, self.v_prime)

    def mean(self):
        g = self.gamma
        return (1 - g) * self.base.mean() + 0.5 * g * (self.v_prime + self.v)

    def _draw(self, rng, n):
        base = self.base._draw(rng, n)
        pick = rng.random(n) < self.gamma
        # (v, v'] : never returns v itself
        tail = self.v_prime - (self.v_prime - self.v) * rng.random(n)
        return np.where(pick, tail, base)

    def support(self):
        return (self.base.support()[0], float(self.v_prime))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inner = (1 - self.gamma) * self.base.pdf(x)
        outer = np.where((x > self.v) & (x <= self.v_prime), self.gamma / (self.v_prime - self.v), 0.0)
        return np.where(x <= self.v, inner, outer)

    def abs_moment(self, eps):
        return (1 - self.gamma) * self.base.abs_moment(eps) + self.gamma * self._tail.abs_moment(eps)

    def tail_mean_with_error(self, M):
        b, be = self.base.tail_mean_with_error(M)
        u, _ = self._tail.tail_mean_with_error(M)
        return (1 - self.gamma) * b + self.gamma * u, (1 - self.gamma) * be

    def certificate(self):
        lo, hi = self.support()
        return Bounded(lo, hi)

    def to_text(self):
        return (f"perturbed({self.base.to_text()},{fmt(self.gamma)},"
                f"{fmt(self.v)},{fmt(self.v_prime)})")


def _tail_mc(model: ArmModel, M: float) -> tuple[float, float]:
    rng = np.random.default_rng(TAIL_MC_SEED)
    x = np.abs(model.sample(rng, TAIL_MC_SAMPLES))
    y = np.where(x > M, x, 0.0)
    return float(y.mean()), float(y.std(ddof=1) / math.sqrt(TAIL_MC_SAMPLES))


# --------------------------------------------------------------------------
# operations


def sample(model: ArmModel, rng: np.random.Generator, size: int | None = None):
    return model.sample(rng, size)


def mean(model: ArmModel) -> float:
    return model.mean()


def abs_moment(model: ArmModel, eps: float) -> float:
    """E|X|^(1+eps); ``inf`` when the moment diverges."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return model.abs_moment(eps)


def tail_mean(model: ArmModel, M: float) -> float:
    """E[|X| 1{|X| > M}].

    Closed form for pareto, uniform, bernoulli, point mass and perturbed
    models over those.  Gaussian and exponential arms fall back to a
    fixed-seed Monte-Carlo estimate over ``TAIL_MC_SAMPLES`` draws; use
    :func:`tail_mean_with_error` to get its standard error.
    """
    return tail_mean_with_error(model, M)[0]


def tail_mean_with_error(model: ArmModel, M: float) -> tuple[float, float]:
    if not M > 0:
        raise ValueError("M must be positive")
    return model.tail_mean_with_error(M)


class NoClosedForm(ValueError):
    pass


def _kl_bernoulli(p: float, q: float) -> float:
    out = 0.0
    for a, b in ((p, q), (1 - p, 1 - q)):
        if a > 0:
            if b <= 0:
                return math.inf
            out += a * math.log(a / b)
    return max(out, 0.0)


def kl_divergence(F: ArmModel, Fp: ArmModel) -> float:
    """D(F || Fp) for the pairs that have a closed form here."""
    if F == Fp:
        return 0.0
    if isinstance(F, Gaussian) and isinstance(Fp, Gaussian):
        s1, s2 = F.sigma, Fp.sigma
        return math.log(s2 / s1) + (s1 * s1 + (F.mu - Fp.mu) ** 2) / (2 * s2 * s2) - 0.5
    if isinstance(F, Bernoulli) and isinstance(Fp, Bernoulli):
        return _kl_bernoulli(F.p, Fp.p)
    if isinstance(Fp, Perturbed) and Fp.base == F:
        return -math.log1p(-Fp.gamma)
    raise NoClosedForm(f"no closed form for KL({F.to_text()} || {Fp.to_text()})")


def perturb_bounded(F: ArmModel, a: float, b: float) -> Perturbed:
    """Build F' with D(F, F') = a and mean(F') >= b from a bounded F."""
    if not F.bounded:
        raise ValueError(f"perturbation needs a bounded distribution, got {F.to_text()}")
    if not a > 0:
        raise ValueError("a must be positive")
    mu = F.mean()
    if not b > mu:
        raise ValueError(f"target mean b={b} must exceed mean(F)={mu}")
    v = F.support()[1]
    gamma = -math.expm1(-a)
    needed = 2 * (b - (1 - gamma) * mu) / gamma - v
    v_prime = max(v + _NUDGE * max(abs(v), 1.0), needed)
    return Perturbed(F, gamma, v, v_prime)


# --------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class BanditInstance:
    arms: tuple
    mu_star: float = field(init=False, compare=False)
    gaps: tuple = field(init=False, compare=False)

    def __post_init__(self):
        arms = tuple(self.arms)
        if not arms:
            raise ValueError("a bandit instance needs at least one arm")
        for a in arms:
            if not isinstance(a, ArmModel):
                raise TypeError(f"not an arm model: {a!r}")
        means = [a.mean() for a in arms]
        mu_star = max(means)
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "mu_star", mu_star)
        object.__setattr__(self, "gaps", tuple(mu_star - m for m in means))

    @property
    def k(self) -> int:
        return len(self.arms)

    @property
    def means(self) -> tuple:
        return tuple(a.mean() for a in self.arms)

    @property
    def optimal_arm(self) -> int:
        return self.gaps.index(0.0)


# --------------------------------------------------------------------------
# text form

_ARM_SIGNATURES = {
    "bernoulli": (Bernoulli, ["p"], {}),
    "uniform": (Uniform, ["a", "b"], {}),
    "gaussian": (Gaussian, ["mu", "sigma"], {}),
    "normal": (Gaussian, ["mu", "sigma"], {}),
    "exponential": (Exponential, ["rate", "shift"], {"shift": 0.0}),
    "pareto": (Pareto, ["x_m", "a_shape"], {}),
    "point_mass": (PointMass, ["c"], {}),
    "point": (PointMass, ["c"], {}),
    "dirac": (PointMass, ["c"], {}),
}


def arm_from_node(node) -> ArmModel:
    if not isinstance(node, Call):
        raise ParseError(f"expected a distribution, got {node!r}")
    name = node.name.replace("-", "_")
    if name == "perturbed":
        kw = bind(node, ["base", "gamma", "v", "v_prime"])
        return Perturbed(arm_from_node(kw["base"]), kw["gamma"], kw["v"], kw["v_prime"])
    if name not in _ARM_SIGNATURES:
        raise ParseError(f"unknown distribution {node.name!r}")
    cls, params, defaults = _ARM_SIGNATURES[name]
    kw = bind(node, params, defaults)
    for k, v in kw.items():
        if not isinstance(v, float):
            raise ParseError(f"{node.name}: argument {k!r} must be a number")
    return cls(**kw)


def parse_arm(text: str) -> ArmModel:
    """Parse e.g. ``gaussian(1.7, 1)`` or ``pareto(1, 3)``."""
    return arm_from_node(parse(text))
