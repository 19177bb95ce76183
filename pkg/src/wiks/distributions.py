"""Parametric families used as base measures, null models and scenario generators.

Every family is a small frozen dataclass exposing ``sample``, ``cdf`` and
``ppf``.  The module-level functions :func:`sample_univariate`,
:func:`cdf_univariate` and :func:`true_ks_distance` are the public entry
points used by the rest of the package.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import special

from .exceptions import ParameterError, UsageError

__all__ = [
    "SeedSpec",
    "as_generator",
    "UnivariateModel",
    "Normal",
    "Uniform",
    "LogNormal",
    "Beta",
    "Gamma",
    "StudentT",
    "NormalMixture",
    "BivariateNormal",
    "sample_univariate",
    "sample_bivariate",
    "cdf_univariate",
    "scenario",
    "scenario_grid",
    "SCENARIO_RANGES",
    "BIVARIATE_SCENARIOS",
    "true_ks_distance",
]

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus a stream path.

    Generators built from the same ``(seed, stream)`` produce bit-identical
    sequences; distinct streams are statistically independent.  Streams are
    derived with :class:`numpy.random.SeedSequence` spawn keys and drive a
    counter-based Philox bit generator, so replicate ``r`` can be computed
    on any worker in any order.
    """

    seed: int
    stream: Union[int, tuple] = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) <= _UINT64_MAX:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        key = self.stream if isinstance(self.stream, tuple) else (self.stream,)
        if any(int(k) < 0 for k in key):
            raise ParameterError("stream indices must be nonnegative")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "stream", tuple(int(k) for k in key))

    def spawn(self, *keys: int) -> "SeedSpec":
        """Return the child stream ``stream + keys``."""
        return SeedSpec(self.seed, self.stream + tuple(keys))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        return np.random.Generator(np.random.Philox(seq))


def as_generator(seed) -> np.random.Generator:
    """Accept a :class:`SeedSpec`, a ``Generator`` or a plain int."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, SeedSpec):
        return seed.generator()
    if isinstance(seed, (int, np.integer)):
        return SeedSpec(int(seed)).generator()
    raise TypeError(f"cannot build a generator from {type(seed).__name__}")


class UnivariateModel:
    """Base class for univariate families."""

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def ppf(self, q):
        raise NotImplementedError

    def _check(self, ok: bool, msg: str):
        if not ok:
            raise ParameterError(f"{type(self).__name__}: {msg}")


@dataclass(frozen=True)
class Normal(UnivariateModel):
    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        self._check(np.isfinite(self.mean), "mean must be finite")
        self._check(self.sd > 0, "sd must be positive")

    def sample(self, rng, n):
        return self.mean + self.sd * rng.standard_normal(n)

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.mean) / self.sd)

    def ppf(self, q):
        return self.mean + self.sd * special.ndtri(q)


@dataclass(frozen=True)
class Uniform(UnivariateModel):
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        self._check(self.hi > self.lo, "hi must exceed lo")

    def sample(self, rng, n):
        return rng.uniform(self.lo, self.hi, n)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def ppf(self, q):
        return self.lo + (self.hi - self.lo) * np.asarray(q, dtype=float)


@dataclass(frozen=True)
class LogNormal(UnivariateModel):
    """Distribution of ``exp(Z)`` with ``Z ~ N(log_mean, log_sd)``."""

    log_mean: float = 0.0
    log_sd: float = 1.0

    def __post_init__(self):
        self._check(self.log_sd > 0, "log_sd must be positive")

    def sample(self, rng, n):
        return np.exp(self.log_mean + self.log_sd * rng.standard_normal(n))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(np.where(x > 0, x, 1.0)) - self.log_mean) / self.log_sd
        return np.where(x > 0, special.ndtr(z), 0.0)

    def ppf(self, q):
        return np.exp(self.log_mean + self.log_sd * special.ndtri(q))


@dataclass(frozen=True)
class Beta(UnivariateModel):
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        self._check(self.a > 0 and self.b > 0, "a and b must be positive")

    def sample(self, rng, n):
        return rng.beta(self.a, self.b, n)

    def cdf(self, x):
        return special.betainc(self.a, self.b, np.clip(np.asarray(x, dtype=float), 0.0, 1.0))

    def ppf(self, q):
        return special.betaincinv(self.a, self.b, q)


@dataclass(frozen=True)
class Gamma(UnivariateModel):
    shape: float = 1.0
    rate: float = 1.0

    def __post_init__(self):
        self._check(self.shape > 0 and self.rate > 0, "shape and rate must be positive")

    def sample(self, rng, n):
        return rng.gamma(self.shape, 1.0 / self.rate, n)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return special.gammainc(self.shape, np.maximum(x, 0.0) * self.rate)

    def ppf(self, q):
        return special.gammaincinv(self.shape, q) / self.rate


@dataclass(frozen=True)
class StudentT(UnivariateModel):
    """Standard Student t; ``df`` may be well below 1 (very heavy tails)."""

    df: float = 1.0

    def __post_init__(self):
        self._check(self.df > 0, "df must be positive")

    def sample(self, rng, n):
        # normal / sqrt(chi2/df); numpy's standard_t is this ratio
        return rng.standard_t(self.df, n)

    def cdf(self, x):
        # stdtr is the regularized incomplete-beta relation
        return special.stdtr(self.df, np.asarray(x, dtype=float))

    def ppf(self, q):
        return special.stdtrit(self.df, q)


@dataclass(frozen=True)
class NormalMixture(UnivariateModel):
    """``weight * N(mean1, sd1) + (1 - weight) * N(mean2, sd2)``."""

    weight: float = 0.5
    mean1: float = 0.0
    sd1: float = 1.0
    mean2: float = 0.0
    sd2: float = 1.0

    def __post_init__(self):
        self._check(0.0 <= self.weight <= 1.0, "weight must lie in [0, 1]")
        self._check(self.sd1 > 0 and self.sd2 > 0, "component sds must be positive")

    def sample(self, rng, n):
        first = rng.random(n) < self.weight
        z = rng.standard_normal(n)
        return np.where(first, self.mean1 + self.sd1 * z, self.mean2 + self.sd2 * z)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return (self.weight * special.ndtr((x - self.mean1) / self.sd1)
                + (1.0 - self.weight) * special.ndtr((x - self.mean2) / self.sd2))

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        lo = np.minimum(self.mean1 + self.sd1 * special.ndtri(q),
                        self.mean2 + self.sd2 * special.ndtri(q))
        hi = np.maximum(self.mean1 + self.sd1 * special.ndtri(q),
                        self.mean2 + self.sd2 * special.ndtri(q))
        # the mixture quantile is bracketed by the component quantiles
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BivariateNormal:
    mean: tuple = (0.0, 0.0)
    cov: tuple = ((1.0, 0.0), (0.0, 1.0))
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = tuple(float(v) for v in np.asarray(self.mean, dtype=float).ravel())
        cov = np.asarray(self.cov, dtype=float)
        if len(mean) != 2 or cov.shape != (2, 2):
            raise ParameterError("BivariateNormal needs a length-2 mean and 2x2 covariance")
        if not np.allclose(cov, cov.T):
            raise ParameterError("covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ParameterError("covariance must be positive definite") from None
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", tuple(tuple(float(v) for v in row) for row in cov))
        object.__setattr__(self, "_chol", chol)

    def sample(self, rng, n):
        z = rng.standard_normal((n, 2))
        return np.asarray(self.mean) + z @ self._chol.T


def sample_univariate(model: UnivariateModel, n: int, seed) -> np.ndarray:
    """Draw ``n`` i.i.d. values from ``model``.

    ``seed`` may be a :class:`SeedSpec` or an existing generator (in which
    case the draws continue that generator's stream).
    """
    if n < 0:
        raise ParameterError("n must be nonnegative")
    return np.asarray(model.sample(as_generator(seed), int(n)), dtype=float)


def sample_bivariate(model: BivariateNormal, n: int, seed) -> np.ndarray:
    if n < 0:
        raise ParameterError("n must be nonnegative")
    return model.sample(as_generator(seed), int(n)).reshape(int(n), 2)


def cdf_univariate(model: UnivariateModel, x):
    """CDF of ``model`` at ``x`` (scalar in, float out; array in, array out)."""
    out = np.clip(model.cdf(x), 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


# Scenario catalogue -------------------------------------------------------

# Parameter range over which each power scenario is studied.
SCENARIO_RANGES = {
    1: (0.0, 3.0),
    2: (1.0, 4.0),
    3: (0.0, 3.0),
    4: (1.0, 5.0),
    5: (1.0, 6.0),
    6: (3.0, 6.0),
    7: (0.0, 3.0),
    8: (1e-3, 10.0),
}

BIVARIATE_SCENARIOS = {
    "B1": ((1.0, 0.0), (0.0, 1.0)),
    "B2": ((1.0, 0.5), (0.5, 2.0)),
}
_BIVARIATE_RANGE = (0.0, 1.0)


def _scenario_key(sid):
    if isinstance(sid, str):
        s = sid.strip().upper()
        if s in BIVARIATE_SCENARIOS:
            return s
        if s.isdigit():
            sid = int(s)
        else:
            raise UsageError(f"unknown scenario id {sid!r}")
    if isinstance(sid, (int, np.integer)) and int(sid) in SCENARIO_RANGES:
        return int(sid)
    raise UsageError(f"unknown scenario id {sid!r}")


def scenario(sid, theta: float):
    """Return the ``(model_x, model_y)`` pair for a power scenario.

    Scenarios ``1``-``8`` are univariate::

        1  N(0,1)        vs N(theta, 1)
        2  N(0,1)        vs N(0, variance theta)
        3  LN(0,1)       vs LN(theta, 1)
        4  LN(0,1)       vs LN(0, log-variance theta)
        5  Beta(1,1)     vs Beta(theta, theta)
        6  Gamma(3,2)    vs Gamma(theta, 2)
        7  N(0,1)        vs 1/2 N(-theta,1) + 1/2 N(theta,1)
        8  N(0,1)        vs t(1/theta)

    ``"B1"`` and ``"B2"`` are bivariate normal location shifts
    ``N((0,0), cov)`` vs ``N((theta,theta), cov)``; B1 has identity
    covariance, B2 has ``[[1, .5], [.5, 2]]``.
    """
    key = _scenario_key(sid)
    theta = float(theta)
    lo, hi = _BIVARIATE_RANGE if isinstance(key, str) else SCENARIO_RANGES[key]
    if not lo <= theta <= hi:
        warnings.warn(f"theta={theta} outside the studied range [{lo}, {hi}] "
                      f"for scenario {key}", stacklevel=2)
    if isinstance(key, str):
        cov = BIVARIATE_SCENARIOS[key]
        return BivariateNormal((0.0, 0.0), cov), BivariateNormal((theta, theta), cov)
    if key == 1:
        return Normal(0, 1), Normal(theta, 1)
    if key == 2:
        return Normal(0, 1), Normal(0, math.sqrt(theta) if theta > 0 else theta)
    if key == 3:
        return LogNormal(0, 1), LogNormal(theta, 1)
    if key == 4:
        return LogNormal(0, 1), LogNormal(0, math.sqrt(theta) if theta > 0 else theta)
    if key == 5:
        return Beta(1, 1), Beta(theta, theta)
    if key == 6:
        return Gamma(3, 2), Gamma(theta, 2)
    if key == 7:
        return Normal(0, 1), NormalMixture(0.5, -theta, 1.0, theta, 1.0)
    if theta <= 0:
        raise ParameterError("scenario 8 needs theta > 0")
    return Normal(0, 1), StudentT(1.0 / theta)


def scenario_grid(sid, points: int | None = None) -> np.ndarray:
    """Default theta grid for a scenario.

    Linear grids with step 0.5 (step 1 for scenario 5) over the studied
    range; scenario 8 uses 8 geometric points; bivariate scenarios use
    0, 0.2, ..., 1.
    """
    key = _scenario_key(sid)
    if isinstance(key, str):
        return np.linspace(*_BIVARIATE_RANGE, points or 6)
    lo, hi = SCENARIO_RANGES[key]
    if key == 8:
        return np.geomspace(lo, hi, points or 8)
    if points is None:
        step = 1.0 if key == 5 else 0.5
        points = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, points)


# True Kolmogorov distance oracle ------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _abs_gap(mx, my, x):
    return np.abs(np.asarray(mx.cdf(x), dtype=float) - np.asarray(my.cdf(x), dtype=float))


def _golden_max(f, a, b):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(200):
        if b - a <= 1e-13 * (1.0 + abs(a) + abs(b)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return max(fc, fd)


def true_ks_distance(model_x: UnivariateModel, model_y: UnivariateModel,
                     tol: float = 1e-8, grid: int = 4096) -> float:
    """Numerically evaluate ``sup_x |F_X(x) - F_Y(x)|``.

    The search grid is the union of both models' quantiles at ``grid``
    equally spaced levels in ``[1e-6, 1 - 1e-6]`` together with a linear
    grid over the joint central range; the best grid cells are refined by
    golden-section search.  Quantile-spaced points keep very heavy tails
    (e.g. t with df 0.1) resolved without a huge linear grid.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    levels = np.linspace(1e-6, 1.0 - 1e-6, grid)
    pts = [np.asarray(model_x.ppf(levels), dtype=float),
           np.asarray(model_y.ppf(levels), dtype=float)]
    finite = np.concatenate([p[np.isfinite(p)] for p in pts])
    lo, hi = finite.min(), finite.max()
    xs = np.unique(np.concatenate(pts + [np.linspace(lo, hi, grid)]))
    xs = xs[np.isfinite(xs)]
    gaps = _abs_gap(model_x, model_y, xs)
    best = float(gaps.max())
    if best <= 0.0:
        return 0.0
    f = lambda t: float(_abs_gap(model_x, model_y, t))  # noqa: E731
    for i in np.argsort(gaps)[::-1][:8]:
        a = xs[max(i - 1, 0)]
        b = xs[min(i + 1, len(xs) - 1)]
        if b > a:
            best = max(best, _golden_max(f, a, b))
    return min(best, 1.0)
