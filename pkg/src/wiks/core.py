"""Weight functions, the Monte Carlo WIKS estimator and the Bayes decision rule.

The index is the posterior expectation of ``W(d(P1, P2))`` where ``W`` is
the CDF of a weight density on ``[0, 1]`` and ``d`` the Kolmogorov
distance.  :func:`wiks` estimates it by averaging ``W(d)`` over ``S``
independent pairs of posterior draws; :func:`wiks_survival_form`
evaluates the equivalent integral of ``w(eps) * P(d > eps)`` and serves
as a cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .distributions import SeedSpec
from .dp_posterior import (
    DEFAULT_MAX_ATOMS,
    DEFAULT_TRUNC_EPS,
    DPPrior,
    PosteriorState,
    draw,
    iter_draw_batches,
    posterior,
)
from .exceptions import InputError, ParameterError
from .metrics import batch_ks, batch_ks_bivariate, ks_atomic, ks_atomic_bivariate

__all__ = [
    "WeightSpec",
    "PowerComplement",
    "UniformWeight",
    "TabulatedCDF",
    "WiksEstimate",
    "DecisionRule",
    "Decision",
    "cumulative_weight",
    "wiks",
    "wiks_from_distances",
    "posterior_distances",
    "wiks_survival_form",
    "threshold_from_losses",
    "decide",
    "DEFAULT_DRAWS",
]

DEFAULT_DRAWS = 1000


class WeightSpec:
    """A weight density ``w`` on ``[0, 1]`` and its CDF ``W``."""

    def cdf(self, t):
        raise NotImplementedError

    def density(self, t):
        raise NotImplementedError

    def breakpoints(self) -> np.ndarray:
        """Points where ``w`` is not smooth (used by quadrature)."""
        return np.array([0.0, 1.0])


@dataclass(frozen=True)
class PowerComplement(WeightSpec):
    """``W(t) = 1 - (1 - t)**lam``, the CDF of Beta(1, lam)."""

    lam: float = 4.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ParameterError("lambda must be positive")

    def cdf(self, t):
        return 1.0 - (1.0 - np.asarray(t, dtype=float)) ** self.lam

    def density(self, t):
        return self.lam * (1.0 - np.asarray(t, dtype=float)) ** (self.lam - 1.0)


@dataclass(frozen=True)
class UniformWeight(WeightSpec):
    """``W(t) = t``; the index becomes the posterior mean distance."""

    def cdf(self, t):
        return np.asarray(t, dtype=float) * 1.0

    def density(self, t):
        return np.ones_like(np.asarray(t, dtype=float))


@dataclass(frozen=True, eq=False)
class TabulatedCDF(WeightSpec):
    """Piecewise-linear ``W`` through user-supplied knots.

    Knots must span ``[0, 1]``.  Values are clipped to ``[0, 1]``, made
    nondecreasing by a running maximum and pinned to ``W(0) = 0``,
    ``W(1) = 1``.
    """

    knots: tuple
    values: tuple

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or k.size < 2:
            raise InputError("knots and values must be 1-D arrays of equal length >= 2")
        if k[0] != 0.0 or k[-1] != 1.0 or np.any(np.diff(k) <= 0):
            raise InputError("knots must increase strictly from 0 to 1")
        v = np.maximum.accumulate(np.clip(v, 0.0, 1.0))
        v[0], v[-1] = 0.0, 1.0
        object.__setattr__(self, "knots", k)
        object.__setattr__(self, "values", v)

    def cdf(self, t):
        return np.interp(t, self.knots, self.values)

    def density(self, t):
        slopes = np.diff(self.values) / np.diff(self.knots)
        idx = np.clip(np.searchsorted(self.knots, t, side="right") - 1, 0, slopes.size - 1)
        return slopes[idx]

    def breakpoints(self):
        return self.knots


def cumulative_weight(spec: WeightSpec, t: float) -> float:
    """Evaluate ``W(t)`` for ``t`` in ``[0, 1]``."""
    arr = np.asarray(t, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise InputError("t must lie in [0, 1]")
    out = spec.cdf(arr)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class WiksEstimate:
    value: float
    mc_std_error: float
    draws_used: int
    truncation_flag_count: int = 0


def wiks_from_distances(distances, spec: WeightSpec, truncated: int = 0) -> WiksEstimate:
    """Average ``W(d)`` over sampled distances, with its Monte Carlo error."""
    d = np.asarray(distances, dtype=float).ravel()
    if d.size == 0:
        raise InputError("need at least one distance")
    if np.any(~((d >= 0.0) & (d <= 1.0))):
        raise InputError("distances must lie in [0, 1]")
    w = np.asarray(spec.cdf(d), dtype=float)
    value = float(np.clip(w.mean(), 0.0, 1.0))
    se = float(w.std(ddof=1) / np.sqrt(d.size)) if d.size > 1 else 0.0
    return WiksEstimate(value, se, int(d.size), int(truncated))


def posterior_distances(state_x: PosteriorState, state_y: PosteriorState, draws: int,
                        seed: SeedSpec, trunc_eps: float = DEFAULT_TRUNC_EPS,
                        max_atoms: int = DEFAULT_MAX_ATOMS):
    """Kolmogorov distances between ``draws`` independent posterior draw pairs.

    Draws for the two samples come from disjoint streams
    (``seed.spawn(0)`` and ``seed.spawn(1)``).  Returns the distance
    vector and the number of draws that hit the atom cap.
    """
    batches_x = iter_draw_batches(state_x, draws, seed.spawn(0), trunc_eps, max_atoms)
    batches_y = iter_draw_batches(state_y, draws, seed.spawn(1), trunc_eps, max_atoms)
    metric = batch_ks if state_x.dim == 1 else batch_ks_bivariate
    out, truncated = [], 0
    for bx, by in zip(batches_x, batches_y):
        out.append(metric(state_x.data, state_y.data, bx, by))
        truncated += int(bx.truncated.sum() + by.truncated.sum())
    return np.concatenate(out), truncated


def _pairs_from_draw(state_x, state_y, draws, seed, trunc_eps, max_atoms):
    for s in range(draws):
        yield (draw(state_x, trunc_eps, max_atoms, seed.spawn(0, s)),
               draw(state_y, trunc_eps, max_atoms, seed.spawn(1, s)))


def wiks(x, y, prior: DPPrior = DPPrior(), spec: WeightSpec = PowerComplement(4.0),
         draws: int = DEFAULT_DRAWS, seed=SeedSpec(0), *,
         trunc_eps: float = DEFAULT_TRUNC_EPS, max_atoms: int = DEFAULT_MAX_ATOMS,
         distance: Optional[Callable] = None,
         pair_sampler: Optional[Callable] = None) -> WiksEstimate:
    """Monte Carlo estimate of the WIKS index for samples ``x`` and ``y``.

    Parameters
    ----------
    x, y : array_like
        Samples, shape ``(n,)``/``(m,)`` or ``(n, 2)``/``(m, 2)`` matching
        the prior's base measure.
    prior : DPPrior
        Common independent Dirichlet-process prior for both populations.
    spec : WeightSpec
        Cumulative weight function ``W``.
    draws : int
        Number ``S`` of posterior draw pairs.
    seed : SeedSpec or int
    trunc_eps, max_atoms
        Stick-breaking truncation controls.
    distance : callable, optional
        ``distance(P, Q) -> float`` on :class:`AtomicDistribution` pairs.
        Defaults to the Kolmogorov distance.  Supplying one switches to
        materialised draws, which is much slower.
    pair_sampler : callable, optional
        ``pair_sampler(state_x, state_y, draws, seed)`` yielding
        ``(P, Q)`` pairs; replaces posterior sampling (for testing).

    Returns
    -------
    WiksEstimate
    """
    if draws < 1:
        raise InputError("draws must be at least 1")
    if not isinstance(seed, SeedSpec):
        seed = SeedSpec(int(seed))
    state_x, state_y = posterior(prior, x), posterior(prior, y)
    if state_x.n == 0 or state_y.n == 0:
        raise InputError("both samples must be nonempty")
    if distance is None and pair_sampler is None:
        d, truncated = posterior_distances(state_x, state_y, draws, seed, trunc_eps, max_atoms)
        return wiks_from_distances(d, spec, truncated)

    if distance is None:
        distance = ks_atomic if prior.dim == 1 else ks_atomic_bivariate
    sampler = pair_sampler or (
        lambda sx, sy, s, sd: _pairs_from_draw(sx, sy, s, sd, trunc_eps, max_atoms))
    d, truncated = [], 0
    for p, q in sampler(state_x, state_y, draws, seed):
        d.append(distance(p, q))
        truncated += int(p.truncated) + int(q.truncated)
    if len(d) != draws:
        raise InputError(f"pair sampler produced {len(d)} pairs, expected {draws}")
    return wiks_from_distances(d, spec, truncated)


def wiks_survival_form(distances, spec: WeightSpec, quadrature_points: int = 16) -> float:
    """Integrate ``w(eps) * S(eps)`` over ``[0, 1]``.

    ``S`` is the empirical survival function of ``distances``.  The
    integral is split at every distance and every breakpoint of ``w`` and
    each piece is integrated with Gauss-Legendre quadrature of
    ``quadrature_points`` nodes.
    """
    d = np.sort(np.asarray(distances, dtype=float).ravel())
    if d.size == 0 or d[0] < 0.0 or d[-1] > 1.0:
        raise InputError("distances must be a nonempty vector in [0, 1]")
    edges = np.unique(np.concatenate([d, spec.breakpoints(), [0.0, 1.0]]))
    edges = edges[(edges >= 0.0) & (edges <= 1.0)]
    a, b = edges[:-1], edges[1:]
    surv = 1.0 - np.searchsorted(d, 0.5 * (a + b), side="right") / d.size
    nodes, wts = np.polynomial.legendre.leggauss(int(quadrature_points))
    # t = a + (b - a)(1 - cos phi)/2 clusters nodes at both ends, which keeps
    # densities like (1 - t)**(lam - 1) with lam < 1 integrable to high accuracy
    phi = 0.5 * np.pi * (nodes + 1.0)
    half = 0.5 * (b - a)
    pts = a[:, None] + half[:, None] * (1.0 - np.cos(phi))[None, :]
    jac = 0.5 * np.pi * np.sin(phi) * wts
    pieces = half * (np.asarray(spec.density(pts), dtype=float) * jac).sum(axis=1)
    return float((surv * pieces).sum())


def threshold_from_losses(c0: float, c1: float) -> float:
    """Bayes threshold ``c1 / (c1 + c0)`` for losses ``c0`` (accept) and ``c1`` (reject)."""
    if not (c0 > 0 and c1 > 0):
        raise InputError("losses must be positive")
    return c1 / (c1 + c0)


@dataclass(frozen=True)
class DecisionRule:
    """Either an explicit threshold in (0, 1) or a pair of losses."""

    threshold: Optional[float] = None
    c0: Optional[float] = None
    c1: Optional[float] = None

    def __post_init__(self):
        if self.threshold is None:
            if self.c0 is None or self.c1 is None:
                raise InputError("give a threshold or both losses")
            object.__setattr__(self, "threshold", threshold_from_losses(self.c0, self.c1))
        elif not 0.0 < self.threshold < 1.0:
            raise InputError("threshold must lie in (0, 1)")


@dataclass(frozen=True)
class Decision:
    reject: bool
    value: float
    threshold: float

    @property
    def label(self) -> str:
        return "reject_H0" if self.reject else "accept_H0"


def decide(estimate, rule) -> Decision:
    """Reject H0 iff the index strictly exceeds the threshold."""
    if not isinstance(rule, DecisionRule):
        rule = DecisionRule(threshold=float(rule))
    value = estimate.value if isinstance(estimate, WiksEstimate) else float(estimate)
    return Decision(bool(value > rule.threshold), value, rule.threshold)
