"""Conjugate Dirichlet-process posteriors and truncated stick-breaking draws.

Given ``n`` observations, ``DP(K, G)`` updates to ``DP(K + n, Gbar)`` with
``Gbar = (K G + sum_i delta_{x_i}) / (K + n)``.  Draws use the
stick-breaking construction with ``Beta(1, K + n)`` proportions and atoms
drawn i.i.d. from ``Gbar``.

Two entry points share one sampler:

* :func:`draw` materialises a single :class:`AtomicDistribution`;
* :func:`draw_batch` produces many draws at once in the compact form used
  by the Monte Carlo estimator (mass per observed point plus the list of
  fresh base atoms), which avoids sorting hundreds of atoms per draw.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .distributions import Normal, UnivariateModel, as_generator
from .exceptions import InputError, ParameterError

__all__ = [
    "DPPrior",
    "PosteriorState",
    "AtomicDistribution",
    "DrawBatch",
    "posterior",
    "draw",
    "draw_batch",
    "posterior_mean_cdf",
    "DEFAULT_TRUNC_EPS",
    "DEFAULT_MAX_ATOMS",
]

DEFAULT_TRUNC_EPS = 1e-4
DEFAULT_MAX_ATOMS = 100_000

# upper bound on the number of stick entries held in memory at once
_CHUNK_CELLS = 2_000_000


@dataclass(frozen=True)
class DPPrior:
    """``DP(concentration, base)``.

    ``base`` is a univariate model, or a pair of univariate models whose
    product is used as a bivariate base measure.
    """

    concentration: float = 1.0
    base: Union[UnivariateModel, tuple] = Normal(0.0, 1.0)

    def __post_init__(self):
        if not self.concentration > 0:
            raise ParameterError("concentration must be positive")
        if isinstance(self.base, (tuple, list)):
            if len(self.base) != 2:
                raise ParameterError("product base must have exactly two components")
            object.__setattr__(self, "base", tuple(self.base))

    @property
    def dim(self) -> int:
        return 2 if isinstance(self.base, tuple) else 1

    def sample_base(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.dim == 1:
            return np.asarray(self.base.sample(rng, size), dtype=float)
        cols = [np.asarray(b.sample(rng, size), dtype=float) for b in self.base]
        return np.column_stack(cols)

    def base_cdf(self, x):
        """CDF of the base measure; for the product base, ``x`` has shape (..., 2)."""
        if self.dim == 1:
            return np.asarray(self.base.cdf(x), dtype=float)
        x = np.asarray(x, dtype=float)
        return (np.asarray(self.base[0].cdf(x[..., 0]), dtype=float)
                * np.asarray(self.base[1].cdf(x[..., 1]), dtype=float))


@dataclass(frozen=True, eq=False)
class PosteriorState:
    prior: DPPrior
    data: np.ndarray

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def concentration(self) -> float:
        """Posterior concentration ``K + n``."""
        return self.prior.concentration + self.n

    @property
    def dim(self) -> int:
        return self.prior.dim


@dataclass(frozen=True, eq=False)
class AtomicDistribution:
    """Finitely supported probability measure.

    ``atoms`` has shape ``(k,)`` or ``(k, 2)``; ``weights`` has shape
    ``(k,)``.  ``truncated`` is set when a stick-breaking draw hit the
    atom cap before the residual mass fell below the tolerance.
    """

    atoms: np.ndarray
    weights: np.ndarray
    truncated: bool = False

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if atoms.ndim not in (1, 2) or atoms.shape[0] != weights.shape[0]:
            raise InputError("atoms and weights must have matching lengths")
        if atoms.ndim == 2 and atoms.shape[1] != 2:
            raise InputError("multivariate atoms must be 2-dimensional")
        if weights.size == 0 or np.any(weights <= 0):
            raise InputError("weights must be positive")
        if abs(weights.sum() - 1.0) > 1e-12 * max(1, weights.size):
            raise InputError(f"weights sum to {weights.sum()!r}, not 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return 1 if self.atoms.ndim == 1 else 2

    def __len__(self):
        return self.weights.size

    def cdf(self, x):
        """``P((-inf, x])``, componentwise in two dimensions."""
        if self.dim == 1:
            x = np.asarray(x, dtype=float)
            return (self.weights * (self.atoms <= x[..., None])).sum(axis=-1)
        x = np.asarray(x, dtype=float)
        below = np.all(self.atoms <= x[..., None, :], axis=-1)
        return (self.weights * below).sum(axis=-1)

    @classmethod
    def empirical(cls, data) -> "AtomicDistribution":
        data = np.asarray(data, dtype=float)
        if data.shape[0] == 0:
            raise InputError("empirical distribution needs at least one point")
        return cls(data, np.full(data.shape[0], 1.0 / data.shape[0]))


def _as_data(data, dim: int) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if dim == 1:
        if arr.ndim == 2 and arr.shape[1] == 1:
            arr = arr[:, 0]
        if arr.ndim != 1:
            raise InputError(f"expected univariate data, got shape {arr.shape}")
    else:
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise InputError(f"expected bivariate data of shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("data must be finite")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def posterior(prior: DPPrior, data) -> PosteriorState:
    """Condition ``prior`` on ``data`` (conjugate update)."""
    return PosteriorState(prior, _as_data(data, prior.dim))


def posterior_mean_cdf(state: PosteriorState, x):
    """CDF of the posterior mean measure, ``(K G(x) + #{x_i <= x}) / (K + n)``."""
    k = state.prior.concentration
    x = np.asarray(x, dtype=float)
    if state.dim == 1:
        counts = np.searchsorted(np.sort(state.data), x, side="right")
    else:
        below = np.all(state.data <= x[..., None, :], axis=-1)
        counts = below.sum(axis=-1)
    out = (k * state.prior.base_cdf(x) + counts) / (k + state.n)
    return float(out) if np.ndim(out) == 0 else out


# Stick breaking ------------------------------------------------------------


@dataclass
class _Sticks:
    """Raw stick-breaking output for a block of draws.

    ``weights[r, j]`` is the mass of atom ``j`` in draw ``r`` (zero past the
    final atom).  ``source[r, j]`` is the observed-point index the atom
    copies, ``n`` for a fresh base draw and ``n + 1`` past the final atom.
    ``fresh`` holds the fresh atom locations in row-major order.
    """

    weights: np.ndarray
    source: np.ndarray
    fresh: np.ndarray
    counts: np.ndarray
    truncated: np.ndarray


def _break_sticks(state: PosteriorState, rows: int, rng: np.random.Generator,
                  trunc_eps: float, max_atoms: int) -> _Sticks:
    b = state.concentration
    n = state.n
    # residual after j sticks is exp(-(E_1 + ... + E_j) / b) with E ~ Exp(1),
    # i.e. stick proportions 1 - exp(-E/b) ~ Beta(1, b)
    target = b * math.log(1.0 / trunc_eps)
    cap = max_atoms - 1
    spread = math.sqrt(target) + 1.0
    width = min(cap, int(math.ceil(target + 4.0 * spread)))
    blocks = [rng.standard_exponential((rows, width))] if width > 0 else []
    total = blocks[0].sum(axis=1) if blocks else np.zeros(rows)
    used = width
    while used < cap and np.any(total <= target):
        extra = min(cap - used, int(math.ceil(4.0 * spread)) + 16)
        block = rng.standard_exponential((rows, extra))
        blocks.append(block)
        total = total + block.sum(axis=1)
        used += extra
    exps = np.concatenate(blocks, axis=1) if len(blocks) > 1 else (
        blocks[0] if blocks else np.zeros((rows, 0)))
    cum = np.cumsum(exps, axis=1)
    done = cum > target
    hit = done.any(axis=1)
    # number of proper sticks before the final (residual) atom
    first = done.argmax(axis=1) + 1 if exps.shape[1] else np.zeros(rows, dtype=np.int64)
    nsticks = np.where(hit, first, exps.shape[1])
    kmax = int(nsticks.max()) if rows else 0
    ar = np.arange(rows)

    weights = np.zeros((rows, kmax + 1))
    if kmax:
        cum = cum[:, :kmax]
        body = weights[:, :kmax]
        np.multiply(cum[:, :-1], -1.0 / b, out=body[:, 1:])
        np.exp(body, out=body)
        body *= -np.expm1(exps[:, :kmax] * (-1.0 / b))
        past = np.arange(kmax + 1)[None, :] >= nsticks[:, None]
        weights[past] = 0.0
        weights[ar, nsticks] = np.exp(cum[ar, nsticks - 1] * (-1.0 / b))
    else:
        weights[:, 0] = 1.0
        past = np.zeros((rows, 1), dtype=bool)

    # atom sources: floor(u * b) < n copies that observed point, else fresh
    source = (rng.random((rows, kmax + 1)) * b).astype(np.int64)
    np.minimum(source, n, out=source)
    past[ar, nsticks] = False
    source[past] = n + 1
    nfresh = int(np.count_nonzero(source == n))
    fresh = state.prior.sample_base(rng, nfresh)
    return _Sticks(weights, source, fresh, nsticks + 1, ~hit)


def _check_trunc(trunc_eps, max_atoms):
    if not 0 < trunc_eps < 1:
        raise ParameterError("trunc_eps must lie in (0, 1)")
    if max_atoms < 1:
        raise ParameterError("max_atoms must be at least 1")


def draw(state: PosteriorState, trunc_eps: float = DEFAULT_TRUNC_EPS,
         max_atoms: int = DEFAULT_MAX_ATOMS, seed=0) -> AtomicDistribution:
    """Draw one random measure from the posterior by truncated stick breaking.

    Sticks are broken until the unassigned mass drops below ``trunc_eps``
    or ``max_atoms - 1`` sticks exist; the leftover mass goes to one final
    atom drawn from the posterior base measure.  The result is flagged
    ``truncated`` when the atom cap was the stopping reason.
    """
    _check_trunc(trunc_eps, max_atoms)
    rng = as_generator(seed)
    st = _break_sticks(state, 1, rng, trunc_eps, int(max_atoms))
    k = int(st.counts[0])
    src = st.source[0, :k]
    shape = (k,) if state.dim == 1 else (k, 2)
    atoms = np.empty(shape)
    obs = src < state.n
    atoms[obs] = state.data[src[obs]]
    atoms[~obs] = st.fresh
    return AtomicDistribution(atoms, st.weights[0, :k], bool(st.truncated[0]))


@dataclass(eq=False)
class DrawBatch:
    """Many posterior draws in compact form.

    Attributes
    ----------
    observed_mass : ndarray, shape (S, n)
        Total weight each draw puts on each observed point.
    fresh_atoms : ndarray, shape (S, F) or (S, F, 2)
        Fresh base atoms, padded with ``+inf``.
    fresh_mass : ndarray, shape (S, F)
        Their weights, padded with zeros.
    atom_counts : ndarray of int
        Number of stick-breaking atoms in each draw.
    truncated : ndarray of bool
    """

    observed_mass: np.ndarray
    fresh_atoms: np.ndarray
    fresh_mass: np.ndarray
    atom_counts: np.ndarray
    truncated: np.ndarray

    @property
    def size(self) -> int:
        return self.observed_mass.shape[0]


def _compact(state: PosteriorState, st: _Sticks) -> DrawBatch:
    rows, width = st.weights.shape
    n = state.n
    # observed atoms go to bucket r*n + i; fresh and padding to a dump bucket
    flat = st.source + (np.arange(rows) * n)[:, None]
    flat[st.source >= n] = rows * n
    observed = np.bincount(flat.ravel(), weights=st.weights.ravel(),
                           minlength=rows * n + 1)[:-1].reshape(rows, n)

    fresh_r, fresh_c = np.nonzero(st.source == n)
    per_row = np.bincount(fresh_r, minlength=rows)
    nf = int(per_row.max()) if fresh_r.size else 0
    starts = np.concatenate([[0], np.cumsum(per_row)[:-1]])
    slot = np.arange(fresh_r.size) - starts[fresh_r]
    shape = (rows, nf) if state.dim == 1 else (rows, nf, 2)
    atoms = np.full(shape, np.inf)
    mass = np.zeros((rows, nf))
    atoms[fresh_r, slot] = st.fresh
    mass[fresh_r, slot] = st.weights[fresh_r, fresh_c]
    return DrawBatch(observed, atoms, mass, st.counts, st.truncated)


def _concat_batches(parts: list) -> DrawBatch:
    if len(parts) == 1:
        return parts[0]
    nf = max(p.fresh_mass.shape[1] for p in parts)

    def pad(p):
        extra = nf - p.fresh_mass.shape[1]
        if extra == 0:
            return p.fresh_atoms, p.fresh_mass
        widths = [(0, 0), (0, extra)] + [(0, 0)] * (p.fresh_atoms.ndim - 2)
        return (np.pad(p.fresh_atoms, widths, constant_values=np.inf),
                np.pad(p.fresh_mass, [(0, 0), (0, extra)]))

    padded = [pad(p) for p in parts]
    return DrawBatch(
        np.concatenate([p.observed_mass for p in parts]),
        np.concatenate([a for a, _ in padded]),
        np.concatenate([m for _, m in padded]),
        np.concatenate([p.atom_counts for p in parts]),
        np.concatenate([p.truncated for p in parts]),
    )


def expected_stick_count(state: PosteriorState, trunc_eps: float) -> float:
    """Approximate number of sticks needed, ``(K + n) log(1 / eps)``."""
    return state.concentration * math.log(1.0 / trunc_eps)


def iter_draw_batches(state: PosteriorState, size: int, seed,
                      trunc_eps: float = DEFAULT_TRUNC_EPS,
                      max_atoms: int = DEFAULT_MAX_ATOMS):
    """Yield :class:`DrawBatch` blocks totalling ``size`` draws.

    Block sizes keep the stick matrix under a fixed memory budget.  The
    sequence of blocks depends only on ``(state, size, seed)``.
    """
    _check_trunc(trunc_eps, max_atoms)
    rng = as_generator(seed)
    width = min(max_atoms, expected_stick_count(state, trunc_eps) + 64)
    step = max(1, int(_CHUNK_CELLS // max(width, 1)))
    for start in range(0, size, step):
        rows = min(step, size - start)
        yield _compact(state, _break_sticks(state, rows, rng, trunc_eps, int(max_atoms)))


def draw_batch(state: PosteriorState, size: int, seed,
               trunc_eps: float = DEFAULT_TRUNC_EPS,
               max_atoms: int = DEFAULT_MAX_ATOMS) -> DrawBatch:
    """``size`` independent posterior draws in compact form."""
    if size < 1:
        raise InputError("size must be at least 1")
    return _concat_batches(list(iter_draw_batches(state, size, seed, trunc_eps, max_atoms)))
