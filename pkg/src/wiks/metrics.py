"""Kolmogorov distances between atomic measures and the shrunk-ECDF statistic.

All suprema here are of differences of step functions, so they are
evaluated exactly at jump locations (or on the coordinate grid in two
dimensions); no tolerance is involved.
"""
from __future__ import annotations

import numpy as np

from .dp_posterior import AtomicDistribution, DrawBatch, PosteriorState, posterior_mean_cdf
from .exceptions import InputError, ResourceError

__all__ = [
    "ks_atomic",
    "ks_atomic_bivariate",
    "z_statistic",
    "ks_mean_measures",
    "batch_ks",
    "batch_ks_bivariate",
    "MAX_BIVARIATE_ATOMS",
]

# combined atom count above which the bivariate grid (count**2 cells) is refused
MAX_BIVARIATE_ATOMS = 6000

_BIV_CHUNK_CELLS = 1_000_000


def _sup_step_gap(locs, diff):
    """Row-wise ``max |cumsum(diff)|`` over distinct sorted locations.

    ``locs`` and ``diff`` have shape (rows, L).  Atoms sharing a location
    contribute their combined mass before the comparison.
    """
    order = np.argsort(locs, axis=1, kind="stable")
    locs = np.take_along_axis(locs, order, axis=1)
    gaps = np.cumsum(np.take_along_axis(diff, order, axis=1), axis=1)
    last = np.ones(locs.shape, dtype=bool)
    last[:, :-1] = locs[:, 1:] != locs[:, :-1]
    return np.clip(np.where(last, np.abs(gaps), 0.0).max(axis=1, initial=0.0), 0.0, 1.0)


def ks_atomic(p: AtomicDistribution, q: AtomicDistribution) -> float:
    """Kolmogorov distance ``sup_x |F_P(x) - F_Q(x)|`` of two univariate atomic measures."""
    if p.dim != 1 or q.dim != 1:
        raise InputError("ks_atomic needs univariate measures")
    locs = np.concatenate([p.atoms, q.atoms])[None, :]
    diff = np.concatenate([p.weights, -q.weights])[None, :]
    return float(_sup_step_gap(locs, diff)[0])


def _grid_gap(xs, ys, diff):
    """Row-wise sup of |2-D cumulative diff| on the coordinate grid.

    ``xs``, ``ys``, ``diff`` have shape (rows, L).
    """
    rows, size = diff.shape
    ox = np.argsort(xs, axis=1, kind="stable")
    oy = np.argsort(ys, axis=1, kind="stable")
    rx = np.empty_like(ox)
    ry = np.empty_like(oy)
    ar = np.arange(size)
    np.put_along_axis(rx, ox, ar[None, :], axis=1)
    np.put_along_axis(ry, oy, ar[None, :], axis=1)
    sx = np.take_along_axis(xs, ox, axis=1)
    sy = np.take_along_axis(ys, oy, axis=1)
    # evaluate only at the last position of each tie group
    lastx = np.ones((rows, size), dtype=bool)
    lasty = np.ones((rows, size), dtype=bool)
    lastx[:, :-1] = sx[:, 1:] != sx[:, :-1]
    lasty[:, :-1] = sy[:, 1:] != sy[:, :-1]
    flat = (np.arange(rows)[:, None] * size + rx) * size + ry
    grid = np.bincount(flat.ravel(), weights=diff.ravel(), minlength=rows * size * size)
    grid = grid.reshape(rows, size, size)
    np.cumsum(grid, axis=1, out=grid)
    np.cumsum(grid, axis=2, out=grid)
    # interior positions of a tie group are only wrong when real atoms tie;
    # padding atoms carry no mass, so the masks are skipped when unneeded
    finite = np.isfinite(sx[:, :-1])
    if np.any(~lastx[:, :-1] & finite) or np.any(~lasty[:, :-1] & np.isfinite(sy[:, :-1])):
        grid *= lastx[:, :, None]
        grid *= lasty[:, None, :]
    flat_grid = grid.reshape(rows, -1)
    best = np.maximum(flat_grid.max(axis=1), -flat_grid.min(axis=1))
    return np.clip(best, 0.0, 1.0)


def ks_atomic_bivariate(p: AtomicDistribution, q: AtomicDistribution,
                        max_atoms: int = MAX_BIVARIATE_ATOMS) -> float:
    """Bivariate Kolmogorov distance over lower-left quadrants.

    The supremum of a difference of two 2-D atomic CDFs is attained on
    the grid of (atom x-coordinate, atom y-coordinate) pairs, which is
    enumerated exactly.  Cost is quadratic in the combined atom count.
    """
    if p.dim != 2 or q.dim != 2:
        raise InputError("ks_atomic_bivariate needs bivariate measures")
    size = len(p) + len(q)
    if size > max_atoms:
        raise ResourceError(
            f"{size} combined atoms exceed the bivariate cap of {max_atoms}; "
            "use a larger trunc_eps to shorten the posterior draws")
    pts = np.concatenate([p.atoms, q.atoms])
    diff = np.concatenate([p.weights, -q.weights])
    return float(_grid_gap(pts[None, :, 0], pts[None, :, 1], diff[None, :])[0])


def z_statistic(x, y, k: float) -> float:
    """``sup_t |#{x_i <= t}/(K+n) - #{y_j <= t}/(K+m)|``."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0 or y.size == 0:
        raise InputError("z_statistic needs nonempty samples")
    if not k > 0:
        raise InputError("K must be positive")
    jumps = np.concatenate([x, y])
    fx = np.searchsorted(np.sort(x), jumps, side="right") / (k + x.size)
    fy = np.searchsorted(np.sort(y), jumps, side="right") / (k + y.size)
    return float(np.abs(fx - fy).max())


def ks_mean_measures(state_x: PosteriorState, state_y: PosteriorState,
                     grid: int = 1024) -> float:
    """Kolmogorov distance between the two posterior mean measures.

    Evaluated at every data point of both samples, just left of every
    data point, and at ``grid`` quantiles of each base measure.  With a
    shared continuous base the difference is monotone between data
    points, so the data points and their left limits already give the
    exact supremum; the quantile grid covers differing bases.
    """
    if state_x.dim != 1 or state_y.dim != 1:
        raise InputError("ks_mean_measures is univariate only")
    levels = (np.arange(grid) + 0.5) / grid
    jumps = np.concatenate([state_x.data, state_y.data])
    pts = np.concatenate([jumps, np.nextafter(jumps, -np.inf),
                          np.asarray(state_x.prior.base.ppf(levels), dtype=float),
                          np.asarray(state_y.prior.base.ppf(levels), dtype=float)])
    pts = pts[np.isfinite(pts)]
    if pts.size == 0:
        return 0.0
    # base part and data part kept apart so equal priors with n = m cancel
    # exactly and the data part matches z_statistic bit for bit
    kx, ky = state_x.prior.concentration, state_y.prior.concentration
    base = (kx * state_x.prior.base_cdf(pts) / (kx + state_x.n)
            - ky * state_y.prior.base_cdf(pts) / (ky + state_y.n))
    data = (np.searchsorted(np.sort(state_x.data), pts, side="right") / (kx + state_x.n)
            - np.searchsorted(np.sort(state_y.data), pts, side="right") / (ky + state_y.n))
    return min(float(np.abs(base + data).max()), 1.0)


# Batched distances between compact posterior draws ------------------------


def batch_ks(x: np.ndarray, y: np.ndarray, bx: DrawBatch, by: DrawBatch) -> np.ndarray:
    """Kolmogorov distance for each row pair of two univariate draw batches."""
    rows = bx.size
    n, m = x.size, y.size
    locs = np.concatenate([
        np.broadcast_to(x, (rows, n)),
        np.broadcast_to(y, (rows, m)),
        bx.fresh_atoms,
        by.fresh_atoms,
    ], axis=1)
    diff = np.concatenate([
        bx.observed_mass,
        -by.observed_mass,
        bx.fresh_mass,
        -by.fresh_mass,
    ], axis=1)
    return _sup_step_gap(locs, diff)


def batch_ks_bivariate(x: np.ndarray, y: np.ndarray, bx: DrawBatch,
                       by: DrawBatch) -> np.ndarray:
    """Bivariate Kolmogorov distance for each row pair of two draw batches."""
    rows = bx.size
    pts = np.concatenate([
        np.broadcast_to(x, (rows,) + x.shape),
        np.broadcast_to(y, (rows,) + y.shape),
        bx.fresh_atoms,
        by.fresh_atoms,
    ], axis=1)
    diff = np.concatenate([bx.observed_mass, -by.observed_mass,
                           bx.fresh_mass, -by.fresh_mass], axis=1)
    size = diff.shape[1]
    if size > MAX_BIVARIATE_ATOMS:
        raise ResourceError(
            f"{size} support points per draw pair exceed the bivariate cap of "
            f"{MAX_BIVARIATE_ATOMS}; use a larger trunc_eps or smaller samples")
    step = max(1, _BIV_CHUNK_CELLS // (size * size))
    out = np.empty(rows)
    for s in range(0, rows, step):
        sl = slice(s, s + step)
        out[sl] = _grid_gap(pts[sl, :, 0], pts[sl, :, 1], diff[sl])
    return out
