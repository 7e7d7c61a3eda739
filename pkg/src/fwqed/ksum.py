"""Brillouin-zone pole sums with adaptive grids and the i0+ prescription.

All self-energies and couplings have the form

    S(z) = mean_k sum_r w_r(k) / (z - lam_r(k)),

which is summed with the trapezoid rule on the uniform periodic grid. The
grid is doubled (reusing the old points) until successive values agree to a
tolerance. Real probe energies inside a pole band are regularized as
z = Delta + i eta for a schedule of eta values and Richardson-extrapolated to
eta -> 0. Energies clearly outside every pole band need no regularization and
are summed directly at eta = 0.
"""

from __future__ import annotations

import threading
import warnings
from collections.abc import Callable

import numpy as np

from .lattice import k_grid

ETA_SCHEDULE = (1e-3, 5e-4, 2.5e-4)
START_GRID = 2001
MAX_GRID = 2001 * 2**9
# floor of the safety distance from the sampled pole bands
GAP_MARGIN = 1e-4

TableFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


def richardson(values, etas=ETA_SCHEDULE):
    """Extrapolate f(eta) = f0 + a eta + b eta^2 to eta = 0 from a halving schedule."""
    if len(values) == 1:
        return values[0]
    e = np.asarray(etas, dtype=float)
    if len(values) != 3 or not np.allclose(e[1:] / e[:-1], 0.5):
        raise ValueError("Richardson extrapolation expects three eta values halving each time")
    f1, f2, f3 = values
    return (8 * f3 - 6 * f2 + f1) / 3


def _level_points(M0: int, level: int) -> np.ndarray:
    if level == 0:
        return k_grid(M0)
    M = M0 * 2 ** (level - 1)
    return k_grid(M) + np.pi / M


def _partial(w, lam, z):
    out = np.empty(len(z), dtype=complex)
    for i, zi in enumerate(z):
        out[i] = np.sum(w / (zi - lam))
    return out


def pole_sum(
    table: TableFn,
    z,
    tol: float = 1e-8,
    scale: float = 1.0,
    start: int = START_GRID,
    max_grid: int = MAX_GRID,
    cache_key=None,
    warn: bool = True,
) -> np.ndarray:
    """scale * mean_k sum_r w_r(k)/(z - lam_r(k)) for an array of complex z.

    Args:
        table: Maps momenta (M,) to weights and poles of shape (R, M).
        z: Probe energies, complex.
        tol: Absolute convergence tolerance on the scaled value.
        scale: Prefactor applied before testing convergence.
        start: Initial grid size.
        max_grid: Largest grid; a warning is issued if it is reached.
        cache_key: Hashable identity of ``table`` enabling table reuse.
        warn: Warn when the largest grid is reached before convergence.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    sums = np.zeros(len(z), dtype=complex)
    value = np.zeros(len(z), dtype=complex)
    active = np.ones(len(z), dtype=bool)
    level = 0
    count = 0
    while True:
        ks = _level_points(start, level)
        w, lam = _cached_table(table, cache_key, start, level) if cache_key is not None else table(ks)
        idx = np.flatnonzero(active)
        sums[idx] += _partial(w, lam, z[idx])
        count_new = count + len(ks)
        new = scale * sums[idx] / count_new
        if level > 0:
            done = np.abs(new - value[idx]) < tol
            active[idx[done]] = False
        value[idx] = new
        count = count_new
        if not active.any():
            break
        if 2 * count > max_grid:
            if not warn:
                break
            warnings.warn(
                f"k-sum not converged to {tol:g} at grid {count} for {active.sum()} probe energies",
                RuntimeWarning,
                stacklevel=2,
            )
            break
        level += 1
    return value


_TABLES: dict = {}
_TABLE_BUDGET = 400 * 2**20
_LOCK = threading.Lock()


def _cached_table(table, key, start, level):
    # tables are pure functions of (key, grid), so sharing them is safe
    full = (key, start, level)
    with _LOCK:
        hit = _TABLES.get(full)
    if hit is None:
        hit = table(_level_points(start, level))
        with _LOCK:
            used = sum(a.nbytes + b.nbytes for a, b in _TABLES.values())
            if used + hit[0].nbytes + hit[1].nbytes > _TABLE_BUDGET:
                _TABLES.clear()
            _TABLES[full] = hit
    return hit


def pole_ranges(table: TableFn, start: int = START_GRID, cache_key=None) -> np.ndarray:
    """Pole bands as (low, high) per row, widened for the sampling grid.

    A true band edge between two grid points can lie beyond the sampled
    extremum by at most about one grid step in lambda, so each band is
    widened by its largest neighbour difference, with GAP_MARGIN as a floor.

    Returns:
        Array of shape (R, 2).
    """
    _, lam = _cached_table(table, cache_key, start, 0) if cache_key is not None else table(k_grid(start))
    lam = np.real(lam)
    step = np.abs(np.diff(np.concatenate([lam, lam[:, :1]], axis=1), axis=1)).max(axis=1)
    pad = np.maximum(step, GAP_MARGIN)
    return np.stack([lam.min(axis=1) - pad, lam.max(axis=1) + pad], axis=1)


def outside_bands(ranges: np.ndarray, Delta) -> np.ndarray:
    """True where Delta lies outside every (widened) pole band."""
    d = np.atleast_1d(np.asarray(Delta, dtype=float))[:, None]
    inside = (d >= ranges[None, :, 0]) & (d <= ranges[None, :, 1])
    return ~inside.any(axis=1)


def regularized_sum(
    table: TableFn,
    Delta,
    scale: float,
    etas=ETA_SCHEDULE,
    tol: float = 1e-8,
    cache_key=None,
    side: int = +1,
) -> np.ndarray:
    """Retarded (side=+1) or advanced (side=-1) limit of pole_sum at real Delta."""
    Delta = np.atleast_1d(np.asarray(Delta, dtype=float))
    out = np.empty(len(Delta), dtype=complex)
    gap = outside_bands(pole_ranges(table, cache_key=cache_key), Delta)
    if gap.any():
        out[gap] = pole_sum(table, Delta[gap].astype(complex), tol=tol, scale=scale, cache_key=cache_key)
    band = ~gap
    if band.any():
        values = [
            pole_sum(table, Delta[band] + side * 1j * eta, tol=tol, scale=scale, cache_key=cache_key)
            for eta in etas
        ]
        out[band] = richardson(values, etas)
    return out
