"""Bessel functions of the first kind, orders 0 and 1.

Small arguments use the ascending power series, where all terms are small and
no cancellation occurs. Larger arguments use Miller's backward recurrence
normalized by J_0 + 2 sum_k J_2k = 1, which is stable for every order.
Relative error stays near machine precision except in the immediate
neighbourhood of a zero, where the absolute error (about 1e-16) sets the
limit. Arguments used by the lattice models are 2 z_k <= 8 V / Omega.
"""

import numpy as np

MAX_ARGUMENT = 12.0
_SERIES_LIMIT = 2.0
_TERMS = 40


def _series(x, order):
    q = -0.25 * x * x
    term = np.ones_like(x) if order == 0 else 0.5 * x
    total = term.copy()
    for m in range(1, _TERMS):
        term = term * q / (m * (m + order))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _miller(x):
    # start well above the turning point so the seed error has died out
    start = 2 * (int(x.max() + 30) // 2)
    upper = np.zeros_like(x)
    current = np.full_like(x, 1e-30)
    first = np.zeros_like(x)
    norm = np.zeros_like(x)
    for k in range(start, 0, -1):
        upper, current = current, 2 * k / x * current - upper
        if k == 2:
            first = current.copy()
        if k % 2 == 1 and k > 1:
            norm += 2 * current
        big = np.abs(current) > 1e200
        if big.any():
            for arr in (upper, current, norm, first):
                arr[big] *= 1e-200
    norm += current
    return current / norm, first / norm


def _evaluate(x, order):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > MAX_ARGUMENT):
        raise ValueError(f"Bessel functions limited to |x| <= {MAX_ARGUMENT}")
    ax = np.abs(np.atleast_1d(x))
    out = np.empty_like(ax)
    small = ax <= _SERIES_LIMIT
    out[small] = _series(ax[small], order)
    if (~small).any():
        out[~small] = _miller(ax[~small])[order]
    if order == 1:
        out = np.where(np.atleast_1d(x) < 0, -out, out)
    return out.reshape(x.shape) if x.ndim else float(out[0])


def j0(x):
    """Bessel function J_0 for real scalar or array input."""
    return _evaluate(x, 0)


def j1(x):
    """Bessel function J_1 for real scalar or array input."""
    return _evaluate(x, 1)
