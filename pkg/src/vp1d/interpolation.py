"""Constant-displacement interpolation along one axis of a 2D array.

Each line of the array is translated by its own displacement (in index
units), which is exactly the operation needed by split semi-Lagrangian
advection: new[i] = old(i - d). Values needed beyond the array ends are
supplied per line by the caller.
"""

import numpy as np
from scipy import ndimage

METHODS = ("lagrange3", "spline")


def lagrange3_weights(theta):
    """4-point Lagrange weights for nodes -1, 0, 1, 2 at offset theta in [0, 1)."""
    t = np.asarray(theta, dtype=float)
    return (
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    )


def _pad(a, pad, lo, hi):
    n_lines = a.shape[0]
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n_lines,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n_lines,))
    out = np.empty((n_lines, a.shape[1] + 2 * pad))
    out[:, :pad] = lo[:, None]
    out[:, pad:pad + a.shape[1]] = a
    out[:, pad + a.shape[1]:] = hi[:, None]
    return out


def shift_lines(a, disp, axis, lo=0.0, hi=0.0, method="lagrange3"):
    """Return b with b[..., i] = a(i - disp) along `axis`.

    `disp` holds one displacement per line (index units); `lo` and `hi`
    give the constant values seen beyond the low and high ends of each line.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("shift_lines expects a 2D array")
    work = a if axis == 1 else a.T
    n_lines, n = work.shape
    disp = np.broadcast_to(np.asarray(disp, dtype=float), (n_lines,))
    pad = int(np.ceil(np.max(np.abs(disp)))) + 3 if n_lines else 3
    padded = _pad(work, pad, lo, hi)

    if method == "lagrange3":
        # foot = i - d = i + m + theta, theta in [0, 1)
        m = np.floor(-disp).astype(np.int64)
        theta = -disp - m
        weights = lagrange3_weights(theta)
        out = np.zeros((n_lines, n))
        base = np.arange(n)[None, :] + pad + m[:, None]
        rows = np.arange(n_lines)[:, None]
        for s, w in zip((-1, 0, 1, 2), weights):
            out += w[:, None] * padded[rows, base + s]
    elif method == "spline":
        out = np.empty((n_lines, n))
        for k in range(n_lines):
            shifted = ndimage.shift(padded[k], disp[k], order=3, mode="nearest")
            out[k] = shifted[pad:pad + n]
    else:
        raise ValueError(f"unknown interpolation method {method!r}; choose from {METHODS}")
    return out if axis == 1 else out.T


def lagrange3_sample(values, coords):
    """Cubic Lagrange interpolation of 1D (or stacked 2D) samples at fractional indices.

    `values` has the interpolation axis last; `coords` are fractional node
    indices which must lie in [0, n - 1].
    """
    values = np.asarray(values, dtype=float)
    coords = np.asarray(coords, dtype=float)
    n = values.shape[-1]
    k = np.clip(np.floor(coords).astype(np.int64), 1, n - 3)
    theta = coords - k
    out = 0.0
    for s, w in zip((-1, 0, 1, 2), lagrange3_weights(theta)):
        out = out + w * values[..., k + s]
    return out
