"""Vectorized root finding for monotone functions."""

from __future__ import annotations

import numpy as np


def bracketed_newton(fn, dfn, targets, t_lo, t_hi, f_lo=None, f_hi=None, iters: int = 100):
    """Solve fn(t) = targets for increasing fn, one root per bracket [t_lo, t_hi].

    Newton steps (secant steps when ``dfn`` is None) are taken when they stay
    inside the current bracket; otherwise the bracket is bisected.
    """
    targets = np.asarray(targets, dtype=float)
    t_lo = np.array(t_lo, dtype=float, copy=True)
    t_hi = np.array(t_hi, dtype=float, copy=True)
    f_lo = (fn(t_lo) if f_lo is None else np.asarray(f_lo, dtype=float)) - targets
    f_hi = (fn(t_hi) if f_hi is None else np.asarray(f_hi, dtype=float)) - targets
    width = f_hi - f_lo
    t = t_lo - f_lo * (t_hi - t_lo) / np.where(width > 0, width, 1.0)
    t = np.clip(t, t_lo, t_hi)
    scale = np.maximum(np.abs(t_hi), 1.0)
    for _ in range(iters):
        f = fn(t) - targets
        left = f < 0
        t_lo = np.where(left, t, t_lo)
        f_lo = np.where(left, f, f_lo)
        t_hi = np.where(left, t_hi, t)
        f_hi = np.where(left, f_hi, f)
        if dfn is not None:
            d = dfn(t)
            cand = t - f / np.where(d > 0, d, np.inf)
        else:
            denom = f_hi - f_lo
            cand = t_lo - f_lo * (t_hi - t_lo) / np.where(denom > 0, denom, np.inf)
        inside = (cand > t_lo) & (cand < t_hi)
        new = np.where(inside, cand, 0.5 * (t_lo + t_hi))
        done = (np.abs(new - t) <= 4e-16 * scale) | (f == 0)
        t = np.where(f == 0, t, new)
        if np.all(done):
            break
    return t
