"""Least-squares convergence-rate fits on log-log error curves."""

from dataclasses import dataclass

import numpy as np

__all__ = ["RateFit", "fit_rate"]


@dataclass(frozen=True)
class RateFit:
    """Power-law fit metric ~ exp(intercept) * k**slope over a k-window."""

    slope: float
    intercept: float
    r_squared: float
    window: tuple
    n_points: int


def fit_rate(ks, means, window=None) -> RateFit:
    """Fit a slope on (log k, log metric) by least squares.

    ``window`` is an inclusive (k_lo, k_hi) pair; the default is the last two
    decades, (max(k)/100, max(k)).  Requires at least 5 logged points in the
    window, all with positive metric values.
    """
    ks = np.asarray(ks, dtype=float)
    means = np.asarray(means, dtype=float)
    if ks.shape != means.shape or ks.ndim != 1:
        raise ValueError("fit_rate: ks and means must be matching 1-D arrays")
    if window is None:
        window = (ks.max() / 100.0, ks.max())
    k_lo, k_hi = float(window[0]), float(window[1])
    sel = (ks >= k_lo) & (ks <= k_hi)
    if not np.all(means[sel] > 0):
        raise ValueError("fit_rate: nonpositive metric values in the fit window")
    n = int(sel.sum())
    if n < 5:
        raise ValueError(f"fit_rate: only {n} points in window, need at least 5")
    lx = np.log(ks[sel])
    ly = np.log(means[sel])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float((resid**2).sum()) / ss_tot
    return RateFit(slope=float(slope), intercept=float(intercept),
                   r_squared=float(np.clip(r2, 0.0, 1.0)),
                   window=(k_lo, k_hi), n_points=n)
