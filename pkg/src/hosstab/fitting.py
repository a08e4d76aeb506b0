"""Exponential decay-rate estimation by log-linear least squares."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class DecayFit:
    """gamma and amplitude of the model ``amp * exp(-gamma t)`` on a window."""

    t_lo: float
    t_hi: float
    gamma: float
    amplitude: float
    residual: float

    def as_dict(self) -> dict:
        return {
            "window": [self.t_lo, self.t_hi],
            "gamma": self.gamma,
            "amplitude": self.amplitude,
            "residual": self.residual,
        }


def fit_decay(times: np.ndarray, norms: np.ndarray,
              window: tuple[float, float] | None = None) -> DecayFit:
    """Least-squares line through (t, log norm); gamma is minus the slope.

    The window defaults to the middle half of the horizon (skips the
    transient).  Requires at least 10 samples, all positive.
    """
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if window is None:
        T = times[-1]
        window = (0.25 * T, 0.75 * T)
    lo, hi = window
    if not lo < hi:
        raise ConfigError(f"bad fit window [{lo}, {hi}]")
    mask = (times >= lo) & (times <= hi)
    if mask.sum() < 10:
        raise ConfigError(f"fit window [{lo}, {hi}] holds {int(mask.sum())} samples (< 10)")
    sel = norms[mask]
    if np.any(sel <= 0.0):
        raise ConfigError("nonpositive norms inside the fit window (exact zero data?)")
    ts = times[mask]
    A = np.column_stack([ts, np.ones_like(ts)])
    sol, res, *_ = np.linalg.lstsq(A, np.log(sel), rcond=None)
    slope, intercept = sol
    residual = float(np.sqrt(res[0] / mask.sum())) if res.size else 0.0
    return DecayFit(t_lo=float(lo), t_hi=float(hi), gamma=float(-slope),
                    amplitude=float(np.exp(intercept)), residual=residual)
