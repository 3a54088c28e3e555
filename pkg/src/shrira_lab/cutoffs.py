"""Smooth cutoffs: the even bump psi0 and the radial mollifier profile rho.

Both are built from the exponential spline h(t) = exp(-1/t) (t > 0), which
gives a C-infinity step rising from 0 at u = 0 to 1 at u = 1.
"""

from __future__ import annotations

import numpy as np

__all__ = ["smooth_step", "psi0", "rho", "rho_tilde"]


def _h(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t, dtype=float)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(u) -> np.ndarray:
    """0 for u <= 0, 1 for u >= 1, C-infinity and increasing in between."""
    u = np.asarray(u, dtype=float)
    a = _h(u)
    b = _h(1.0 - u)
    return a / (a + b)


def psi0(x) -> np.ndarray:
    """Even bump: 1 on [-1, 1], 0 outside (-2, 2), values in [0, 1]."""
    return smooth_step(2.0 - np.abs(np.asarray(x, dtype=float)))


def rho(r) -> np.ndarray:
    """Profile with rho = 1 on [0, 1/2] and rho = 0 on [1, inf)."""
    return psi0(2.0 * np.asarray(r, dtype=float))


def rho_tilde(x, y) -> np.ndarray:
    return rho(np.hypot(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))
