"""Free dispersive group W(t) and the Duhamel step for w_t + H Lap w + d_x F = 0."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .spectral_core import GridSpec, SpectralField, partial_x

__all__ = ["dispersion_symbol", "propagator_symbol", "propagate", "duhamel_step"]


def dispersion_symbol(grid: GridSpec) -> np.ndarray:
    """omega(m, n) = sgn(m) (m^2 + n^2); W(t) multiplies by exp(-i t omega)."""
    m, n = grid.wavenumbers()
    return (np.sign(m) * (m * m + n * n)).astype(float)


def propagator_symbol(grid: GridSpec, t: float) -> np.ndarray:
    return np.exp(-1j * t * dispersion_symbol(grid))


def propagate(u0: SpectralField, t: float) -> SpectralField:
    """W(t) u0.  The m = 0 row is a fixed point (sgn(0) = 0)."""
    if t == 0:
        return u0
    return u0.apply_multiplier(propagator_symbol(u0.grid, t))


def duhamel_step(
    w: SpectralField,
    forcing: Callable[[float], SpectralField],
    t0: float,
    t1: float,
    quadrature_nodes: int = 8,
) -> SpectralField:
    """w(t1) = W(t1 - t0) w(t0) - int_{t0}^{t1} W(t1 - s) d_x F(s) ds.

    ``forcing(s)`` returns F(s).  The integral uses a single Gauss-Legendre
    panel with ``quadrature_nodes`` nodes, exact when the integrand
    W(t1 - s) d_x F(s) is a polynomial in s of degree < 2 * nodes.
    """
    if not t1 > t0:
        raise ValueError(f"duhamel_step needs t1 > t0, got t0={t0}, t1={t1}")
    if quadrature_nodes < 1:
        raise ValueError("quadrature_nodes must be >= 1")
    x, wts = np.polynomial.legendre.leggauss(quadrature_nodes)
    half = 0.5 * (t1 - t0)
    omega = dispersion_symbol(w.grid)
    acc = np.zeros(w.grid.shape, dtype=np.complex128)
    real = w.real
    for xi, wi in zip(x, wts):
        s = t0 + half * (xi + 1.0)
        fs = partial_x(forcing(s))
        if fs.grid.shape != w.grid.shape:
            raise ValueError("forcing lives on a different grid")
        real = real and fs.real
        acc += wi * np.exp(-1j * (t1 - s) * omega) * fs.coeffs
    out = propagate(w, t1 - t0).coeffs - half * acc
    out.setflags(write=False)
    return SpectralField(w.grid, out, real)
