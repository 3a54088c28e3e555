"""Frequency mollification of initial data and two experiments built on it."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import spectral_core as sc
from .cutoffs import rho_tilde
from .estimates import ProbeReport, _row, _slope_dict
from .solver import SolveConfig, solve_ivp
from .spectral_core import GridSpec, SpectralField

__all__ = [
    "mollifier_symbol",
    "mollify",
    "tail_bound",
    "synthetic_data",
    "convergence_experiment",
    "flow_continuity_probe",
]


def mollifier_symbol(grid: GridSpec, n: int) -> np.ndarray:
    """rho~(m/n, k/n) on the grid: 1 for |(m, k)| <= n/2, 0 for |(m, k)| >= n."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    m, k = grid.wavenumbers()
    return rho_tilde(m / n, k / n)


def mollify(w0: SpectralField, n: int) -> SpectralField:
    return w0.apply_multiplier(mollifier_symbol(w0.grid, n))


def tail_bound(w0: SpectralField, s: float, n: int) -> float:
    """H^s norm of the part of w0 at radius >= n/2, which bounds ||mollify(w0, n) - w0||_{H^s}."""
    m, k = w0.grid.wavenumbers()
    outside = 4 * (m * m + k * k) >= n * n
    return sc.sobolev_norm(w0.apply_multiplier(outside), s)


def synthetic_data(grid: GridSpec, s_data: float, seed: int) -> SpectralField:
    """Real field with |coefficient| = (1 + m^2 + n^2)^(-(s_data + 1)/2) and random phases.

    Its H^s tail beyond radius R decays like R^-(s_data - s).
    """
    rng = np.random.default_rng(seed)
    phase = np.exp(2j * np.pi * rng.random(grid.shape))
    c = sc.bessel_weight(grid, -(s_data + 1.0)) * phase
    c[grid.nyquist_mask()] = 0.0
    # Hermitian completion that keeps the modulus exact.
    herm = sc._conj_flip(c)
    m, k = grid.wavenumbers()
    upper = (m > 0) | ((m == 0) & (k > 0))
    c = np.where(upper, c, herm)
    c[0, 0] = abs(c[0, 0])
    return SpectralField.from_coeffs(grid, c)


def convergence_experiment(
    w0: SpectralField,
    s: float,
    s_data: float,
    n_list: Sequence[int],
    rel_tol: float = 0.15,
    fit: bool = True,
) -> ProbeReport:
    """||mollify(w0, n) - w0||_{H^s} over ``n_list``, each row compared with :func:`tail_bound`.

    With ``fit`` the log-log slope against n is checked to lie within
    ``rel_tol`` (relative) of -(s_data - s), which is the rate for data of
    exact decay (1 + m^2 + n^2)^(-(s_data + 1)/2).  The fitted constant is
    the largest error / tail-bound ratio, so it can never exceed 1.
    """
    if s_data <= s:
        raise ValueError(f"s_data must exceed s, got s_data={s_data}, s={s}")
    rows = []
    for n in n_list:
        err = sc.sobolev_norm(mollify(w0, int(n)) - w0, s)
        rows.append(_row({"n": int(n)}, err, tail_bound(w0, s, int(n))))
    expected = -(s_data - s)
    slope = None
    floor = ceil_ = None
    pts = [(r["input"]["n"], r["lhs"]) for r in rows if r["lhs"] > 0]
    if fit and len(pts) >= 3:
        slope = _slope_dict(pts)
        slope["expected"] = expected
        floor = expected * (1 + rel_tol)
        ceil_ = expected * (1 - rel_tol)
    errors = [r["lhs"] for r in rows]
    monotone = all(b <= a for a, b in zip(errors, errors[1:]))
    return ProbeReport(
        "bona_smith_convergence",
        rows,
        max((r["ratio"] for r in rows), default=0.0),
        1.0,
        slope_fit=slope,
        slope_ceiling=ceil_,
        slope_floor=floor,
        extra={"s": s, "s_data": s_data, "errors": errors, "monotone": monotone},
    )


def flow_continuity_probe(
    u0: SpectralField,
    s: float,
    delta_list: Sequence[float],
    cfg: SolveConfig,
    seed: int = 0,
    ceiling: float = math.inf,
) -> ProbeReport:
    """sup_t ||u(t; u0 + delta p) - u(t; u0)||_{H^s} / delta for a random unit perturbation p.

    ``p`` is smooth, x-mean-zero, inside the dealiasing band and has
    ||p||_{H^s} = 1.  The ratio is reported (0 at delta = 0); no modulus of
    continuity is asserted.
    """
    grid = u0.grid
    rng = np.random.default_rng(seed)
    p = sc.random_field(grid, s + 2.0, rng, mean_zero_x=True, band=grid.dealias_mask())
    norm = sc.sobolev_norm(p, s)
    if norm == 0:
        raise ValueError("grid too small to carry a perturbation")
    p = p * (1.0 / norm)
    base = solve_ivp(u0, cfg)
    rows = []
    for d in delta_list:
        if d == 0:
            rows.append(_row({"delta": 0.0}, 0.0, 0.0))
            continue
        pert = solve_ivp(u0 + p * float(d), cfg)
        sup = max(sc.sobolev_norm(a - b, s) for a, b in zip(pert.states, base.states))
        rows.append(_row({"delta": float(d)}, sup, abs(float(d))))
    return ProbeReport(
        "flow_continuity",
        rows,
        max((r["ratio"] for r in rows), default=0.0),
        ceiling,
        rng_seed=seed,
        extra={"s": s},
    )
