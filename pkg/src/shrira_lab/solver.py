"""Time integration of u_t + H Lap u + u u_x = 0 on T^2.

The linear part is handled exactly through the multiplier of W(t); the
nonlinearity is always evaluated in divergence form -(1/2) d_x (u^2), which
leaves the whole m = 0 row of the coefficient array untouched.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from . import spectral_core as sc
from .propagator import dispersion_symbol
from .spectral_core import GridSpec, SpectralField

__all__ = [
    "SolveConfig",
    "Trajectory",
    "BlowUpError",
    "rhs_nonlinear",
    "step",
    "solve_ivp",
    "existence_time",
    "max_active_m",
]

SCHEMA = "shrira-lab/trajectory-v1"


class BlowUpError(FloatingPointError):
    """Raised when the solution becomes non-finite or exceeds the L^inf ceiling."""

    def __init__(self, time: float, reason: str):
        super().__init__(f"blow-up at t={time:.6g}: {reason}")
        self.time = time
        self.reason = reason


@dataclass(frozen=True)
class SolveConfig:
    dt: float
    T: float
    integrator: Literal["IFRK4", "STRANG"] = "IFRK4"
    dealias: bool = True
    s: float = 2.0
    record_stride: int = 1
    c_cfl: float = 0.5
    blowup_ceiling: float = 1e6
    # Test hook: drop the nonlinear term entirely.
    nonlinear: bool = True

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive and finite, got {self.dt}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"horizon T must be positive and finite, got {self.T}")
        if self.dt > self.T * (1 + 1e-12):
            raise ValueError(f"dt={self.dt} exceeds horizon T={self.T}")
        if self.integrator not in ("IFRK4", "STRANG"):
            raise ValueError(f"integrator must be IFRK4 or STRANG, got {self.integrator!r}")
        if self.record_stride < 1:
            raise ValueError(f"record_stride must be >= 1, got {self.record_stride}")
        if self.c_cfl <= 0:
            raise ValueError(f"c_cfl must be positive, got {self.c_cfl}")

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil(self.T / self.dt - 1e-9))

    @property
    def step_size(self) -> float:
        """Actual step: T divided evenly so the run lands on the horizon."""
        return self.T / self.n_steps


@dataclass
class Trajectory:
    times: list[float]
    states: list[SpectralField]
    diagnostics: dict[str, list[float]]
    config: SolveConfig | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")

    @property
    def grid(self) -> GridSpec:
        return self.states[0].grid

    def to_json_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "config": asdict(self.config) if self.config else None,
            "grid": list(self.grid.shape),
            "times": list(self.times),
            "diagnostics": {k: list(v) for k, v in self.diagnostics.items()},
            "meta": self.meta,
        }

    def export(self, run_dir: str | os.PathLike) -> None:
        """Write ``trajectory.json`` and ``snapshots/state_#####.spf2``."""
        from .spf2 import save_field

        os.makedirs(os.path.join(run_dir, "snapshots"), exist_ok=True)
        for i, st in enumerate(self.states):
            save_field(st, os.path.join(run_dir, "snapshots", f"state_{i:05d}.spf2"))
        with open(os.path.join(run_dir, "trajectory.json"), "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)


def max_active_m(grid: GridSpec, dealias: bool) -> int:
    """Largest |m| the nonlinear term can see."""
    if dealias:
        return (grid.modes_x - 1) // 3
    return grid.modes_x // 2 - 1


class _Kernel:
    """Array-level pieces of the right-hand side, cached per grid and config."""

    def __init__(self, grid: GridSpec, dealias: bool, nonlinear: bool):
        self.grid = grid
        self.dealias = dealias
        self.nonlinear = nonlinear
        m, _ = grid.wavenumbers()
        self.dx_half = -0.5j * m
        self.mask = grid.dealias_mask() if dealias else ~grid.nyquist_mask()
        self.omega = dispersion_symbol(grid)

    def rhs(self, c: np.ndarray, real: bool) -> np.ndarray:
        if not self.nonlinear:
            return np.zeros_like(c)
        a = c * self.mask
        sq = sc._product_coeffs(a, a, real)
        sq *= self.mask
        return self.dx_half * sq

    def linear(self, h: float) -> np.ndarray:
        return np.exp(-1j * h * self.omega)


def rhs_nonlinear(u: SpectralField, dealias: bool = True) -> SpectralField:
    """-(1/2) d_x (u^2), with the product dealiased by default."""
    sq = sc.product(u, u, dealias=dealias)
    return sc.partial_x(sq) * -0.5


def _ifrk4(k: _Kernel, c: np.ndarray, h: float, real: bool) -> np.ndarray:
    E = k.linear(h)
    Eh = k.linear(0.5 * h)
    k1 = k.rhs(c, real)
    k2 = k.rhs(Eh * (c + 0.5 * h * k1), real)
    Ehc = Eh * c
    k3 = k.rhs(Ehc + 0.5 * h * k2, real)
    k4 = k.rhs(E * c + h * (Eh * k3), real)
    return E * c + (h / 6.0) * (E * k1 + 2.0 * Eh * (k2 + k3) + k4)


def _strang(k: _Kernel, c: np.ndarray, h: float, real: bool) -> np.ndarray:
    Eh = k.linear(0.5 * h)
    v = Eh * c
    if k.nonlinear:
        k1 = k.rhs(v, real)
        k2 = k.rhs(v + 0.5 * h * k1, real)
        k3 = k.rhs(v + 0.5 * h * k2, real)
        k4 = k.rhs(v + h * k3, real)
        v = v + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return Eh * v


_STEPPERS = {"IFRK4": _ifrk4, "STRANG": _strang}


def _advance(k: _Kernel, c: np.ndarray, h: float, real: bool, integrator: str, t_end: float) -> np.ndarray:
    out = _STEPPERS[integrator](k, c, h, real)
    if not np.all(np.isfinite(out)):
        raise BlowUpError(t_end, "non-finite coefficient")
    return out


def step(u: SpectralField, dt: float, cfg: SolveConfig, t: float = 0.0) -> SpectralField:
    """One step of size ``dt`` from time ``t`` (IFRK4: order 4, STRANG: order 2)."""
    k = _Kernel(u.grid, cfg.dealias, cfg.nonlinear)
    c = _advance(k, u.coeffs, dt, u.real, cfg.integrator, t + dt)
    c.setflags(write=False)
    return SpectralField(u.grid, c, u.real)


def _diagnose(u: SpectralField, s: float) -> dict[str, float]:
    return {
        "l2": sc.l2_norm(u),
        "hs": sc.sobolev_norm(u, s),
        "linf": sc.linf_norm(u),
        "grad_linf": sc.grad_linf_norm(u) if u.real else float("nan"),
        "xmean_residual": float(np.max(np.abs(u.coeffs[0, :]))),
    }


def solve_ivp(u0: SpectralField, cfg: SolveConfig) -> Trajectory:
    """Integrate from ``u0`` to ``cfg.T``, recording every ``record_stride`` steps.

    The final time is always recorded.  Data with a nonzero x-mean trigger a
    warning only; the discrete system is well defined either way.
    """
    if not sc.x_mean_zero(u0):
        warnings.warn("initial datum does not have zero x-mean on every line y = const", stacklevel=2)
    h = cfg.step_size
    if cfg.nonlinear:
        amp = sc.linf_norm(u0)
        mmax = max_active_m(u0.grid, cfg.dealias)
        if amp > 0 and h > cfg.c_cfl / (mmax * amp):
            raise ValueError(
                f"dt={h:.4g} violates the advective bound c_cfl/(max|m| |u|_inf) = "
                f"{cfg.c_cfl / (mmax * amp):.4g}"
            )

    k = _Kernel(u0.grid, cfg.dealias, cfg.nonlinear)
    times = [0.0]
    states = [u0]
    diag = {key: [val] for key, val in _diagnose(u0, cfg.s).items()}
    c = u0.coeffs
    n = cfg.n_steps
    for i in range(1, n + 1):
        t = i * h
        c = _advance(k, c, h, u0.real, cfg.integrator, t)
        # l1 of the coefficients bounds |u|_inf; only then pay for an FFT.
        if float(np.sum(np.abs(c))) > cfg.blowup_ceiling:
            amp = sc._evaluate(c, *[d * u0.grid.oversample for d in u0.grid.shape], u0.real)
            if float(np.max(np.abs(amp))) > cfg.blowup_ceiling:
                raise BlowUpError(t, f"|u|_inf exceeded {cfg.blowup_ceiling:g}")
        if i % cfg.record_stride == 0 or i == n:
            frozen = c.copy()
            frozen.setflags(write=False)
            st = SpectralField(u0.grid, frozen, u0.real)
            times.append(t)
            states.append(st)
            for key, val in _diagnose(st, cfg.s).items():
                diag[key].append(val)
    return Trajectory(times, states, diag, cfg)


def existence_time(u0: SpectralField, s: float, A_s: float) -> float:
    """T = (A_s ||u0||_{H^s} + 1)^(-2)."""
    if A_s < 0:
        raise ValueError(f"A_s must be >= 0, got {A_s}")
    return (A_s * sc.sobolev_norm(u0, s) + 1.0) ** -2
