"""Fourier-space fields on the torus T^2 = R^2 / (2 pi Z)^2.

A field is stored as its truncated Fourier coefficients

    f(x, y) = sum_{m, n} g(m, n) exp(i (m x + n y)),
    g(m, n) = (2 pi)^-2 int int f(x, y) exp(-i (m x + n y)) dx dy,

so the H^s norm is literally the weighted l2 norm of the coefficient array.
Coefficient arrays use numpy's FFT ordering along both axes (index ``i``
holds ``m = i`` for ``i < M/2`` and ``m = i - M`` otherwise).  All operators
here are pure: they return new fields and never touch their inputs.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np
import scipy.fft as sfft

__all__ = [
    "GridSpec",
    "SpectralField",
    "SymmetryError",
    "GridMismatchError",
    "synthesize",
    "zeros",
    "to_physical",
    "from_physical",
    "hilbert_x",
    "laplacian",
    "partial_x",
    "partial_y",
    "bessel_potential",
    "sobolev_norm",
    "l2_norm",
    "inner",
    "linf_norm",
    "grad_linf_norm",
    "product",
    "product_exact",
    "dealias",
    "resample",
    "x_mean_zero",
    "random_field",
]

HERMITIAN_RTOL = 1e-12


class SymmetryError(ValueError):
    """Coefficients of a real field violate g(-m, -n) = conj(g(m, n))."""


class GridMismatchError(ValueError):
    """Two fields combined by a binary operation live on different grids."""


def _fft_workers() -> int:
    env = os.environ.get("SHRIRA_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _is_pow2(v: int) -> bool:
    return v > 0 and (v & (v - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Discretization of T^2 by ``modes_x`` x ``modes_y`` Fourier modes.

    ``oversample`` is the zero-padding factor used whenever a field is
    evaluated on the collocation grid for an L^inf norm.
    """

    modes_x: int
    modes_y: int
    oversample: int = 4
    normalization: str = "unit-coefficient"

    def __post_init__(self):
        for name in ("modes_x", "modes_y"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not _is_pow2(int(v)) or v < 2:
                raise ValueError(f"{name} must be a power of two >= 2, got {v!r}")
        if int(self.oversample) < 1:
            raise ValueError(f"oversample must be >= 1, got {self.oversample!r}")
        if self.normalization != "unit-coefficient":
            raise ValueError(f"unknown normalization {self.normalization!r}")

    @classmethod
    def square(cls, modes: int, oversample: int = 4) -> "GridSpec":
        return cls(modes, modes, oversample)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.modes_x, self.modes_y)

    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer frequency arrays ``(m, n)`` broadcast to the coefficient shape."""
        return _wavenumbers(self.modes_x, self.modes_y)

    def index(self, m: int, n: int) -> tuple[int, int]:
        """Array index of frequency (m, n); raises on out-of-range indices."""
        if not (-self.modes_x // 2 <= m < self.modes_x // 2):
            raise ValueError(f"frequency m={m} outside [-{self.modes_x // 2}, {self.modes_x // 2})")
        if not (-self.modes_y // 2 <= n < self.modes_y // 2):
            raise ValueError(f"frequency n={n} outside [-{self.modes_y // 2}, {self.modes_y // 2})")
        return (m % self.modes_x, n % self.modes_y)

    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: |m| < modes_x/3 and |n| < modes_y/3."""
        m, n = self.wavenumbers()
        return (3 * np.abs(m) < self.modes_x) & (3 * np.abs(n) < self.modes_y)

    def nyquist_mask(self) -> np.ndarray:
        m, n = self.wavenumbers()
        return (m == -self.modes_x // 2) | (n == -self.modes_y // 2)

    def enlarged(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.modes_x * factor, self.modes_y * factor, self.oversample)


@lru_cache(maxsize=64)
def _wavenumbers(mx: int, my: int) -> tuple[np.ndarray, np.ndarray]:
    m = np.fft.fftfreq(mx, 1.0 / mx).astype(np.int64)
    n = np.fft.fftfreq(my, 1.0 / my).astype(np.int64)
    mm, nn = np.meshgrid(m, n, indexing="ij")
    mm.setflags(write=False)
    nn.setflags(write=False)
    return mm, nn


def _conj_flip(c: np.ndarray) -> np.ndarray:
    """Array whose (m, n) entry is conj(c(-m, -n))."""
    return np.conj(np.roll(c[..., ::-1, ::-1], 1, axis=(-2, -1)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Immutable truncated Fourier series on a :class:`GridSpec`.

    Build instances with :meth:`from_coeffs` or :func:`synthesize`; the plain
    constructor trusts its arguments and is reserved for operators that
    already preserve the invariants.
    """

    grid: GridSpec
    coeffs: np.ndarray
    real: bool = True

    @classmethod
    def from_coeffs(cls, grid: GridSpec, coeffs, real: bool = True) -> "SpectralField":
        c = np.array(coeffs, dtype=np.complex128)
        if c.shape != grid.shape:
            raise ValueError(f"coefficient shape {c.shape} does not match grid {grid.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        if real:
            c[grid.nyquist_mask()] = 0.0
            partner = _conj_flip(c)
            scale = max(float(np.max(np.abs(c))), 1e-300)
            if np.max(np.abs(c - partner)) > HERMITIAN_RTOL * scale:
                raise SymmetryError("coefficients are not Hermitian-symmetric")
            c = 0.5 * (c + partner)
        c.setflags(write=False)
        return cls(grid, c, bool(real))

    def _wrap(self, c: np.ndarray, real: bool | None = None) -> "SpectralField":
        c.setflags(write=False)
        return SpectralField(self.grid, c, self.real if real is None else real)

    def coefficient(self, m: int, n: int) -> complex:
        return complex(self.coeffs[self.grid.index(m, n)])

    def _check(self, other: "SpectralField") -> None:
        if self.grid.shape != other.grid.shape:
            raise GridMismatchError(f"grid {self.grid.shape} vs {other.grid.shape}")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return self._wrap(self.coeffs + other.coeffs, self.real and other.real)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return self._wrap(self.coeffs - other.coeffs, self.real and other.real)

    def __neg__(self) -> "SpectralField":
        return self._wrap(-self.coeffs)

    def __mul__(self, scalar) -> "SpectralField":
        if isinstance(scalar, SpectralField):
            raise TypeError("use product(f, g, dealias=...) for field products")
        real = self.real and np.isreal(scalar)
        return self._wrap(self.coeffs * scalar, bool(real))

    __rmul__ = __mul__

    def apply_multiplier(self, symbol: np.ndarray, real: bool | None = None) -> "SpectralField":
        """Multiply coefficients by ``symbol`` (an array over the grid)."""
        return self._wrap(self.coeffs * symbol, real)

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.coeffs - _conj_flip(self.coeffs))))


def zeros(grid: GridSpec, real: bool = True) -> SpectralField:
    c = np.zeros(grid.shape, dtype=np.complex128)
    c.setflags(write=False)
    return SpectralField(grid, c, real)


def synthesize(
    coeff_list: Mapping[tuple[int, int], complex] | Iterable[tuple[tuple[int, int], complex]],
    grid: GridSpec,
    real: bool = True,
) -> SpectralField:
    """Field with exactly the listed coefficients and zeros elsewhere.

    For real fields a missing Hermitian partner is filled in; a supplied
    partner that disagrees raises :class:`SymmetryError`.
    """
    items = list(coeff_list.items()) if isinstance(coeff_list, Mapping) else list(coeff_list)
    given: dict[tuple[int, int], complex] = {}
    for (m, n), value in items:
        key = (int(m), int(n))
        if key in given:
            raise ValueError(f"duplicate coefficient for {key}")
        grid.index(*key)
        given[key] = complex(value)

    c = np.zeros(grid.shape, dtype=np.complex128)
    for (m, n), value in given.items():
        c[grid.index(m, n)] = value
    if real:
        for (m, n), value in given.items():
            if m == -grid.modes_x // 2 or n == -grid.modes_y // 2:
                raise ValueError(f"frequency ({m}, {n}) is a Nyquist mode; real fields keep those at zero")
            partner = (-m, -n)
            want = value.conjugate()
            if partner in given:
                if abs(given[partner] - want) > HERMITIAN_RTOL * max(abs(value), 1e-300):
                    raise SymmetryError(f"coefficient {partner} must equal conj of {(m, n)}")
            else:
                c[grid.index(*partner)] = want
    c.setflags(write=False)
    return SpectralField(grid, c, real)


def _padded(c: np.ndarray, px: int, py: int) -> np.ndarray:
    """Embed FFT-ordered coefficients (last two axes) into a larger px x py array."""
    mx, my = c.shape[-2:]
    if (px, py) == (mx, my):
        return c
    out = np.zeros(c.shape[:-2] + (px, py), dtype=np.complex128)
    hx, hy = mx // 2, my // 2
    rows = np.r_[0:hx, px - hx:px]
    cols = np.r_[0:hy, py - hy:py]
    out[..., rows[:, None], cols[None, :]] = c
    return out


def _truncated(c: np.ndarray, mx: int, my: int) -> np.ndarray:
    """Inverse of :func:`_padded`: keep frequencies in [-mx/2, mx/2) x [-my/2, my/2)."""
    px, py = c.shape[-2:]
    hx, hy = mx // 2, my // 2
    rows = np.r_[0:hx, px - hx:px]
    cols = np.r_[0:hy, py - hy:py]
    return c[..., rows[:, None], cols[None, :]]


def _evaluate(c: np.ndarray, px: int, py: int, real: bool) -> np.ndarray:
    """Samples of the series with coefficients ``c`` on a px x py grid."""
    big = _padded(c, px, py)
    if real:
        return sfft.irfft2(big[..., : py // 2 + 1], s=(px, py), norm="forward", workers=_fft_workers())
    return sfft.ifft2(big, norm="forward", workers=_fft_workers())


def to_physical(f: SpectralField, oversample: int | None = None) -> np.ndarray:
    """Samples on the ``(oversample*modes_x) x (oversample*modes_y)`` grid.

    Node ``(j, k)`` sits at ``x_j = 2 pi j / (oversample*modes_x)`` and likewise
    for ``y``.  Only real fields are accepted.
    """
    if not f.real:
        raise ValueError("to_physical requires a real field (real=True)")
    os_ = f.grid.oversample if oversample is None else int(oversample)
    if os_ < 1:
        raise ValueError(f"oversample must be >= 1, got {os_}")
    return _evaluate(f.coeffs, os_ * f.grid.modes_x, os_ * f.grid.modes_y, True)


def from_physical(values: np.ndarray, grid: GridSpec) -> SpectralField:
    """Real field interpolating ``values`` on the un-oversampled collocation grid."""
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise ValueError(f"expected samples of shape {grid.shape}, got {values.shape}")
    c = sfft.fft2(values, norm="forward")
    c[grid.nyquist_mask()] = 0.0
    c = 0.5 * (c + _conj_flip(c))
    c.setflags(write=False)
    return SpectralField(grid, c, True)


def _sgn_m(grid: GridSpec) -> np.ndarray:
    m, _ = grid.wavenumbers()
    return np.sign(m)


def hilbert_x(f: SpectralField) -> SpectralField:
    """Hilbert transform in x: multiplier -i sgn(m), zero on the m = 0 row."""
    return f.apply_multiplier(-1j * _sgn_m(f.grid))


def laplacian(f: SpectralField) -> SpectralField:
    m, n = f.grid.wavenumbers()
    return f.apply_multiplier(-(m * m + n * n).astype(float))


def partial_x(f: SpectralField) -> SpectralField:
    m, _ = f.grid.wavenumbers()
    return f.apply_multiplier(1j * m)


def partial_y(f: SpectralField) -> SpectralField:
    _, n = f.grid.wavenumbers()
    return f.apply_multiplier(1j * n)


def bessel_weight(grid: GridSpec, s: float) -> np.ndarray:
    """(1 + m^2 + n^2)^(s/2) over the grid."""
    m, n = grid.wavenumbers()
    return (1.0 + m * m + n * n) ** (0.5 * s)


def bessel_potential(f: SpectralField, s: float) -> SpectralField:
    """J^s: multiplier (1 + m^2 + n^2)^(s/2).  Negative s is allowed."""
    if s == 0:
        return f
    return f.apply_multiplier(bessel_weight(f.grid, s))


def sobolev_norm(f: SpectralField, s: float) -> float:
    """||f||_{H^s} = || g(m, n) (1 + m^2 + n^2)^(s/2) ||_{l^2}."""
    if s < 0:
        raise ValueError(f"sobolev_norm needs s >= 0, got {s}; use bessel_potential + l2_norm")
    a2 = np.abs(f.coeffs) ** 2
    if s == 0:
        return float(np.sqrt(a2.sum()))
    return float(np.sqrt(np.sum(a2 * bessel_weight(f.grid, 2 * s))))


def l2_norm(f: SpectralField) -> float:
    """l^2 norm of the coefficients (the L^2 norm divided by 2 pi)."""
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))


def inner(f: SpectralField, g: SpectralField) -> complex:
    """sum g_f(m, n) conj(g_g(m, n)); equals (2 pi)^-2 times the L^2 pairing."""
    f._check(g)
    return complex(np.vdot(g.coeffs, f.coeffs))


def linf_norm(f: SpectralField, oversample: int | None = None) -> float:
    """Maximum modulus on the oversampled collocation grid.

    This is a lower bound for the true supremum; it converges as the
    oversampling factor grows, slowly only for content near the Nyquist band.
    """
    os_ = f.grid.oversample if oversample is None else int(oversample)
    vals = _evaluate(f.coeffs, os_ * f.grid.modes_x, os_ * f.grid.modes_y, f.real)
    return float(np.max(np.abs(vals)))


def grad_linf_norm(f: SpectralField, oversample: int | None = None) -> float:
    """sup |grad f| (Euclidean length) on the oversampled grid."""
    if not f.real:
        raise ValueError("grad_linf_norm requires a real field")
    os_ = f.grid.oversample if oversample is None else int(oversample)
    m, n = f.grid.wavenumbers()
    px, py = os_ * f.grid.modes_x, os_ * f.grid.modes_y
    both = np.stack([1j * m * f.coeffs, 1j * n * f.coeffs])
    ux, uy = _evaluate(both, px, py, True)
    return float(np.sqrt(np.max(ux * ux + uy * uy)))


def dealias(f: SpectralField) -> SpectralField:
    """Zero every mode outside the 2/3-rule band."""
    return f.apply_multiplier(f.grid.dealias_mask())


def _product_coeffs(a: np.ndarray, b: np.ndarray, real: bool) -> np.ndarray:
    mx, my = a.shape
    if real:
        w = _fft_workers()
        pa = sfft.irfft2(a[:, : my // 2 + 1], s=(mx, my), norm="forward", workers=w)
        pb = pa if b is a else sfft.irfft2(b[:, : my // 2 + 1], s=(mx, my), norm="forward", workers=w)
        half = sfft.rfft2(pa * pb, norm="forward", workers=w)
        full = np.empty((mx, my), dtype=np.complex128)
        full[:, : my // 2 + 1] = half
        # Columns n < 0 from Hermitian symmetry.
        neg = half[:, 1 : my // 2][:, ::-1]
        full[:, my // 2 + 1 :] = np.conj(np.roll(neg[::-1, :], 1, axis=0))
        return full
    pa = sfft.ifft2(a, norm="forward")
    pb = pa if b is a else sfft.ifft2(b, norm="forward")
    return sfft.fft2(pa * pb, norm="forward")


def product(f: SpectralField, g: SpectralField, dealias: bool = True) -> SpectralField:
    """Pseudospectral product on the field's own grid.

    With ``dealias`` both factors and the result are cut to the 2/3-rule band,
    which makes the quadratic product alias-free: the result equals the exact
    convolution of the cut factors, cut again.
    """
    f._check(g)
    grid = f.grid
    real = f.real and g.real
    a, b = f.coeffs, g.coeffs
    same = a is b
    if dealias:
        mask = grid.dealias_mask()
        a = a * mask
        b = a if same else b * mask
    c = _product_coeffs(a, b, real)
    if dealias:
        c *= grid.dealias_mask()
    elif real:
        c[grid.nyquist_mask()] = 0.0
    c.setflags(write=False)
    return SpectralField(grid, c, real)


def resample(f: SpectralField, grid: GridSpec) -> SpectralField:
    """Same trigonometric polynomial on another grid (zero-pad or truncate)."""
    mx, my = grid.shape
    if (mx, my) == f.grid.shape:
        return SpectralField(grid, f.coeffs, f.real)
    if mx >= f.grid.modes_x and my >= f.grid.modes_y:
        c = _padded(f.coeffs, mx, my)
    elif mx <= f.grid.modes_x and my <= f.grid.modes_y:
        c = _truncated(f.coeffs, mx, my).copy()
    else:
        raise ValueError("resample needs both dimensions to grow or both to shrink")
    if f.real:
        c[grid.nyquist_mask()] = 0.0
    c.setflags(write=False)
    return SpectralField(grid, c, f.real)


def product_exact(f: SpectralField, g: SpectralField) -> SpectralField:
    """Exact product, returned on the 2x enlarged grid where it is representable."""
    f._check(g)
    big = f.grid.enlarged(2)
    return product(resample(f, big), resample(g, big), dealias=False)


def x_mean_zero(f: SpectralField, rtol: float = 1e-14) -> bool:
    """True iff every coefficient on the m = 0 row vanishes (relative to ||f||)."""
    row = f.coeffs[0, :]
    scale = l2_norm(f)
    if scale == 0.0:
        return True
    return bool(np.max(np.abs(row)) <= rtol * scale)


def random_field(
    grid: GridSpec,
    sigma: float,
    rng: np.random.Generator,
    *,
    real: bool = True,
    mean_zero_x: bool = False,
    band: np.ndarray | None = None,
) -> SpectralField:
    """Complex Gaussian coefficients with radial decay (1 + m^2 + n^2)^(-sigma/2).

    Real fields are Hermitian-symmetrized.  ``band`` is an optional boolean
    mask of allowed modes; ``mean_zero_x`` clears the m = 0 row.
    """
    z = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    c = z * bessel_weight(grid, -sigma) / np.sqrt(2.0)
    if band is not None:
        c = c * band
    if mean_zero_x:
        c[0, :] = 0.0
    if real:
        c[grid.nyquist_mask()] = 0.0
        c = 0.5 * (c + _conj_flip(c))
    c.setflags(write=False)
    return SpectralField(grid, c, real)
