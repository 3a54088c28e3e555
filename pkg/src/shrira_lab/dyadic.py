"""Sharp dyadic frequency projections Q_x^k, Q_y^k and P~_N.

Shell membership is decided with exact integer comparisons on |m| and |n|.
For ``N = 2^k`` with ``k >= 1`` the projection

    P~_N = Q~_x^k Q_y^k + Q~_y^(k-1) Q_x^k

keeps exactly the modes with ``2^(k-1) <= max(|m|, |n|) < 2^k``; ``P~_0``
keeps the zero mode.  ``P~_1`` is the zero operator: read literally, its
``k = 0`` formula would repeat ``P~_0`` and break the partition of Z^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral_core import SpectralField, l2_norm

__all__ = [
    "DyadicIndex",
    "dyadic_values",
    "q_x",
    "q_y",
    "q_x_tilde",
    "q_y_tilde",
    "p_n",
    "shell_mask",
    "shell_of",
    "equivalent_norm",
    "max_shell",
]


@dataclass(frozen=True, order=True)
class DyadicIndex:
    """An element of P = {0, 1, 2, 4, ...}, stored as (is_zero, k)."""

    is_zero: bool
    k: int = 0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"dyadic exponent must be >= 0, got {self.k}")
        if self.is_zero and self.k != 0:
            raise ValueError("the zero index carries k = 0")

    @classmethod
    def of(cls, value: "int | DyadicIndex") -> "DyadicIndex":
        if isinstance(value, DyadicIndex):
            return value
        v = int(value)
        if v != value:
            raise ValueError(f"{value!r} is not an integer")
        if v == 0:
            return cls(True, 0)
        if v < 0 or v & (v - 1):
            raise ValueError(f"{value!r} is not 0 or a power of two")
        return cls(False, v.bit_length() - 1)

    @property
    def value(self) -> int:
        return 0 if self.is_zero else 1 << self.k

    def __int__(self) -> int:
        return self.value


def max_shell(grid) -> int:
    """Largest admissible N on a grid: the half-band min(modes)/2."""
    return min(grid.modes_x, grid.modes_y) // 2


def dyadic_values(n_max: int) -> list[int]:
    """[0, 1, 2, 4, ..., n_max] for a power-of-two ``n_max``."""
    out = [0]
    v = 1
    while v <= n_max:
        out.append(v)
        v *= 2
    return out


def _band(a: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return a == 0
    return ((1 << (k - 1)) <= a) & (a < (1 << k))


def _below(a: np.ndarray, k: int) -> np.ndarray:
    if k < 0:
        return np.zeros(a.shape, dtype=bool)
    return a < (1 << k)


def _check_k(k: int) -> None:
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")


def q_x(f: SpectralField, k: int) -> SpectralField:
    _check_k(k)
    m, _ = f.grid.wavenumbers()
    return f.apply_multiplier(_band(np.abs(m), k))


def q_y(f: SpectralField, k: int) -> SpectralField:
    _check_k(k)
    _, n = f.grid.wavenumbers()
    return f.apply_multiplier(_band(np.abs(n), k))


def q_x_tilde(f: SpectralField, k: int) -> SpectralField:
    """Restriction to |m| < 2^k."""
    _check_k(k)
    m, _ = f.grid.wavenumbers()
    return f.apply_multiplier(_below(np.abs(m), k))


def q_y_tilde(f: SpectralField, k: int) -> SpectralField:
    _check_k(k)
    _, n = f.grid.wavenumbers()
    return f.apply_multiplier(_below(np.abs(n), k))


def shell_mask(grid, N: "int | DyadicIndex") -> np.ndarray:
    """Boolean support of P~_N on ``grid``."""
    idx = DyadicIndex.of(N)
    if idx.value > max_shell(grid):
        raise ValueError(f"N={idx.value} exceeds the grid half-band {max_shell(grid)}")
    m, n = grid.wavenumbers()
    am, an = np.abs(m), np.abs(n)
    if idx.is_zero:
        return (am == 0) & (an == 0)
    k = idx.k
    if k == 0:
        return np.zeros(grid.shape, dtype=bool)
    first = _below(am, k) & _band(an, k)
    second = _below(an, k - 1) & _band(am, k)
    return first | second


def p_n(f: SpectralField, N: "int | DyadicIndex") -> SpectralField:
    return f.apply_multiplier(shell_mask(f.grid, N))


def shell_of(m, n) -> np.ndarray:
    """Dyadic label N of each frequency: 0 at the origin, else 2^bitlen(max(|m|,|n|))."""
    r = np.maximum(np.abs(np.asarray(m)), np.abs(np.asarray(n))).astype(np.int64)
    out = np.zeros(r.shape, dtype=np.int64)
    nz = r > 0
    # frexp is exact on integers: r = mant * 2^e with e = bit_length(r)
    _, e = np.frexp(r[nz].astype(float))
    out[nz] = np.left_shift(1, e.astype(np.int64))
    return out


def equivalent_norm(f: SpectralField, s: float) -> float:
    """(sum_N (1 v N)^(2s) ||P~_N f||^2)^(1/2) with the l^2 coefficient norm."""
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    m, n = f.grid.wavenumbers()
    labels = np.maximum(shell_of(m, n), 1).astype(float)
    w = labels ** (2.0 * s)
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def shell_norms(f: SpectralField) -> dict[int, float]:
    """||P~_N f|| for every admissible N on the field's grid."""
    return {N: l2_norm(p_n(f, N)) for N in dyadic_values(max_shell(f.grid))}
