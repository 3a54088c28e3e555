"""SPF2 binary field format.

Layout (little-endian)::

    b"SPF2" | u32 modes_x | u32 modes_y | u8 real_flag |
    modes_x * modes_y * (f64 re, f64 im)

Coefficients are row-major over m (from -modes_x/2 ascending), then n
(from -modes_y/2 ascending).
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .spectral_core import GridSpec, SpectralField

__all__ = ["MAGIC", "SPF2FormatError", "dumps", "loads", "save_field", "load_field"]

MAGIC = b"SPF2"
_HEADER = struct.Struct("<4sIIB")


class SPF2FormatError(ValueError):
    pass


def dumps(field: SpectralField) -> bytes:
    mx, my = field.grid.shape
    header = _HEADER.pack(MAGIC, mx, my, 1 if field.real else 0)
    centered = np.fft.fftshift(field.coeffs)
    body = np.ascontiguousarray(centered).astype("<c16", copy=False).tobytes()
    return header + body


def loads(data: bytes, oversample: int = 4) -> SpectralField:
    if len(data) < _HEADER.size:
        raise SPF2FormatError(
            f"truncated header: need bytes [0, {_HEADER.size}), file has {len(data)}"
        )
    magic, mx, my, flag = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise SPF2FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if flag not in (0, 1):
        raise SPF2FormatError(f"real_flag byte must be 0 or 1, got {flag}")
    need = _HEADER.size + 16 * mx * my
    if len(data) < need:
        raise SPF2FormatError(
            f"truncated payload: missing bytes [{len(data)}, {need}) of {mx}x{my} coefficients"
        )
    if len(data) > need:
        raise SPF2FormatError(f"{len(data) - need} trailing bytes after payload")
    try:
        grid = GridSpec(mx, my, oversample)
    except ValueError as exc:
        raise SPF2FormatError(str(exc)) from exc
    centered = np.frombuffer(data, dtype="<c16", count=mx * my, offset=_HEADER.size)
    coeffs = np.fft.ifftshift(centered.reshape(mx, my)).astype(np.complex128)
    if not np.all(np.isfinite(coeffs)):
        raise SPF2FormatError("non-finite coefficient in payload")
    coeffs.setflags(write=False)
    # Stored bits are taken verbatim so the round trip is exact.
    return SpectralField(grid, coeffs, bool(flag))


def save_field(field: SpectralField, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(field))


def load_field(path: str | os.PathLike, oversample: int = 4) -> SpectralField:
    with open(path, "rb") as fh:
        return loads(fh.read(), oversample)
