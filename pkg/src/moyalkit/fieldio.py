"""MKF1 binary field files.

Layout (little-endian):

    4s   magic b"MKF1"
    u32  d, number of grid axes
    u32  N per axis (d values)
    f64  L per axis (d values)
    f64  hbar
    u32  n, configuration-space dimension
    u32  payload dtype tag (1 = complex128)
    ...  N_1 * ... * N_d complex values, real/imag float64 pairs, row-major
"""

from __future__ import annotations

import os
import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .grid import GridSpec, SampledField
from .symplectic import HbarContext

MAGIC = b"MKF1"
DTYPE_COMPLEX128 = 1
_PAYLOAD = np.dtype("<c16")


class FieldFormatError(ValueError):
    """Malformed, truncated or inconsistent field file."""


def encode_field(field: SampledField, ctx: HbarContext) -> bytes:
    grid = field.grid
    d = grid.dims
    header = struct.pack(
        f"<4sI{d}I{d}ddII",
        MAGIC,
        d,
        *grid.points,
        *(float(L) for L in grid.extent),
        float(ctx.hbar),
        ctx.n,
        DTYPE_COMPLEX128,
    )
    payload = np.ascontiguousarray(field.values, dtype=_PAYLOAD).tobytes(order="C")
    return header + payload


def decode_field(data: bytes, expect_hbar: Optional[float] = None) -> tuple[SampledField, HbarContext]:
    if len(data) < 8:
        raise FieldFormatError("file too short for a header")
    magic, d = struct.unpack_from("<4sI", data, 0)
    if magic != MAGIC:
        raise FieldFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if not 1 <= d <= 8:
        raise FieldFormatError(f"implausible axis count {d}")
    fmt = f"<{d}I{d}ddII"
    head = 8 + struct.calcsize(fmt)
    if len(data) < head:
        raise FieldFormatError("truncated header")
    vals = struct.unpack_from(fmt, data, 8)
    points, extent = vals[:d], vals[d : 2 * d]
    hbar, n, tag = vals[2 * d], vals[2 * d + 1], vals[2 * d + 2]
    if tag != DTYPE_COMPLEX128:
        raise FieldFormatError(f"unsupported payload dtype tag {tag}")
    if d not in (n, 2 * n):
        raise FieldFormatError(f"header mismatch: {d} axes for n = {n}")
    count = int(np.prod(points))
    need = head + count * _PAYLOAD.itemsize
    if len(data) < need:
        raise FieldFormatError(f"truncated payload: {len(data) - head} of {need - head} bytes")
    if len(data) > need:
        raise FieldFormatError(f"payload longer than header declares by {len(data) - need} bytes")
    if expect_hbar is not None and hbar != expect_hbar:
        raise FieldFormatError(f"hbar mismatch: file has {hbar!r}, scenario has {expect_hbar!r}")
    try:
        grid = GridSpec(tuple(points), tuple(extent))
        ctx = HbarContext(hbar, n)
    except ValueError as exc:
        raise FieldFormatError(f"invalid header: {exc}") from exc
    values = np.frombuffer(data, dtype=_PAYLOAD, count=count, offset=head).reshape(points).astype(complex)
    if not np.all(np.isfinite(values)):
        raise FieldFormatError("payload contains non-finite values")
    return SampledField(grid, values), ctx


def write_field(field: SampledField, path: Union[str, os.PathLike], ctx: HbarContext) -> None:
    """Write ``field`` atomically (temporary file, then rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(encode_field(field, ctx))
    os.replace(tmp, path)


def read_field(path: Union[str, os.PathLike], expect_hbar: Optional[float] = None) -> tuple[SampledField, HbarContext]:
    """Read a field file; ``expect_hbar`` turns a header mismatch into an error."""
    return decode_field(Path(path).read_bytes(), expect_hbar)
