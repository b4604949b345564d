"""Uniform periodic grids and sampled fields.

Nodes along an axis of extent ``L`` with ``N`` points sit at
``-L/2 + j*L/N`` for ``j = 0..N-1``; array index ``j`` is the node index,
so DFT coefficients are taken relative to the first node ``-L/2``.
Continuous integrals are rectangle-rule sums with weight ``prod(L/N)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft

from .symplectic import HbarContext

_WORKERS = 1


def set_workers(k: int) -> None:
    """Number of FFT worker threads (each 1-D transform stays single-threaded)."""
    global _WORKERS
    _WORKERS = max(1, int(k))


def grid_workers() -> int:
    return _WORKERS


def fft(a, axis=-1, n=None):
    return sfft.fft(a, n=n, axis=axis, workers=_WORKERS)


def ifft(a, axis=-1, n=None, overwrite=False):
    return sfft.ifft(a, n=n, axis=axis, overwrite_x=overwrite, workers=_WORKERS)


def fftn(a, axes=None):
    return sfft.fftn(a, axes=axes, workers=_WORKERS)


def ifftn(a, axes=None):
    return sfft.ifftn(a, axes=axes, workers=_WORKERS)


@dataclass(frozen=True)
class GridSpec:
    """Centered periodic grid with ``points[i]`` nodes over ``extent[i]``."""

    points: tuple
    extent: tuple

    def __post_init__(self):
        points = tuple(int(N) for N in self.points)
        extent = tuple(float(L) for L in self.extent)
        if len(points) != len(extent) or not points:
            raise ValueError("points and extent must have the same positive length")
        for N in points:
            if N < 8 or N & (N - 1):
                raise ValueError(f"points per axis must be a power of two >= 8, got {N}")
        for L in extent:
            if not np.isfinite(L) or L <= 0:
                raise ValueError(f"extent must be positive, got {L}")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "extent", extent)

    @classmethod
    def uniform(cls, dims: int, N: int, L: float) -> "GridSpec":
        return cls((N,) * dims, (L,) * dims)

    @property
    def dims(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple:
        return self.points

    @property
    def spacing(self) -> tuple:
        return tuple(L / N for N, L in zip(self.points, self.extent))

    @property
    def cell(self) -> float:
        return float(np.prod(self.spacing))

    def axis(self, i: int = 0) -> np.ndarray:
        N, L = self.points[i], self.extent[i]
        return -L / 2 + np.arange(N) * (L / N)

    def axes(self) -> list:
        return [self.axis(i) for i in range(self.dims)]

    def mesh(self) -> list:
        return np.meshgrid(*self.axes(), indexing="ij")

    def phase(self) -> "GridSpec":
        """Product grid R^d x R^d carrying (x, p)."""
        return GridSpec(self.points * 2, self.extent * 2)

    def config(self) -> "GridSpec":
        """First half of a phase grid."""
        if self.dims % 2:
            raise ValueError("not a phase grid")
        h = self.dims // 2
        return GridSpec(self.points[:h], self.extent[:h])

    def frequency(self) -> "GridSpec":
        """Centered DFT frequency grid (2*pi convention): spacing 1/L."""
        return GridSpec(self.points, tuple(N / L for N, L in zip(self.points, self.extent)))

    def stft(self) -> "GridSpec":
        """(x, omega) grid for short-time Fourier transforms of fields on this grid."""
        return GridSpec(self.points + self.points, self.extent + self.frequency().extent)

    def check_dual(self, ctx: HbarContext) -> None:
        """Reject grids whose hbar-momentum lattice does not cover the spatial extent."""
        for N, L in zip(self.points, self.extent):
            if 2 * np.pi * ctx.hbar * N / L < L * (1 - 1e-12):
                raise ValueError(
                    f"grid too coarse for hbar={ctx.hbar}: momentum extent "
                    f"{2 * np.pi * ctx.hbar * N / L:.4g} < spatial extent {L:.4g}"
                )


@dataclass(frozen=True)
class SampledField:
    """Complex samples of a function on a GridSpec (C order)."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.size != int(np.prod(self.grid.shape)):
            raise ValueError(f"{v.size} values do not fit grid {self.grid.shape}")
        v = v.reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "SampledField":
        return SampledField(self.grid, values)

    def conj(self) -> "SampledField":
        return self.with_values(np.conj(self.values))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell))

    def __add__(self, other):
        _same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


def _same_grid(a: SampledField, b: SampledField) -> None:
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


def zeros(grid: GridSpec) -> SampledField:
    return SampledField(grid, np.zeros(grid.shape, dtype=complex))


def sample(f: Callable, grid: GridSpec) -> SampledField:
    """Evaluate ``f(*coords)`` on the grid nodes."""
    vals = np.broadcast_to(np.asarray(f(*grid.mesh()), dtype=complex), grid.shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError("sampled function produced non-finite values")
    return SampledField(grid, np.array(vals))


def inner_product(a: SampledField, b: SampledField) -> complex:
    """(a|b) = sum a * conj(b) * cell."""
    _same_grid(a, b)
    return complex(np.vdot(b.values.ravel(), a.values.ravel()) * a.grid.cell)


def fourier_matrix(x: np.ndarray, y: np.ndarray, hbar: float, dx: float, sign: int = -1):
    """Rectangle-rule kernel (2 pi hbar)^-1/2 dx exp(sign i x.y / hbar)."""
    return np.exp(sign * 1j * np.outer(x, y) / hbar) * (dx / np.sqrt(2 * np.pi * hbar))


def _apply_axis(mat: np.ndarray, v: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(mat, v, axes=([1], [axis])), 0, axis)


def hbar_fourier(psi: SampledField, ctx: HbarContext, inverse: bool = False) -> SampledField:
    """Unitary hbar-Fourier transform, evaluated back on the same nodes."""
    grid = psi.grid
    if grid.dims != ctx.n:
        raise ValueError(f"field has {grid.dims} axes, context has n={ctx.n}")
    grid.check_dual(ctx)
    v = psi.values
    for ax in range(grid.dims):
        x = grid.axis(ax)
        v = _apply_axis(fourier_matrix(x, x, ctx.hbar, grid.spacing[ax], 1 if inverse else -1), v, ax)
    return psi.with_values(v)


def symplectic_fourier(A: SampledField, ctx: HbarContext) -> SampledField:
    """F_sigma A(z) = (2 pi hbar)^-n int exp(-i sigma(z, z')/hbar) A(z') dz'.

    Implemented for n = 1: the output x pairs with the input p' and the
    output p with the input x', so this is FA(-Jz).
    """
    grid = A.grid
    if grid.dims % 2:
        raise ValueError("symplectic Fourier transform needs an even number of axes")
    if grid.dims != 2 * ctx.n or ctx.n != 1:
        raise ValueError("symplectic_fourier is implemented for n = 1 phase grids")
    x, p = grid.axis(0), grid.axis(1)
    Ex = fourier_matrix(x, x, ctx.hbar, grid.spacing[0], -1)  # e^{-i p x'} weight dx'
    Ep = fourier_matrix(p, p, ctx.hbar, grid.spacing[1], 1)  # e^{+i x p'} weight dp'
    # out[a, b] = sum_{j,k} Ep[a, k] A[j, k] Ex[b, j]
    return A.with_values(Ep @ A.values.T @ Ex.T)


def shift_phase(N: int, spacing: float, shifts) -> np.ndarray:
    """exp(-2 pi i f d) for each DFT frequency f and shift d (last axis = f).

    For even N the unpaired Nyquist mode gets cos(2 pi f d), the symmetric
    interpolant, so real samples stay real off the nodes.
    """
    arg = -2 * np.pi * np.asarray(shifts, dtype=float)[..., None] * sfft.fftfreq(N, d=spacing)
    ph = np.exp(1j * arg)
    if N % 2 == 0:
        ph[..., N // 2] = np.cos(arg[..., N // 2])
    return ph


def fourier_shift(F: SampledField, delta: Sequence[float]) -> SampledField:
    """Band-limited periodic shift: returns F(z - delta).

    Mass pushed across the boundary wraps around.
    """
    grid = F.grid
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    if delta.size != grid.dims:
        raise ValueError(f"shift has {delta.size} components, grid has {grid.dims} axes")
    v = F.values
    for ax, d in enumerate(delta):
        if d == 0.0:
            continue
        phase = shift_phase(grid.points[ax], grid.spacing[ax], d)
        shape = [1] * grid.dims
        shape[ax] = -1
        v = ifft(fft(v, axis=ax) * phase.reshape(shape), axis=ax)
    return F.with_values(v)


def shift_axis(values: np.ndarray, spacing: float, shifts: np.ndarray, axis: int) -> np.ndarray:
    """Shift each slice along ``axis`` by its own amount (broadcast over other axes).

    ``shifts`` has the shape of ``values`` with ``axis`` removed; slice ``s``
    becomes f(x - shifts[s]).
    """
    N = values.shape[axis]
    v = np.moveaxis(values, axis, -1)
    phase = shift_phase(N, spacing, shifts)
    out = ifft(fft(v, axis=-1) * phase, axis=-1)
    return np.moveaxis(out, -1, axis)


def interpolation_matrix(grid: GridSpec, ax: int, targets) -> np.ndarray:
    """Matrix M with M @ f(nodes) = trigonometric interpolant of f at ``targets``."""
    targets = np.asarray(targets, dtype=float).ravel()
    x0 = grid.axis(ax)[0]
    E = shift_phase(grid.points[ax], grid.spacing[ax], x0 - targets)
    return fft(E, axis=1) / grid.points[ax]


def resample_axis(values: np.ndarray, grid: GridSpec, ax: int, targets) -> np.ndarray:
    return _apply_axis(interpolation_matrix(grid, ax, targets), values, ax)


def interpolate(F: SampledField, points) -> np.ndarray:
    """Trigonometric interpolant of F at arbitrary points, shape (m, d)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    grid = F.grid
    if points.shape[1] != grid.dims:
        raise ValueError("point dimension does not match grid")
    coef = fftn(F.values) / np.prod(grid.shape)
    out = coef[None, ...]
    for ax in range(grid.dims):
        x0 = grid.axis(ax)[0]
        E = shift_phase(grid.points[ax], grid.spacing[ax], x0 - points[:, ax])
        # contract the leading frequency axis of the remaining coefficient block
        if ax == 0:
            out = np.tensordot(E, coef, axes=([1], [0]))
        else:
            out = np.einsum("mk,mk...->m...", E, out)
    return np.asarray(out).reshape(points.shape[0])


def upsample(values: np.ndarray, axis: int, factor: int = 2) -> np.ndarray:
    """Band-limited refinement along ``axis``: node j maps to j*factor."""
    N = values.shape[axis]
    c = fft(values, axis=axis)
    c = np.moveaxis(c, axis, -1)
    pad = np.zeros(c.shape[:-1] + (factor * N,), dtype=complex)
    h = N // 2
    pad[..., :h] = c[..., :h]
    pad[..., -h + 1 :] = c[..., -h + 1 :]
    # split the Nyquist coefficient evenly so real data stays real
    pad[..., h] = pad[..., -h] = 0.5 * c[..., h]
    out = ifft(pad, axis=-1) * factor
    return np.moveaxis(out, -1, axis)


def pullback(F: SampledField, M) -> SampledField:
    """(F o M)(z) = F(Mz) at the nodes, by trigonometric interpolation.

    Points landing outside the periodic cell read zero instead of a
    periodic image, so F should decay at the boundary.
    """
    grid = F.grid
    M = np.asarray(M, dtype=float)
    if M.shape != (grid.dims, grid.dims):
        raise ValueError(f"map must be {grid.dims}x{grid.dims}")
    nodes = np.stack([c.ravel() for c in grid.mesh()], axis=1)
    targets = nodes @ M.T
    half = np.asarray(grid.extent) / 2
    # nodes mapped onto the far edge (e.g. -L/2 -> L/2) are still inside
    inside = np.all(np.abs(targets) <= half * (1 + 1e-12), axis=1)
    if np.allclose(M, np.diag(np.diag(M)), atol=0.0):
        v = F.values
        for ax in range(grid.dims):
            t = grid.axis(ax) * M[ax, ax]
            v = resample_axis(v, grid, ax, t)
        vals = v.ravel()
    else:
        vals = interpolate(F, targets)
    return F.with_values(np.where(inside, vals, 0.0).reshape(grid.shape))
