"""Builtin field generators.

Every generator takes a grid, an HbarContext and keyword parameters and
returns a SampledField.  Configuration-space fields live on grids with n
axes, phase-space symbols on grids with 2n axes.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import erfc

from .grid import GridSpec, SampledField, sample
from .symplectic import HbarContext


def flat_top(r, r0: float, w: float):
    """Smooth cut-off equal to 1 up to about r0 - 3w and to 0 beyond r0 + 3w."""
    return 0.5 * erfc((np.asarray(r) - r0) / w)


def _radius(*c):
    return np.sqrt(sum(ci**2 for ci in c))


def _is_phase(grid: GridSpec, ctx: HbarContext) -> bool:
    if grid.dims == 2 * ctx.n:
        return True
    if grid.dims == ctx.n:
        return False
    raise ValueError(f"grid with {grid.dims} axes fits neither n = {ctx.n} nor 2n")


def _vector(v, size: int, name: str) -> np.ndarray:
    a = np.zeros(size) if v is None else np.asarray(v, dtype=float).ravel()
    if a.shape != (size,):
        raise ValueError(f"{name} must have {size} entries")
    return a


def gaussian(grid: GridSpec, ctx: HbarContext, center=None, momentum=None, width: Optional[float] = None, amplitude: float = 1.0) -> SampledField:
    """Coherent state or phase-space Gaussian.

    Configuration space: L2-normalized (pi w^2)^{-n/4} exp(-|x-c|^2/(2w^2) + i p.x/hbar),
    w defaulting to sqrt(hbar).  Phase space: amplitude * exp(-|z-c|^2/(2w^2)), w
    defaulting to 1.
    """
    d = grid.dims
    c = _vector(center, d, "center")
    if _is_phase(grid, ctx):
        w = 1.0 if width is None else float(width)
        return sample(lambda *z: amplitude * np.exp(-sum((zi - ci) ** 2 for zi, ci in zip(z, c)) / (2 * w * w)) + 0j, grid)
    w = np.sqrt(ctx.hbar) if width is None else float(width)
    p0 = _vector(momentum, d, "momentum")
    norm = (np.pi * w * w) ** (-d / 4)

    def f(*x):
        r2 = sum((xi - ci) ** 2 for xi, ci in zip(x, c))
        ph = sum(pi * xi for pi, xi in zip(p0, x)) / ctx.hbar
        return amplitude * norm * np.exp(-r2 / (2 * w * w) + 1j * ph)

    return sample(f, grid)


def squeezed(grid: GridSpec, ctx: HbarContext, M, amplitude: float = 1.0) -> SampledField:
    """Phase space: exp(-M z.z / hbar).  Configuration space: exp(-M x.x / (2 hbar)), L2-normalized."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape != (grid.dims, grid.dims) or np.max(np.abs(M - M.T)) > 1e-12:
        raise ValueError(f"M must be a symmetric {grid.dims}x{grid.dims} matrix")
    if np.linalg.eigvalsh(M).min() <= 0:
        raise ValueError("M must be positive definite")
    z = np.stack(grid.mesh(), axis=-1)
    q = np.einsum("...i,ij,...j->...", z, M, z)
    if _is_phase(grid, ctx):
        return SampledField(grid, amplitude * np.exp(-q / ctx.hbar) + 0j)
    norm = (np.linalg.det(M) / (np.pi * ctx.hbar) ** grid.dims) ** 0.25
    return SampledField(grid, amplitude * norm * np.exp(-q / (2 * ctx.hbar)) + 0j)


def triangle(grid: GridSpec, ctx: HbarContext, width: float = 1.0) -> SampledField:
    """Product of tents max(0, 1 - |u|/width) over all axes."""
    return sample(lambda *u: np.prod([np.maximum(0.0, 1.0 - np.abs(ui) / width) for ui in u], axis=0) + 0j, grid)


def monomial(grid: GridSpec, ctx: HbarContext, a: int = 1, b: int = 0, r0: Optional[float] = None, w: Optional[float] = None) -> SampledField:
    """x^a p^b times a flat-top envelope (default r0 = 5L/16, w = L/30)."""
    if not _is_phase(grid, ctx) or grid.dims != 2:
        raise ValueError("monomial symbols need a 2-axis phase grid")
    if int(a) != a or int(b) != b or a < 0 or b < 0:
        raise ValueError("exponents must be non-negative integers")
    L = min(grid.extent)
    r0 = 5 * L / 16 if r0 is None else float(r0)
    w = L / 30 if w is None else float(w)
    return sample(lambda x, p: x ** int(a) * p ** int(b) * flat_top(_radius(x, p), r0, w) + 0j, grid)


def quadratic(grid: GridSpec, ctx: HbarContext, M=None, m=None, r0: Optional[float] = None, w: float = 0.5) -> SampledField:
    """(M z.z / 2 + m.z) times a flat-top envelope (default r0 = 5L/16); M defaults to I."""
    if not _is_phase(grid, ctx) or grid.dims != 2:
        raise ValueError("quadratic symbols need a 2-axis phase grid")
    M = np.eye(2) if M is None else np.asarray(M, dtype=float)
    m = _vector(m, 2, "m")
    r0 = 5 * min(grid.extent) / 16 if r0 is None else float(r0)

    def f(x, p):
        H = 0.5 * (M[0, 0] * x * x + (M[0, 1] + M[1, 0]) * x * p + M[1, 1] * p * p) + m[0] * x + m[1] * p
        return H * flat_top(_radius(x, p), r0, w) + 0j

    return sample(f, grid)


def oscillator(grid: GridSpec, ctx: HbarContext, r0: Optional[float] = None, w: float = 0.5, cap: Optional[float] = None) -> SampledField:
    """Capped harmonic symbol Hmax - (Hmax - |z|^2/2) * env, env = flat_top(|z|, r0, w), Hmax = r0^2/2 by default.

    Unlike an envelope that sends H to zero, the cap keeps the symbol large
    outside the disk, so no spurious low-energy states appear there.
    """
    if not _is_phase(grid, ctx) or grid.dims != 2:
        raise ValueError("oscillator symbol needs a 2-axis phase grid")
    r0 = 3 * min(grid.extent) / 8 if r0 is None else float(r0)
    hmax = 0.5 * r0**2 if cap is None else float(cap)

    def f(x, p):
        H = 0.5 * (x * x + p * p)
        return hmax - (hmax - H) * flat_top(_radius(x, p), r0, w) + 0j

    return sample(f, grid)


def constant(grid: GridSpec, ctx: HbarContext, value: complex = 1.0) -> SampledField:
    return SampledField(grid, np.full(grid.shape, complex(value)))


def mixture(grid: GridSpec, ctx: HbarContext, components: int = 3, seed: int = 0, spread: Optional[float] = None, width_range: Sequence[float] = (0.85, 1.15)) -> SampledField:
    """Seeded random Gaussian mixture with complex weights.

    Centers are uniform in [-spread, spread] per axis (default L/16), widths
    uniform in width_range.  Configuration-space mixtures are L2-normalized.
    """
    if components < 1:
        raise ValueError("components must be >= 1")
    rng = np.random.default_rng(int(seed))
    d = grid.dims
    spread = min(grid.extent) / 16 if spread is None else float(spread)
    lo, hi = map(float, width_range)
    centers = rng.uniform(-spread, spread, size=(components, d))
    widths = rng.uniform(lo, hi, size=components)
    weights = rng.normal(size=components) + 1j * rng.normal(size=components)
    mesh = grid.mesh()
    vals = np.zeros(grid.shape, dtype=complex)
    for c, wd, a in zip(centers, widths, weights):
        vals += a * np.exp(-sum((zi - ci) ** 2 for zi, ci in zip(mesh, c)) / (2 * wd * wd))
    F = SampledField(grid, vals)
    if not _is_phase(grid, ctx):
        F = F * (1.0 / F.norm())
    return F


GENERATORS: dict[str, Callable[..., SampledField]] = {
    "gaussian": gaussian,
    "squeezed": squeezed,
    "triangle": triangle,
    "monomial": monomial,
    "quadratic": quadratic,
    "oscillator": oscillator,
    "constant": constant,
    "mixture": mixture,
}


def generate(name: str, grid: GridSpec, ctx: HbarContext, **params) -> SampledField:
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown builtin {name!r}; choose from {sorted(GENERATORS)}") from None
    try:
        return gen(grid, ctx, **params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for builtin {name!r}: {exc}") from None
