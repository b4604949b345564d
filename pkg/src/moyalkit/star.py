"""Moyal star product, Bopp operators and Weyl/tau quantization (n = 1).

The production star product expands both factors in the plane waves
carried by the grid.  Two plane waves multiply as

    e^{i xi.z} * e^{i eta.z} = exp(-(i hbar / 2) sigma(xi, eta)) e^{i (xi + eta).z}

which is the phase-translation representation evaluated exactly on the
DFT lattice.  Output frequencies outside the grid band are dropped rather
than wrapped.  Cost is O(N^3 log N) on an N x N phase grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import (
    GridSpec,
    SampledField,
    fft,
    fftn,
    ifft,
    ifftn,
    interpolate,
    pullback,
    sample,
    shift_axis,
    symplectic_fourier,
)
from .symplectic import HbarContext, is_symplectic, standard_j
from .transforms import MetaplecticWord, metaplectic_apply, phase_translation

MAX_MATRIX_N = 256
# X[m1, i1, i2] is cached when it has at most this many entries
_PLAN_CACHE_LIMIT = 2**22


class BoundaryDecayWarning(UserWarning):
    """A symbol does not decay at the edge of its grid."""


def boundary_level(F: SampledField) -> float:
    """Largest modulus on the outermost nodes relative to the largest overall."""
    v = np.abs(F.values)
    top = v.max()
    if top == 0:
        return 0.0
    edge = 0.0
    for ax in range(v.ndim):
        edge = max(edge, np.take(v, 0, axis=ax).max(), np.take(v, -1, axis=ax).max())
    return float(edge / top)


def _warn_decay(F: SampledField, name: str, tol: float = 1e-10) -> None:
    level = boundary_level(F)
    if level > tol:
        warnings.warn(f"{name} boundary level {level:.2e} exceeds {tol:.0e}", BoundaryDecayWarning, stacklevel=3)


@dataclass(frozen=True)
class Symbol:
    """A phase-space function sampled on a 2n-dimensional grid, with its hbar."""

    field: SampledField
    ctx: HbarContext

    def __post_init__(self):
        if self.field.grid.dims != 2 * self.ctx.n:
            raise ValueError(f"symbol grid has {self.field.grid.dims} axes, expected {2 * self.ctx.n}")

    @classmethod
    def from_function(cls, f: Callable, grid: GridSpec, ctx: HbarContext) -> "Symbol":
        return cls(sample(f, grid), ctx)

    @property
    def grid(self) -> GridSpec:
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    def with_values(self, values) -> "Symbol":
        return Symbol(self.field.with_values(values), self.ctx)

    def with_ctx(self, ctx: HbarContext) -> "Symbol":
        return Symbol(self.field, ctx)

    def conj(self) -> "Symbol":
        return self.with_values(np.conj(self.values))

    def __add__(self, other: "Symbol") -> "Symbol":
        _check_pair(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "Symbol") -> "Symbol":
        _check_pair(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c) -> "Symbol":
        return self.with_values(self.values * c)

    __rmul__ = __mul__


def _check_pair(A: Symbol, B) -> None:
    grid = B.grid
    if A.grid != grid:
        raise ValueError(f"grid mismatch: {A.grid} vs {grid}")
    if isinstance(B, Symbol) and A.ctx != B.ctx:
        raise ValueError(f"hbar context mismatch: {A.ctx} vs {B.ctx}")


def _require_phase_1(grid: GridSpec, ctx: HbarContext) -> None:
    if ctx.n != 1 or grid.dims != 2:
        raise ValueError("the star-product engine is implemented for n = 1")


def _centered(N: int) -> np.ndarray:
    return np.arange(N) - N // 2


class BoppOperator:
    """The Bopp operator B -> A * B for a fixed left factor A.

    Building the operator precomputes the A-dependent half of the product
    so repeated applications (time stepping, series) are cheaper.
    """

    def __init__(self, A: Symbol, check_decay: bool = True):
        _require_phase_1(A.grid, A.ctx)
        self.symbol = A
        v = A.values
        first = v.flat[0]
        self.constant: Optional[complex] = complex(first) if np.all(v == first) else None
        if self.constant is not None:
            return
        if check_decay:
            _warn_decay(A.field, "left factor")
        N1, N2 = A.grid.points
        L1, L2 = A.grid.extent
        self.kappa = 0.5 * A.ctx.hbar * (2 * np.pi) ** 2 / (L1 * L2)
        self.i1, self.i2 = _centered(N1), _centered(N2)
        self.a = np.fft.fftshift(fftn(v) / (N1 * N2))
        # idx[m1, i1] = position of b[m1 - i1] in the zero-padded row block
        self.idx = self.i1[:, None] - self.i1[None, :] + N1
        self.P = np.exp(-1j * self.kappa * np.outer(self.i1, self.i2))
        # padded length 3N/2: circular wrap of the linear convolution misses the kept band
        self.M = 3 * N2 // 2
        self._Xf = None
        if N1 * N1 * self.M <= _PLAN_CACHE_LIMIT:
            self._Xf = self._xf(slice(None))

    def _xf(self, rows: slice) -> np.ndarray:
        N2 = self.symbol.grid.points[1]
        m1 = self.i1[rows]
        X = self.a[None, :, :] * np.exp(1j * self.kappa * np.outer(m1, self.i2))[:, None, :]
        return fft(X, axis=-1, n=self.M)

    def __call__(self, Psi: SampledField) -> SampledField:
        A = self.symbol
        if Psi.grid != A.grid:
            raise ValueError(f"grid mismatch: {A.grid} vs {Psi.grid}")
        if self.constant is not None:
            return Psi.with_values(self.constant * Psi.values) if self.constant != 1 else Psi
        N1, N2 = A.grid.points
        b = np.fft.fftshift(fftn(Psi.values) / (N1 * N2))
        padded = np.zeros((2 * N1 + 1, N2), dtype=complex)
        padded[N1 - N1 // 2 : N1 + N1 // 2] = b
        Bf = fft(padded, axis=-1, n=self.M)
        C = np.empty((N1, N2), dtype=complex)
        block = N1 if self._Xf is not None else max(1, _PLAN_CACHE_LIMIT // (N1 * self.M))
        for start in range(0, N1, block):
            rows = slice(start, min(N1, start + block))
            Xf = self._Xf[rows] if self._Xf is not None else self._xf(rows)
            Z = ifft(Xf * Bf[self.idx[rows]], axis=-1, overwrite=True)[:, :, N2 // 2 : N2 // 2 + N2]
            # C[m1, m2] = sum_i1 P[i1, m2] Z[m1, i1, m2]
            C[rows] = np.einsum("ij,mij->mj", self.P, Z)
        return Psi.with_values(ifftn(np.fft.ifftshift(C)) * (N1 * N2))


def bopp_apply(A: Symbol, Psi: SampledField) -> SampledField:
    """Apply the Bopp operator of A to a phase-space field: A * Psi."""
    _check_pair(A, Psi)
    return BoppOperator(A)(Psi)


def moyal_star(A: Symbol, B: Symbol) -> Symbol:
    """Moyal product A *_hbar B on the shared phase grid."""
    _check_pair(A, B)
    return Symbol(BoppOperator(A)(B.field), A.ctx)


def twisted_product(A: Symbol, B: Symbol) -> Symbol:
    """Twisted product A # B: the Moyal product at hbar = 1 / (2 pi)."""
    _check_pair(A, B)
    ctx = A.ctx.with_hbar(1 / (2 * np.pi))
    return moyal_star(A.with_ctx(ctx), B.with_ctx(ctx))


def moyal_bracket(A: Symbol, B: Symbol) -> Symbol:
    """(-i / hbar)(A * B - B * A), normalized so that {x, p} = 1."""
    _check_pair(A, B)
    diff = moyal_star(A, B).values - moyal_star(B, A).values
    return A.with_values(-1j / A.ctx.hbar * diff)


def moyal_star_translations(A: Symbol, B: Symbol) -> Symbol:
    """Reference product: explicit sum over z0 of A_sigma(z0) T~(z0) B.

    Uses the symplectic Fourier transform on the grid nodes and one
    phase translation per node, so it is only meant for small grids.
    """
    _check_pair(A, B)
    _require_phase_1(A.grid, A.ctx)
    ctx, grid = A.ctx, A.grid
    As = symplectic_fourier(A.field, ctx).values
    x0s, p0s = grid.axis(0), grid.axis(1)
    acc = np.zeros(grid.shape, dtype=complex)
    for j, x0 in enumerate(x0s):
        for k, p0 in enumerate(p0s):
            if As[j, k] != 0:
                acc += As[j, k] * phase_translation([x0, p0], B.field, ctx).values
    return B.with_values(acc * grid.cell / (2 * np.pi * ctx.hbar))


def moyal_star_direct(A: Symbol, B: Symbol) -> Symbol:
    """Small-grid oracle: double quadrature of

    (pi hbar)^-2 int int exp(-(2i/hbar) sigma(z - z', z - z'')) A(z') B(z'') dz' dz''.
    """
    _check_pair(A, B)
    _require_phase_1(A.grid, A.ctx)
    grid = A.grid
    if max(grid.points) > 16:
        raise ValueError("direct quadrature is limited to 16 points per axis")
    x, p = (c.ravel() for c in grid.mesh())
    # sigma(z_a, z_b) = p_a x_b - p_b x_a
    S = np.outer(p, x) - np.outer(x, p)
    E = np.exp(-2j / A.ctx.hbar * S)
    a, b = A.values.ravel(), B.values.ravel()
    # sigma(z-z', z-z'') = sigma(z, z') - sigma(z, z'') + sigma(z', z'')
    U = (E * b[None, :]) @ np.conj(E).T  # U[z', z]
    C = np.sum(E * a[None, :] * U.T, axis=1)
    w = grid.cell**2 / (np.pi * A.ctx.hbar) ** 2
    return B.with_values(C.reshape(grid.shape) * w)


def bopp_symbol(A: Symbol) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Evaluator of the doubled-phase-space symbol (z, zeta) -> A(z - J zeta / 2)."""
    _require_phase_1(A.grid, A.ctx)
    J = standard_j(1)
    half = np.asarray(A.grid.extent) / 2

    def evaluate(z, zeta) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
        pts = z - 0.5 * zeta @ J.T
        if np.any(np.abs(pts) > half):
            raise ValueError("query point outside the grid extent")
        return interpolate(A.field, pts)

    return evaluate


# -- quantization -----------------------------------------------------------


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator on configuration-grid vectors: (A psi)_i = sum_j entries[i, j] psi_j."""

    entries: np.ndarray
    grid: GridSpec
    ctx: HbarContext

    def __post_init__(self):
        M = np.asarray(self.entries, dtype=complex)
        N = self.grid.points[0]
        if self.grid.dims != 1 or M.shape != (N, N):
            raise ValueError(f"expected an {N}x{N} matrix on a one-dimensional grid")
        if not np.all(np.isfinite(M)):
            raise ValueError("operator matrix has non-finite entries")
        object.__setattr__(self, "entries", M)

    def apply(self, psi: SampledField) -> SampledField:
        if psi.grid != self.grid:
            raise ValueError("grid mismatch")
        return psi.with_values(self.entries @ psi.values)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.entries @ other.entries, self.grid, self.ctx)

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def inverse(self) -> "OperatorMatrix":
        return OperatorMatrix(np.linalg.inv(self.entries), self.grid, self.ctx)


def _quantize_setup(A: Symbol):
    _require_phase_1(A.grid, A.ctx)
    grid = A.grid
    cfg = grid.config()
    N = cfg.points[0]
    if N > MAX_MATRIX_N:
        raise ValueError(f"operator matrices are limited to N <= {MAX_MATRIX_N}")
    # the p = -L/2 row is quantized exactly as a multiplication operator,
    # which keeps non-decaying symbols such as 1 + (decaying) exact
    c = A.values[:, 0].copy()
    R = A.values - c[:, None]
    _warn_decay(A.field.with_values(R), "symbol remainder")
    dx = cfg.spacing[0]
    s = np.arange(-(N - 1), N) * dx
    return cfg, N, dx, s, _lag_mask(s, A.ctx.hbar, A.grid.spacing[1]), c, R


def _lag_mask(s: np.ndarray, hbar: float, dp: float) -> np.ndarray:
    """Kernel lags resolved by the p quadrature.

    The p-sum at lag s is periodic in s with period 2 pi hbar / dp, so
    only |s| below half of that is free of aliases.
    """
    return np.abs(s) < np.pi * hbar / dp * (1 - 1e-12)


def _assemble(N: int, band: np.ndarray, c: np.ndarray) -> np.ndarray:
    """M[i, i - d] = band[i, d + N - 1], plus diag(c)."""
    i = np.arange(N)[:, None]
    d = np.arange(-(N - 1), N)[None, :]
    j = i - d
    ok = (j >= 0) & (j < N)
    M = np.zeros((N, N), dtype=complex)
    M[np.broadcast_to(i, ok.shape)[ok], j[ok]] = band[ok]
    return M + np.diag(c)


def tau_quantize(A: Symbol, tau: float) -> OperatorMatrix:
    """tau-ordered quantization with kernel

    K(x, y) = (2 pi hbar)^-1 int exp(ip(x - y)/hbar) A((1 - tau)x + tau y, p) dp.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    cfg, N, dx, s, lags, c, R = _quantize_setup(A)
    hbar = A.ctx.hbar
    p = A.grid.axis(1)
    dp = A.grid.spacing[1]
    E = np.exp(1j * np.outer(p, s) / hbar) * (dp / (2 * np.pi * hbar)) * lags
    G = R @ E  # G[x, d]: p-integral at lag s_d
    # K(x_i, x_i - s_d) = G(x_i - tau s_d, d)
    G = shift_axis(G, dx, tau * s, axis=0)
    return OperatorMatrix(_assemble(N, G * dx, c), cfg, A.ctx)


def weyl_quantize(A: Symbol) -> OperatorMatrix:
    """Weyl quantization as a weighted sum of Heisenberg-Weyl matrices.

    Translations x0 run over integer multiples of the grid spacing (exact
    zero-filled shifts); momenta p0 over the 2 pi hbar / L lattice.
    """
    cfg, N, dx, s, lags, c, R = _quantize_setup(A)
    hbar = A.ctx.hbar
    L = cfg.extent[0]
    x = cfg.axis(0)
    p = A.grid.axis(1)
    dp = A.grid.spacing[1]
    k = np.fft.fftfreq(N, 1.0 / N)
    p0 = 2 * np.pi * hbar * k / L
    Q = R @ (np.exp(1j * np.outer(p, s) / hbar) * dp * lags)  # [x', x0]
    # A_sigma(x0, p0) = (2 pi hbar)^-1 sum_x' exp(-i p0 x'/hbar) Q[x', x0] dx
    As = np.exp(-1j * np.outer(p0, x) / hbar) @ Q * (dx / (2 * np.pi * hbar))
    # T(z0) has entries exp(i p0 (x_i - x0/2)/hbar) at column i - x0/dx
    # half-node phase; the Nyquist row takes the symmetric cos form so real symbols give Hermitian matrices
    half = np.exp(-0.5j * np.outer(p0, s) / hbar)
    half[N // 2] = np.cos(0.5 * p0[N // 2] * s / hbar)
    As = As * half
    D = np.exp(1j * np.outer(x, p0) / hbar) @ As
    dp0 = 2 * np.pi * hbar / L
    return OperatorMatrix(_assemble(N, D * (dx * dp0 / (2 * np.pi * hbar)), c), cfg, A.ctx)


def inverse_weyl_symbol(K: OperatorMatrix, grid: Optional[GridSpec] = None) -> Symbol:
    """Weyl symbol A(x, p) = int exp(-ipy/hbar) K(x + y/2, x - y/2) dy of a matrix.

    The symbol lives on ``grid`` (default: the square phase grid over the
    matrix's configuration grid).
    """
    cfg = K.grid
    grid = grid if grid is not None else cfg.phase()
    if grid.config() != cfg:
        raise ValueError("phase grid does not match the operator's configuration grid")
    N, dx = cfg.points[0], cfg.spacing[0]
    hbar = K.ctx.hbar
    d = np.arange(-(N - 1), N)
    j = np.arange(N)[None, :]
    rows = j + d[:, None]
    ok = (rows >= 0) & (rows < N)
    kern = K.entries / dx
    H = np.where(ok, kern[np.clip(rows, 0, N - 1), np.broadcast_to(j, ok.shape)], 0.0)
    # H[d, x] = K(x + s_d, x); evaluate at x - s_d / 2
    H = shift_axis(H, dx, d * dx / 2, axis=1)
    p = grid.axis(1)
    E = np.exp(-1j * np.outer(p, d * dx) / hbar) * dx * _lag_mask(d * dx, hbar, grid.spacing[1])
    return Symbol(SampledField(grid, H.T @ E.T), K.ctx)


# -- covariance and Wiener hooks --------------------------------------------


def _probe_vectors(cfg: GridSpec, ctx: HbarContext, count: int = 4) -> list:
    x = cfg.axis(0)
    out = []
    for k in range(count):
        shift = (k - (count - 1) / 2) * 0.5
        g = np.exp(-((x - shift) ** 2) / ctx.hbar) * np.exp(1j * 0.3 * k * x / ctx.hbar)
        out.append(SampledField(cfg, g))
    return out


def weyl_covariance_residual(A: Symbol, word: MetaplecticWord, tau: float = 0.5, probes=None) -> float:
    """max over probes of |Q_tau(A o S^-1) psi - S_hat Q_tau(A) S_hat^-1 psi|, S the word's projection."""
    S = word.projection(A.ctx.n)
    if not is_symplectic(S, 1e-10):
        raise ValueError("word does not project to a symplectic matrix")
    lhs = tau_quantize(Symbol(pullback(A.field, np.linalg.inv(S)), A.ctx), tau)
    rhs = tau_quantize(A, tau)
    inv = word.inverse()
    probes = probes if probes is not None else _probe_vectors(lhs.grid, A.ctx)
    res = 0.0
    for psi in probes:
        a = lhs.apply(psi).values
        b = metaplectic_apply(word, rhs.apply(metaplectic_apply(inv, psi, A.ctx)), A.ctx).values
        res = max(res, float(np.max(np.abs(a - b))))
    return res


def bopp_covariance_residual(A: Symbol, Psi: SampledField, S) -> float:
    """| (A o S^-1) * Psi - U_S (A * U_S^-1 Psi) |_inf with U_S Psi = Psi o S^-1.

    U_S must move phase-space fields the same way the symbol moves; with
    Psi o S instead the identity would pair with A o S.
    """
    S = np.asarray(S, dtype=float)
    if not is_symplectic(S, 1e-10):
        raise ValueError("S is not symplectic")
    Si = np.linalg.inv(S)
    lhs = bopp_apply(Symbol(pullback(A.field, Si), A.ctx), Psi)
    rhs = pullback(bopp_apply(A, pullback(Psi, S)), Si)
    return float(np.max(np.abs(lhs.values - rhs.values)))


def wiener_inverse_symbol(A: Symbol) -> Symbol:
    """Weyl symbol of the matrix inverse of weyl_quantize(A)."""
    return inverse_weyl_symbol(weyl_quantize(A).inverse(), A.grid)


def scaling_law_residual(fa: Callable, fb: Callable, grid: GridSpec, ctx: HbarContext, lam: Optional[float] = None) -> float:
    """max |(A *_hbar B)(lam z) - (A_lam # B_lam)(z)| on ``grid``, A_lam(z) = A(lam z).

    Substituting z = lam u in the product kernel turns *_hbar into # exactly
    when lam^2 = 2 pi hbar, the default.  The left side is computed on the
    grid dilated by lam, whose nodes are lam times the nodes of ``grid``.
    """
    lam = float(np.sqrt(2 * np.pi * ctx.hbar)) if lam is None else float(lam)
    if lam <= 0:
        raise ValueError("lam must be positive")
    big = GridSpec(grid.points, tuple(lam * L for L in grid.extent))
    lhs = moyal_star(Symbol(sample(fa, big), ctx), Symbol(sample(fb, big), ctx))
    unit = ctx.with_hbar(1.0)
    rhs = twisted_product(
        Symbol(sample(lambda x, p: fa(lam * x, lam * p), grid), unit),
        Symbol(sample(lambda x, p: fb(lam * x, lam * p), grid), unit),
    )
    return float(np.max(np.abs(lhs.values - rhs.values)))
