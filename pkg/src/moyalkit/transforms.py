"""Time-frequency transforms on sampled fields (n = 1).

Cross-Wigner and wave-packet transforms live in the hbar world and are
sampled on the phase grid ``grid.phase()``.  The short-time Fourier
transform uses the 2 pi convention and is sampled on ``grid.stft()``
(frequency spacing 1/L); the two worlds are never mixed implicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .grid import (
    GridSpec,
    SampledField,
    fourier_shift,
    hbar_fourier,
    inner_product,
    resample_axis,
    upsample,
)
from .symplectic import HbarContext, PhasePoint, standard_j


def _require_1d(psi: SampledField, ctx: HbarContext) -> GridSpec:
    if psi.grid.dims != 1 or ctx.n != 1:
        raise ValueError("transforms are implemented for n = 1 fields")
    return psi.grid


def _point(z0) -> PhasePoint:
    return z0 if isinstance(z0, PhasePoint) else PhasePoint.from_vector(z0)


@dataclass(frozen=True)
class Window:
    """Analysis window phi; unit L2 norm is enforced unless ``norm_one`` is False."""

    phi: SampledField
    norm_one: bool = True

    def __post_init__(self):
        if self.norm_one and abs(self.phi.norm() - 1.0) > 1e-10:
            raise ValueError(f"window norm is {self.phi.norm():.12g}, expected 1")

    @classmethod
    def normalized(cls, phi: SampledField) -> "Window":
        return cls(phi * (1.0 / phi.norm()))


def _as_window(phi) -> Window:
    return phi if isinstance(phi, Window) else Window(phi)


def cross_wigner(psi: SampledField, phi: SampledField, ctx: HbarContext) -> SampledField:
    """W(psi, phi)(x, p) = (2 pi hbar)^-1 int e^{-ipy/hbar} psi(x+y/2) conj(phi(x-y/2)) dy.

    Half-node values come from a zero-padded (doubled) grid; terms with
    x +- y/2 outside the cell are dropped.
    """
    grid = _require_1d(psi, ctx)
    if phi.grid != grid:
        raise ValueError("psi and phi must share a grid")
    grid.check_dual(ctx)
    N, dx = grid.points[0], grid.spacing[0]
    fine_psi = upsample(psi.values, 0)
    fine_phi = upsample(phi.values, 0)
    j = np.arange(N)[:, None] * 2
    k = np.arange(-N, N)[None, :]
    # x +- y/2 must stay inside the cell; a periodic wrap would put a
    # ghost copy of W at x = +-L/2
    plus, minus = j + k, j - k
    ok = (plus >= 0) & (plus < 2 * N) & (minus >= 0) & (minus < 2 * N)
    prod = np.where(ok, fine_psi[plus % (2 * N)] * np.conj(fine_phi[minus % (2 * N)]), 0.0)
    p = grid.axis(0)
    E = np.exp(-1j * np.outer(p, k[0] * dx) / ctx.hbar)
    W = prod @ E.T * (dx / (2 * np.pi * ctx.hbar))
    return SampledField(grid.phase(), W)


def wave_packet(phi, psi: SampledField, ctx: HbarContext) -> SampledField:
    """Windowed wave-packet transform (2 pi hbar)^{n/2} W(psi, phi)."""
    w = _as_window(phi)
    return cross_wigner(psi, w.phi, ctx) * np.sqrt(2 * np.pi * ctx.hbar) ** ctx.n


def wave_packet_adjoint(phi, Psi: SampledField, ctx: HbarContext) -> SampledField:
    """Adjoint transform by quadrature of

    (2/(pi hbar))^{1/2} int e^{2ip(x-y)/hbar} phi(2y - x) Psi(y, p) dp dy.
    """
    w = _as_window(phi)
    grid = _require_1d(w.phi, ctx)
    if Psi.grid != grid.phase():
        raise ValueError("Psi must live on the phase grid of the window")
    N, dx = grid.points[0], grid.spacing[0]
    p = grid.axis(0)
    d = np.arange(-(N - 1), N)
    # T[d, j] = sum_l exp(2i p_l d dx / hbar) Psi[j, l] dp
    Ed = np.exp(2j * np.outer(d * dx, p) / ctx.hbar)
    T = Ed @ Psi.values.T * dx
    i = np.arange(N)[:, None]
    jj = np.arange(N)[None, :]
    Q = T[i - jj + (N - 1), jj]
    widx = 2 * jj - i
    ok = (widx >= 0) & (widx < N)
    phi_vals = np.where(ok, w.phi.values[np.clip(widx, 0, N - 1)], 0.0)
    out = np.sum(phi_vals * Q, axis=1) * dx * np.sqrt(2 / (np.pi * ctx.hbar))
    return SampledField(grid, out)


def projector(phi, Psi: SampledField, ctx: HbarContext) -> SampledField:
    """P_phi = W_phi W_phi^*: orthogonal projection onto the range of W_phi."""
    w = _as_window(phi)
    return wave_packet(w, wave_packet_adjoint(w, Psi, ctx), ctx)


def stft(phi: SampledField, psi: SampledField) -> SampledField:
    """V_phi psi(x, w) = int e^{-2 pi i w x'} psi(x') conj(phi(x' - x)) dx'.

    Sampled on ``psi.grid.stft()``: x on the nodes, w on the centered
    frequency grid with spacing 1/L.  Window translates are exact index
    rolls since x runs over nodes.
    """
    grid = psi.grid
    if grid.dims != 1:
        raise ValueError("stft is implemented for one-dimensional fields")
    if phi.grid != grid:
        raise ValueError("psi and phi must share a grid")
    N, dx = grid.points[0], grid.spacing[0]
    m = np.arange(N)
    j = np.arange(N)[:, None]
    # phi(x_m - x_j) sits at node m - j + N/2
    win = np.conj(phi.values[(m[None, :] - j + N // 2) % N])
    prod = psi.values[None, :] * win
    omega = grid.frequency().axis(0)
    E = np.exp(-2j * np.pi * np.outer(omega, grid.axis(0))) * dx
    return SampledField(grid.stft(), prod @ E.T)


def heisenberg_weyl(z0, psi: SampledField, ctx: HbarContext) -> SampledField:
    """T(z0) psi(x) = exp(i (p0 x - p0 x0 / 2) / hbar) psi(x - x0)."""
    grid = _require_1d(psi, ctx)
    z0 = _point(z0)
    x0, p0 = float(z0.x[0]), float(z0.p[0])
    if abs(x0) > grid.extent[0] / 2:
        raise ValueError(f"shift {x0} exceeds half the grid extent")
    shifted = fourier_shift(psi, [x0])
    x = grid.axis(0)
    return shifted.with_values(shifted.values * np.exp(1j * (p0 * x - 0.5 * p0 * x0) / ctx.hbar))


def phase_translation(z0, B: SampledField, ctx: HbarContext) -> SampledField:
    """T~(z0) B(z) = exp(i sigma(z0, z) / hbar) B(z - z0 / 2) on the phase grid."""
    grid = B.grid
    if grid.dims != 2 or ctx.n != 1:
        raise ValueError("phase_translation is implemented for n = 1 phase grids")
    z0 = _point(z0)
    x0, p0 = float(z0.x[0]), float(z0.p[0])
    if abs(x0) / 2 > grid.extent[0] / 2 or abs(p0) / 2 > grid.extent[1] / 2:
        raise ValueError("half shift exceeds the grid extent")
    shifted = fourier_shift(B, [x0 / 2, p0 / 2])
    x, p = grid.mesh()
    return shifted.with_values(shifted.values * np.exp(1j * (p0 * x - p * x0) / ctx.hbar))


# -- metaplectic generators -------------------------------------------------


@dataclass(frozen=True)
class FourierJ:
    """Modified Fourier transform i^{-n/2} F (projects to J); ``inverse`` gives its inverse."""

    inverse: bool = False


@dataclass(frozen=True)
class Chirp:
    """Multiplication by exp(i P x.x / hbar)."""

    P: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.P, dtype=float))
        if P.shape[0] != P.shape[1] or np.max(np.abs(P - P.T)) > 1e-12:
            raise ValueError("chirp matrix must be symmetric")
        object.__setattr__(self, "P", P)


@dataclass(frozen=True)
class Dilation:
    """psi -> i^m sqrt|det L| psi(Lx)."""

    L: np.ndarray
    m: int = 0

    def __post_init__(self):
        L = np.atleast_2d(np.asarray(self.L, dtype=float))
        if L.shape[0] != L.shape[1] or abs(np.linalg.det(L)) <= 1e-12:
            raise ValueError("dilation matrix must be invertible")
        object.__setattr__(self, "L", L)


Token = Union[FourierJ, Chirp, Dilation]


@dataclass(frozen=True)
class MetaplecticWord:
    """Generator tokens applied left to right."""

    tokens: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def projection(self, n: int = 1) -> np.ndarray:
        """Symplectic matrix S with S_hat T(z) S_hat^-1 = T(Sz)."""
        S = np.eye(2 * n)
        for tok in self.tokens:
            if isinstance(tok, FourierJ):
                G = -standard_j(n) if tok.inverse else standard_j(n)
            elif isinstance(tok, Chirp):
                # the multiplier exp(iPx.x/hbar) shifts momentum by 2Px
                G = np.block([[np.eye(n), np.zeros((n, n))], [2 * tok.P, np.eye(n)]])
            else:
                Li = np.linalg.inv(tok.L)
                G = np.block([[Li, np.zeros((n, n))], [np.zeros((n, n)), tok.L.T]])
            S = G @ S
        return S

    def inverse(self) -> "MetaplecticWord":
        inv = []
        for tok in reversed(self.tokens):
            if isinstance(tok, FourierJ):
                inv.append(FourierJ(not tok.inverse))
            elif isinstance(tok, Chirp):
                inv.append(Chirp(-tok.P))
            else:
                inv.append(Dilation(np.linalg.inv(tok.L), -tok.m))
        return MetaplecticWord(tuple(inv))


def metaplectic_apply(word: MetaplecticWord, psi: SampledField, ctx: HbarContext) -> SampledField:
    """Apply the word's generators to psi, left token first.

    The modified Fourier transform uses the principal branch of i^{-n/2};
    dilations resample psi(Lx) by trigonometric interpolation.
    """
    grid = _require_1d(psi, ctx)
    x = grid.axis(0)
    for tok in word.tokens:
        if isinstance(tok, FourierJ):
            if tok.inverse:
                psi = hbar_fourier(psi, ctx, inverse=True) * (1j ** (ctx.n / 2))
            else:
                psi = hbar_fourier(psi, ctx) * (1j ** (-ctx.n / 2))
        elif isinstance(tok, Chirp):
            psi = psi.with_values(psi.values * np.exp(1j * tok.P[0, 0] * x * x / ctx.hbar))
        else:
            scale = tok.L[0, 0]
            half = grid.extent[0] / 2
            if abs(scale) < 1:
                # psi(Lx) on the grid only sees psi on |x| <= |L| half
                outside = np.abs(x) > abs(scale) * half
                top = np.abs(psi.values).max()
                if outside.any() and np.abs(psi.values[outside]).max() > 1e-10 * top:
                    raise ValueError("dilation pushes mass outside the grid")
            targets = scale * x
            inside = np.abs(targets) < half
            vals = resample_axis(psi.values, grid, 0, np.where(inside, targets, 0.0))
            vals = np.where(inside, vals, 0.0)
            psi = psi.with_values((1j ** tok.m) * np.sqrt(abs(scale)) * vals)
    return psi


def wave_packet_norm_check(phi, psi: SampledField, ctx: HbarContext) -> float:
    """| ||W_phi psi|| - ||psi|| |, the isometry defect."""
    return abs(wave_packet(phi, psi, ctx).norm() - psi.norm())


def adjoint_defect(phi, psi: SampledField, Psi: SampledField, ctx: HbarContext) -> float:
    """|((W_phi psi | Psi)) - (psi | W_phi^* Psi)|."""
    lhs = inner_product(wave_packet(phi, psi, ctx), Psi)
    rhs = inner_product(psi, wave_packet_adjoint(phi, Psi, ctx))
    return abs(lhs - rhs)


def hw_covariance_residual(word: MetaplecticWord, z0, psi: SampledField, ctx: HbarContext) -> float:
    """max |S_hat T(z0) S_hat^-1 psi - T(S z0) psi| with S the word's projection."""
    S = word.projection(ctx.n)
    z0 = _point(z0).as_vector()
    lhs = metaplectic_apply(word, heisenberg_weyl(z0, metaplectic_apply(word.inverse(), psi, ctx), ctx), ctx)
    rhs = heisenberg_weyl(S @ z0, psi, ctx)
    return float(np.max(np.abs(lhs.values - rhs.values)))


def wigner_marginal_defect(psi: SampledField, ctx: HbarContext) -> float:
    """max_x |sum_p W(psi, psi)(x, p) dp - |psi(x)|^2|."""
    W = cross_wigner(psi, psi, ctx)
    marginal = W.values.sum(axis=1) * W.grid.spacing[1]
    return float(np.max(np.abs(marginal - np.abs(psi.values) ** 2)))
