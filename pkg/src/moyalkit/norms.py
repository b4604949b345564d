"""Truncated-grid estimators for weighted modulation-space norms.

Every estimator returns a NormReport carrying the value, the window
label, the grid, the weight exponent, a tail estimate from the outermost
frequency shell and (when computed) a refinement drift.  These are
estimates on a finite grid, not certified norms.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import scipy.fft as sfft

from .grid import GridSpec, SampledField, grid_workers, sample
from .star import Symbol
from .transforms import Window, stft

TAIL_LIMIT = 0.1
CSV_HEADER = ("value", "window_id", "N", "L", "s", "q", "tail", "drift")


@dataclass(frozen=True)
class Weight:
    """v_s(w) = (1 + |w|^2)^{s/2} on phase space (2n args) or the doubled space (4n args)."""

    s: float
    arity: str = "phase"
    n: int = 1

    def __post_init__(self):
        if not self.s >= 0:
            raise ValueError(f"weight exponent must be >= 0, got {self.s}")
        if self.arity not in ("phase", "doubled"):
            raise ValueError(f"arity must be 'phase' or 'doubled', got {self.arity!r}")

    @property
    def size(self) -> int:
        return 2 * self.n if self.arity == "phase" else 4 * self.n


def weight_eval(w: Weight, point) -> np.ndarray:
    """Evaluate v_s at one point or a stack of points (last axis = coordinates)."""
    point = np.asarray(point, dtype=float)
    if point.shape[-1:] != (w.size,):
        raise ValueError(f"{w.arity} weight takes {w.size} coordinates, got shape {point.shape}")
    return (1.0 + np.sum(point**2, axis=-1)) ** (w.s / 2)


def submultiplicative_constant(s: float) -> float:
    """Sharp C_s with v_s(z + w) <= C_s v_s(z) v_s(w) for all z, w.

    (1 + |z + w|^2) / ((1 + |z|^2)(1 + |w|^2)) peaks at 4/3 (z = w, |z|^2 = 1/2),
    so C_s = (4/3)^{s/2}; the bound with C_s = 1 fails for every s > 0.
    """
    if not s >= 0:
        raise ValueError(f"weight exponent must be >= 0, got {s}")
    return (4.0 / 3.0) ** (s / 2)


def _vs(s: float, sq: np.ndarray) -> np.ndarray:
    return (1.0 + sq) ** (s / 2) if s else np.ones_like(sq)


@dataclass(frozen=True)
class NormReport:
    value: float
    window_id: str
    grid: GridSpec
    s: float
    q: float
    tail: float
    drift: float = math.nan

    def row(self) -> list:
        return [
            f"{self.value:.6e}",
            self.window_id,
            "x".join(str(N) for N in self.grid.points),
            "x".join(f"{L:g}" for L in self.grid.extent),
            f"{self.s:g}",
            "inf" if math.isinf(self.q) else f"{self.q:g}",
            f"{self.tail:.6e}",
            "nan" if math.isnan(self.drift) else f"{self.drift:.6e}",
        ]

    def with_drift(self, refined: "NormReport") -> "NormReport":
        """Attach |refined - self| / refined as the refinement drift."""
        ref = refined.value
        drift = abs(ref - self.value) / ref if ref else abs(ref - self.value)
        return replace(self, drift=drift)


def reports_csv(reports: Iterable[NormReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


# -- windows ----------------------------------------------------------------


def gaussian_window(grid: GridSpec, sigma: float = 1.0) -> SampledField:
    """L2-normalized exp(-pi |z|^2 / sigma^2) on ``grid`` (any dimension)."""
    d = grid.dims
    amp = (2.0 / sigma**2) ** (d / 4)
    return sample(lambda *c: amp * np.exp(-np.pi * sum(ci**2 for ci in c) / sigma**2), grid)


def window_label(sigma: float) -> str:
    return f"gauss(sigma={sigma:g})"


def default_window(grid: GridSpec) -> Window:
    return Window(gaussian_window(grid))


# -- M^{infinity,1}_s -------------------------------------------------------


def _stft_modulus_sup(A: np.ndarray, Phi: np.ndarray, grid: GridSpec, s: float, zscale: float = 1.0, zeta_scale: float = 1.0):
    """sup_z |V_Phi A(z, zeta)| v_s(z * zscale, zeta * zeta_scale) for every zeta node.

    V is sampled on the z nodes and the centered frequency grid; only its
    modulus is needed, so DFT phase offsets are dropped.
    """
    N1, N2 = grid.points
    j2 = np.arange(N2)
    # frequencies in unshifted DFT order; the result is fftshifted at the end
    w1, w2 = np.meshgrid(sfft.fftfreq(N1, grid.spacing[0]), sfft.fftfreq(N2, grid.spacing[1]), indexing="ij")
    zeta_sq = (w1**2 + w2**2) * zeta_scale**2
    x, p = grid.axis(0), grid.axis(1)
    best = np.zeros((N1, N2))
    # conj(Phi) translated along p: W2[i1, b, m2] = conj(Phi[i1, m2 - b + N/2])
    rows2 = (j2[None, :] - j2[:, None] + N2 // 2) % N2
    W2 = np.conj(Phi)[:, rows2]
    for a in range(N1):
        # translated along x, window row m1 reads row m1 - a + N/2
        prod = A[:, None, :] * np.roll(W2, a - N1 // 2, axis=0)
        V = np.abs(sfft.fft2(prod, axes=(0, 2), workers=grid_workers()))
        if s:
            z_sq = (x[a] ** 2 + p**2) * zscale**2
            V *= _vs(s, z_sq[None, :, None] + zeta_sq[:, None, :])
        np.maximum(best, V.max(axis=1), out=best)
    return np.fft.fftshift(best) * grid.cell


def _shell_tail(best: np.ndarray, cell: float) -> float:
    shell = np.zeros(best.shape, dtype=bool)
    shell[0, :] = shell[-1, :] = shell[:, 0] = shell[:, -1] = True
    return float(best[shell].sum() * cell)


def msinf1_norm(A, window: Optional[SampledField] = None, s: float = 0.0, window_id: Optional[str] = None, check_tail: bool = True) -> NormReport:
    """Estimate int sup_z |V_Phi A(z, zeta)| v_s(z, zeta) d zeta on the grid.

    Raises ValueError when the outermost zeta shell carries more than 10%
    of the value (frequency grid too small).
    """
    field = A.field if isinstance(A, Symbol) else A
    grid = field.grid
    if grid.dims != 2:
        raise ValueError("msinf1_norm is implemented for n = 1 (two phase axes)")
    if window is None:
        window = gaussian_window(grid)
        window_id = window_id or window_label(1.0)
    if window.grid != grid:
        raise ValueError("window and symbol grids differ")
    best = _stft_modulus_sup(field.values, window.values, grid, s)
    dzeta = float(np.prod([1.0 / L for L in grid.extent]))
    value = float(best.sum() * dzeta)
    tail = _shell_tail(best, dzeta)
    if check_tail and value > 0 and tail > TAIL_LIMIT * value:
        raise ValueError(f"frequency tail {tail:.3e} exceeds {TAIL_LIMIT:.0%} of the estimate {value:.3e}")
    return NormReport(value, window_id or "custom", grid, s, 1.0, tail)


# -- M^q_s on R^n -----------------------------------------------------------


def lsq_norm(Psi: SampledField, q: float, s: float = 0.0) -> float:
    """(sum |v_s Psi|^q cell)^{1/q}; the grid maximum of |v_s Psi| for q = inf."""
    if not q >= 1:
        raise ValueError(f"q must be >= 1 or inf, got {q}")
    sq = sum(c**2 for c in Psi.grid.mesh())
    f = np.abs(Psi.values) * _vs(s, sq)
    if math.isinf(q):
        return float(f.max())
    return float((np.sum(f**q) * Psi.grid.cell) ** (1.0 / q))


def msq_norm(psi: SampledField, window: Optional[Window] = None, q: float = 2.0, s: float = 0.0, window_id: Optional[str] = None) -> NormReport:
    """lsq_norm of the short-time Fourier transform V_phi psi."""
    if not q >= 1:
        raise ValueError(f"q must be >= 1 or inf, got {q}")
    if window is None:
        window = Window(gaussian_window(psi.grid))
        window_id = window_id or window_label(1.0)
    V = stft(window.phi, psi)
    value = lsq_norm(V, q, s)
    # tail: contribution of the outermost frequency rows
    sq = sum(c**2 for c in V.grid.mesh())
    f = np.abs(V.values) * _vs(s, sq)
    edge = np.concatenate([f[:, 0], f[:, -1]])
    if math.isinf(q):
        tail = float(edge.max())
    else:
        tail = float((np.sum(edge**q) * V.grid.cell) ** (1.0 / q))
    return NormReport(value, window_id or "custom", psi.grid, s, q, tail)


# -- diagnostics ------------------------------------------------------------


def window_equivalence(symbols: Sequence, window_a: SampledField, window_b: SampledField, s: float = 0.0) -> tuple[np.ndarray, float]:
    """Ratios ||A||_a / ||A||_b over a corpus and the smallest C with all ratios in [1/C, C]."""
    ratios = np.array(
        [msinf1_norm(A, window_a, s).value / msinf1_norm(A, window_b, s).value for A in symbols]
    )
    C = float(max(ratios.max(), 1.0 / ratios.min()))
    return ratios, C


def fitted_constant(lhs: Sequence[float], rhs: Sequence[float]) -> float:
    """Smallest C with lhs <= C * rhs on every sample."""
    lhs, rhs = np.asarray(lhs, float), np.asarray(rhs, float)
    return float(np.max(lhs / rhs))


@dataclass(frozen=True)
class ScalingReport:
    lam: float
    s: float
    lhs: float  # ||A_lambda|| with window Phi
    rhs: float  # max(1, lambda^{2s}) ||A|| with window Phi_{1/lambda}
    exact: float  # lhs recomputed from the change of variables
    holds: bool


def scaling_norm_bound_check(A: Callable, grid: GridSpec, lam: float, s: float, sigma: float = 1.0, slack: float = 1e-6) -> ScalingReport:
    """Compare ||A_lambda||^Phi with max(1, lambda^{2s}) ||A||^{Phi_{1/lambda}}.

    A_lambda(z) = A(lambda z) and Phi_{1/lambda}(z) = Phi(z / lambda).  The
    change of variables gives exactly int sup_w |V_{Phi_{1/lambda}} A(w, eta)|
    v_s(w / lambda, lambda eta) d eta, reported as ``exact`` for comparison.
    """
    if not 0.25 <= lam <= 4.0:
        raise ValueError(f"lambda must lie in [1/4, 4], got {lam}")
    Phi = gaussian_window(grid, sigma)
    Phi_l = gaussian_window(grid, sigma * lam) * (lam ** (grid.dims / 2))  # Phi(z / lam), unnormalized
    A_l = sample(lambda x, p: A(lam * x, lam * p), grid)
    A_0 = sample(A, grid)
    dzeta = float(np.prod([1.0 / L for L in grid.extent]))
    lhs = float(_stft_modulus_sup(A_l.values, Phi.values, grid, s).sum() * dzeta)
    rhs_norm = float(_stft_modulus_sup(A_0.values, Phi_l.values, grid, s).sum() * dzeta)
    exact = float(_stft_modulus_sup(A_0.values, Phi_l.values, grid, s, 1 / lam, lam).sum() * dzeta)
    rhs = max(1.0, lam ** (2 * s)) * rhs_norm
    return ScalingReport(lam, s, lhs, rhs, exact, lhs <= rhs * (1 + slack))
