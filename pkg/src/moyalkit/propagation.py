"""Star-exponential propagation of phase-space fields.

iħ dΨ/dt = H * Ψ is advanced by the classical fourth-order Runge-Kutta
scheme with the Bopp operator of H as the only primitive.  The truncated
series and the configuration-space route (matrix exponential followed by a
wave-packet transform) serve as cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .builtins import quadratic
from .grid import GridSpec, SampledField, inner_product, pullback
from .norms import lsq_norm
from .star import BoppOperator, Symbol, weyl_quantize
from .symplectic import HbarContext, is_symplectic
from .transforms import wave_packet

DEFAULT_CFL = 0.01
MAX_STEPS = 100_000
DRIFT_ABORT = 1e-3


class PropagationError(RuntimeError):
    """Numerical failure during propagation (divergence, norm blow-up)."""


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """H(z) = M z.z / 2 + m.z."""

    M: np.ndarray
    m: np.ndarray = None

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.M, dtype=float))
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise ValueError("M must be a square 2n x 2n matrix")
        if np.max(np.abs(M - M.T)) > 1e-12:
            raise ValueError("M must be symmetric")
        m = np.zeros(M.shape[0]) if self.m is None else np.asarray(self.m, dtype=float).ravel()
        if m.shape != (M.shape[0],):
            raise ValueError("m must have length 2n")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "m", m)

    def __call__(self, x, p):
        M, m = self.M, self.m
        return 0.5 * (M[0, 0] * x * x + 2 * M[0, 1] * x * p + M[1, 1] * p * p) + m[0] * x + m[1] * p

    def symbol(self, grid: GridSpec, ctx: HbarContext, r0: Optional[float] = None, w: float = 0.5) -> Symbol:
        """H times a flat-top envelope on ``grid`` (n = 1)."""
        return Symbol(quadratic(grid, ctx, M=self.M, m=self.m, r0=r0, w=w), ctx)


@dataclass
class PropagationResult:
    Psi_t: SampledField
    t: float
    steps: int
    norm_drift: float
    method: str
    # per-step rows (step, t, norm, energy)
    diagnostics: list = field(default_factory=list)
    truncation: float = math.nan

    def diagnostics_csv(self) -> str:
        lines = ["step,t,norm,energy"]
        for k, t, nrm, en in self.diagnostics:
            lines.append(f"{k},{t:.6e},{nrm:.6e},{en:.6e}")
        return "\n".join(lines) + "\n"


def symbol_sup(H: Symbol) -> float:
    return float(np.max(np.abs(H.values)))


def star_exp_series(H: Symbol, Psi0: SampledField, t: float, K: int = 20) -> PropagationResult:
    """Partial sum of sum_k (t / i hbar)^k / k! H~^k Psi0 for k <= K."""
    if not 0 <= K <= 64:
        raise ValueError(f"K must lie in [0, 64], got {K}")
    op = BoppOperator(H)
    term = Psi0.values.copy()
    total = term.copy()
    norms = [Psi0.norm()]
    growth = 0
    c = t / (1j * H.ctx.hbar)
    cell = Psi0.grid.cell
    for k in range(1, K + 1):
        if t == 0:
            break
        term = op(Psi0.with_values(term)).values * (c / k)
        total += term
        norms.append(float(np.sqrt(np.sum(np.abs(term) ** 2) * cell)))
        growth = growth + 1 if norms[-1] > norms[-2] else 0
        if growth >= 5:
            raise PropagationError(f"series terms grew for 5 consecutive orders at k={k}; use a smaller t")
    Psi_t = Psi0.with_values(total)
    return PropagationResult(
        Psi_t, t, K, abs(Psi_t.norm() - Psi0.norm()), "series", truncation=norms[-1] if t else 0.0
    )


def star_exp_propagate(
    H: Symbol,
    Psi0: SampledField,
    t: float,
    dt: float,
    cfl: float = DEFAULT_CFL,
    record: bool = True,
) -> PropagationResult:
    """Advance i hbar dPsi/dt = H * Psi with classical RK4.

    Preconditions: dt <= cfl * hbar / max|H| and t / dt <= 1e5.  The run
    aborts when the norm drifts by more than 1e-3.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    hbar = H.ctx.hbar
    hmax = symbol_sup(H)
    if hmax > 0 and dt > cfl * hbar / hmax * (1 + 1e-12):
        raise ValueError(f"dt={dt:g} exceeds the step limit {cfl * hbar / hmax:.4g} (cfl={cfl:g})")
    steps = int(math.ceil(abs(t) / dt - 1e-9)) if t else 0
    if steps > MAX_STEPS:
        raise ValueError(f"{steps} steps exceed the limit {MAX_STEPS}")
    h = t / steps if steps else 0.0
    op = BoppOperator(H)
    cell = Psi0.grid.cell
    n0 = Psi0.norm()
    y = Psi0.values.copy()

    def rhs(v):
        return op(Psi0.with_values(v)).values * (-1j / hbar)

    diags = []
    drift = 0.0
    for k in range(steps + 1):
        k1 = rhs(y)
        nrm = float(np.sqrt(np.sum(np.abs(y) ** 2) * cell))
        drift = max(drift, abs(nrm - n0))
        if drift > DRIFT_ABORT:
            raise PropagationError(f"norm drift {drift:.3e} exceeds {DRIFT_ABORT:g} at step {k}")
        if record:
            # H~ Psi = i hbar k1
            energy = float(np.real(np.vdot(y, 1j * hbar * k1)) * cell / nrm**2) if nrm else 0.0
            diags.append((k, k * h, nrm, energy))
        if k == steps:
            break
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return PropagationResult(Psi0.with_values(y), t, steps, drift, "stepper", diags)


def evolution_matrix(H: Symbol, t: float) -> np.ndarray:
    """exp(-i t H_hat / hbar) for the Weyl matrix of H."""
    M = weyl_quantize(H).entries
    U = expm(-1j * t / H.ctx.hbar * M)
    if not np.all(np.isfinite(U)):
        raise PropagationError("matrix exponential is not finite")
    return U


def schrodinger_evolve(H: Symbol, psi0: SampledField, t: float) -> SampledField:
    """U_t psi0 with U_t the dense matrix exponential of the Weyl matrix of H."""
    if psi0.grid != H.grid.config():
        raise ValueError("psi0 must live on the configuration grid of H")
    return psi0.with_values(evolution_matrix(H, t) @ psi0.values)


def star_exp_intertwined(H: Symbol, phi, psi0: SampledField, t: float) -> PropagationResult:
    """Reference path W_phi(U_t psi0) for Exp(Ht) W_phi psi0."""
    Psi0 = wave_packet(phi, psi0, H.ctx)
    Psi_t = wave_packet(phi, schrodinger_evolve(H, psi0, t), H.ctx)
    return PropagationResult(Psi_t, t, 1, abs(Psi_t.norm() - Psi0.norm()), "intertwined")


def exp_intertwine_residual(
    H: Symbol, phi, psi0: SampledField, t: float, dt: Optional[float] = None, cfl: float = DEFAULT_CFL
) -> float:
    """|| Exp(Ht) W_phi psi0 - W_phi U_t psi0 ||_inf, stepper against matrix exponential."""
    Psi0 = wave_packet(phi, psi0, H.ctx)
    dt = default_dt(H, cfl, t) if dt is None else dt
    stepped = star_exp_propagate(H, Psi0, t, dt, cfl=cfl, record=False).Psi_t
    ref = star_exp_intertwined(H, phi, psi0, t).Psi_t
    return float(np.max(np.abs(stepped.values - ref.values)))


def energy(H: Symbol, Psi: SampledField) -> float:
    """((H~ Psi | Psi)) / ((Psi | Psi))."""
    HP = BoppOperator(H)(Psi)
    return float(np.real(inner_product(HP, Psi) / inner_product(Psi, Psi)))


def default_dt(H: Symbol, cfl: float, t: float) -> float:
    hmax = symbol_sup(H)
    return cfl * H.ctx.hbar / hmax if hmax > 0 else max(abs(t), 1.0)


def exp_covariance_residual(H: Symbol, Psi0: SampledField, S, t: float, dt: Optional[float] = None, cfl: float = DEFAULT_CFL) -> float:
    """| Exp((H o S^-1) t) Psi0 - U_S Exp(H t) U_S^-1 Psi0 |_inf with U_S Psi = Psi o S^-1."""
    S = np.asarray(S, dtype=float)
    if not is_symplectic(S, 1e-10):
        raise ValueError("S is not symplectic")
    Si = np.linalg.inv(S)
    HS = Symbol(pullback(H.field, Si), H.ctx)
    dt = default_dt(H, cfl, t) if dt is None else dt
    lhs = star_exp_propagate(HS, Psi0, t, dt, cfl=cfl, record=False).Psi_t
    rhs = pullback(star_exp_propagate(H, pullback(Psi0, S), t, dt, cfl=cfl, record=False).Psi_t, Si)
    return float(np.max(np.abs(lhs.values - rhs.values)))


def admissibility_ratios(H: Symbol, phi, psi0: SampledField, times, qs=(1, 2), ss=(0, 1)) -> np.ndarray:
    """lsq_norm(Psi_t, q, s) / lsq_norm(Psi_0, q, s) along the reference path, shape (len(qs), len(ss), len(times))."""
    Psi0 = wave_packet(phi, psi0, H.ctx)
    U = [star_exp_intertwined(H, phi, psi0, t).Psi_t for t in times]
    out = np.empty((len(qs), len(ss), len(times)))
    for i, q in enumerate(qs):
        for j, s in enumerate(ss):
            base = lsq_norm(Psi0, q, s)
            out[i, j] = [lsq_norm(P, q, s) / base for P in U]
    return out
