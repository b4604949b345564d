"""Exact linear algebra on phase space.

Symplectic form, symplectic-group membership, the doubled phase space
embedding used by Bopp covariance, and the Gaussian admissibility and
Hardy eigenvalue tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# closed inequalities: boundary Gaussians (coherent states) must pass
ADMISSIBLE_TOL = 1e-12


@dataclass(frozen=True)
class HbarContext:
    """Planck constant and number of degrees of freedom."""

    hbar: float = 1.0
    n: int = 1

    def __post_init__(self):
        if not np.isfinite(self.hbar) or self.hbar <= 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")

    def with_hbar(self, hbar: float) -> "HbarContext":
        return HbarContext(hbar=hbar, n=self.n)


@dataclass(frozen=True)
class PhasePoint:
    """A point z = (x, p) of R^2n."""

    x: np.ndarray
    p: np.ndarray

    def __init__(self, x, p):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if x.shape != p.shape or x.ndim != 1:
            raise ValueError("x and p must be vectors of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(p))):
            raise ValueError("phase point entries must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_vector(cls, z) -> "PhasePoint":
        z = np.asarray(z, dtype=float).ravel()
        if z.size % 2:
            raise ValueError("phase vector must have even length")
        n = z.size // 2
        return cls(z[:n], z[n:])

    @property
    def n(self) -> int:
        return self.x.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.p])


def _as_point(z) -> PhasePoint:
    return z if isinstance(z, PhasePoint) else PhasePoint.from_vector(z)


def standard_j(n: int) -> np.ndarray:
    """The standard symplectic matrix [[0, I], [-I, 0]]."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_form(z, z2) -> float:
    """sigma(z, z') = p . x' - p' . x."""
    z, z2 = _as_point(z), _as_point(z2)
    if z.n != z2.n:
        raise ValueError(f"dimension mismatch: {z.n} vs {z2.n}")
    return float(z.p @ z2.x - z2.p @ z.x)


def _square(S) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        raise ValueError(f"expected a square 2n x 2n matrix, got shape {S.shape}")
    return S


def is_symplectic(S, tol: float = 1e-12, form=None) -> bool:
    """True iff max |S^T form S - form| <= tol (form defaults to J)."""
    S = _square(S)
    if form is None:
        form = standard_j(S.shape[0] // 2)
    return bool(np.max(np.abs(S.T @ form @ S - form)) <= tol)


def double_form(n: int) -> np.ndarray:
    """Matrix of sigma (+) sigma on R^2n x R^2n."""
    J = standard_j(n)
    Z = np.zeros_like(J)
    return np.block([[J, Z], [Z, J]])


def embed_double_phase(S, tol: float = 1e-10) -> np.ndarray:
    """M_S = blockdiag(S^-1, S^T), acting on the doubled phase space (z, zeta)."""
    S = _square(S)
    if not is_symplectic(S, tol):
        raise ValueError("input matrix is not symplectic")
    Z = np.zeros_like(S)
    return np.block([[np.linalg.inv(S), Z], [Z, S.T]])


def symplectic_flow(M, t: float) -> np.ndarray:
    """Linear Hamiltonian flow exp(t J M) of H(z) = Mz.z / 2."""
    from scipy.linalg import expm

    M = _square(M)
    return expm(t * standard_j(M.shape[0] // 2) @ M)


def _symmetric(M, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square")
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-12:
        raise ValueError(f"{name} must be symmetric")
    return M


def gaussian_admissible(M) -> tuple[np.ndarray, bool]:
    """Moduli of eig(JM) sorted ascending, and whether all are <= 1.

    ``M`` is the shape matrix of a phase-space Gaussian exp(-Mz.z/hbar).
    """
    M = _symmetric(M, "M")
    if M.shape[0] % 2:
        raise ValueError("M must be 2n x 2n")
    if np.min(np.linalg.eigvalsh(M)) <= 0:
        raise ValueError("M must be positive definite")
    # JM is not normal: use the general eigensolver
    moduli = np.sort(np.abs(np.linalg.eigvals(standard_j(M.shape[0] // 2) @ M)))
    return moduli, bool(moduli[-1] <= 1 + ADMISSIBLE_TOL)


def hardy_pair_check(A, B) -> tuple[np.ndarray, bool]:
    """Eigenvalues of AB for the Hardy pair (A, B); ok iff all are <= 1."""
    A = _symmetric(A, "A")
    B = _symmetric(B, "B")
    if A.shape != B.shape:
        raise ValueError(f"dimension mismatch: {A.shape} vs {B.shape}")
    for name, X in (("A", A), ("B", B)):
        if np.min(np.linalg.eigvalsh(X)) <= 0:
            raise ValueError(f"{name} must be positive definite")
    # AB is similar to A^1/2 B A^1/2, so its spectrum is real and positive
    eigs = np.sort(np.linalg.eigvals(A @ B).real)
    return eigs, bool(eigs[-1] <= 1 + ADMISSIBLE_TOL)
