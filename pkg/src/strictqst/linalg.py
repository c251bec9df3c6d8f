"""Dense complex-matrix kernel: Hermitian eigendecompositions, PSD-cone
projection, signatures, norms and traces.

Everything downstream (state models, measurement maps, cone-constrained
solvers) stands on these few operations.  All functions are pure; inputs
are never modified in place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "EigenDecomposition",
    "eigh",
    "psd_project",
    "signature",
    "norms_and_trace",
    "is_hermitian",
    "require_hermitian",
    "hermitize",
    "frobenius_norm",
    "schatten_norm",
]


def is_hermitian(a: np.ndarray, tol: float = DEFAULT.hermitian) -> bool:
    """Entrywise check |a - a^dag| <= tol."""
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


def require_hermitian(a: np.ndarray, tol: float = DEFAULT.hermitian) -> np.ndarray:
    """Validate Hermiticity and return the exactly symmetrized matrix.

    Raises
    ------
    NotHermitian
        If any entry of a - a^dag exceeds tol in modulus.
    """
    a = np.asarray(a, dtype=complex)
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev > tol:
        raise NotHermitian(f"matrix deviates from Hermiticity by {dev:.3e} (tol {tol:.1e})")
    return 0.5 * (a + a.conj().T)


def hermitize(a: np.ndarray) -> np.ndarray:
    """(a + a^dag)/2 without any validation; cheap defensive symmetrization."""
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition A = V diag(lam) V^dag.

    eigenvalues are real and sorted descending; eigenvectors are the matching
    columns of a unitary V.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eigh(a: np.ndarray, tol: Tolerances = DEFAULT) -> EigenDecomposition:
    """Full spectral decomposition of a Hermitian matrix.

    Parameters
    ----------
    a : ndarray
        Square Hermitian matrix (validated entrywise to tol.hermitian).

    Returns
    -------
    EigenDecomposition
        Eigenvalues sorted descending, eigenvector columns aligned.
    """
    h = require_hermitian(a, tol.hermitian)
    lam, v = np.linalg.eigh(h)
    return EigenDecomposition(eigenvalues=lam[::-1].copy(), eigenvectors=v[:, ::-1].copy())


def psd_project(a: np.ndarray, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Frobenius-nearest PSD matrix: clip negative eigenvalues to zero.

    The result is returned exactly Hermitian.  Projection of an already-PSD
    matrix reproduces it up to floating error.
    """
    h = require_hermitian(a, tol.hermitian)
    lam, v = np.linalg.eigh(h)
    np.clip(lam, 0.0, None, out=lam)
    return hermitize((v * lam) @ v.conj().T)


def signature(
    a: np.ndarray,
    zero_tol: float | None = None,
    tol: Tolerances = DEFAULT,
) -> tuple[int, int]:
    """Counts (n_plus, n_minus) of strictly positive / negative eigenvalues.

    Eigenvalues within [-zero_tol, zero_tol] count as zero.  The default
    zero_tol is 1e-9 * ||a||_F, so the split is scale invariant.
    """
    h = require_hermitian(a, tol.hermitian)
    if zero_tol is None:
        zero_tol = 1e-9 * np.linalg.norm(h)
    if zero_tol <= 0 and np.linalg.norm(h) > 0:
        raise ValueError("zero_tol must be positive")
    lam = np.linalg.eigvalsh(h)
    n_plus = int(np.sum(lam > zero_tol))
    n_minus = int(np.sum(lam < -zero_tol))
    return n_plus, n_minus


def frobenius_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def schatten_norm(a: np.ndarray, p: float = 2.0) -> float:
    """Schatten p-norm from singular values; p=2 equals the Frobenius norm."""
    s = np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)
    if np.isinf(p):
        return float(s[0]) if s.size else 0.0
    return float(np.sum(s**p) ** (1.0 / p))


def norms_and_trace(a: np.ndarray) -> tuple[float, complex]:
    """(Frobenius norm, trace) of a matrix; p-norms via schatten_norm on demand."""
    a = np.asarray(a, dtype=complex)
    return float(np.linalg.norm(a)), complex(np.trace(a))
