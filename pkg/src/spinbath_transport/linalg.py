"""Dense Hermitian kernels: eigendecomposition and unitary propagation.

All Hamiltonians in this package are small (dimension <= 32) dense Hermitian
matrices in rad/ps with hbar = 1, so time evolution is done through the
spectral decomposition rather than a series expansion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12


def check_hermitian(H, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``H`` as a complex square array, raising if it is not Hermitian.

    The tolerance is absolute for matrices with entries of order one and is
    scaled by the largest entry otherwise.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {H.shape}")
    diff = np.abs(H - H.conj().T)
    scale = max(1.0, float(np.abs(H).max()))
    worst = float(diff.max())
    if worst > tol * scale:
        i, j = np.unravel_index(int(diff.argmax()), diff.shape)
        raise ValueError(
            f"matrix is not Hermitian: |H[{i},{j}] - conj(H[{j},{i}])| = {worst:.3e} "
            f"(H[{i},{j}]={H[i, j]}, H[{j},{i}]={H[j, i]})"
        )
    return H


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    def propagator(self, t: float) -> np.ndarray:
        """exp(-iHt) as a dense matrix."""
        V = self.eigenvectors
        return (V * np.exp(-1j * self.eigenvalues * t)) @ V.conj().T

    def evolve(self, psi0, t: float) -> np.ndarray:
        V = self.eigenvectors
        coeffs = V.conj().T @ psi0
        return V @ (np.exp(-1j * self.eigenvalues * t) * coeffs)

    def amplitudes(self, final: int, initial: int, times) -> np.ndarray:
        """<final| exp(-iHt) |initial> sampled on ``times``."""
        V = self.eigenvectors
        c = V[final, :] * V[initial, :].conj()
        times = np.asarray(times, dtype=float)
        return np.exp(-1j * np.multiply.outer(times, self.eigenvalues)) @ c


def eigh(H) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    Raises
    ------
    ValueError
        If ``H`` is not square or departs from Hermiticity; the message names
        the worst offending entry pair.
    """
    H = check_hermitian(H)
    # LAPACK reads one triangle only; symmetrise so tiny asymmetries do not bias it.
    w, V = np.linalg.eigh(0.5 * (H + H.conj().T))
    return SpectralDecomposition(w, V)


def propagator(H, t: float) -> np.ndarray:
    return eigh(H).propagator(t)


def propagate(H, psi0, t: float) -> np.ndarray:
    """Evolve ``psi0`` for time ``t`` (ps) under ``H`` (rad/ps)."""
    psi0 = np.asarray(psi0, dtype=complex)
    H = np.asarray(H)
    if psi0.ndim != 1 or psi0.shape[0] != H.shape[0]:
        raise ValueError(
            f"state of length {psi0.shape} does not match Hamiltonian of shape {H.shape}"
        )
    if not np.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    return eigh(H).evolve(psi0, t)


def basis_state(dim: int, site: int) -> np.ndarray:
    psi = np.zeros(dim, dtype=complex)
    psi[site] = 1.0
    return psi
