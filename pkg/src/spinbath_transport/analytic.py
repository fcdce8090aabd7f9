"""Closed forms for homogeneous fully connected networks with shifted sites.

These serve both as fast paths and as cross-checks of the numerical
pipeline.  Site indices are 0-based; a "symmetric block" is always the
first ``k`` sites of the network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .linalg import check_hermitian, eigh
from .network import blocked_fully_connected, fully_connected

COUNTEREXAMPLE_BLOCKS = (21, 6, 1)
COUNTEREXAMPLE_ENERGIES = (0.0, 63.0 / 5.0, 112.0 / 5.0)
# 441/4 * P oscillates with period 10*pi/J: every frequency is a multiple of 21/5
COUNTEREXAMPLE_PERIOD = 10.0 * math.pi


def dimer_max_probability(
    eps1: float, eps2: float, J: float, shift1: float = 0.0, shift2: float = 0.0
) -> float:
    """Maximum over time of the dimer transfer probability, J^2 / (J^2 + D^2).

    ``D`` is half the difference of the shifted site energies.
    """
    delta = ((eps2 + shift2) - (eps1 + shift1)) / 2.0
    if J == 0:
        if delta == 0:
            raise ValueError("J = 0 with equal energies: the excitation never moves")
        return 0.0
    return J**2 / (J**2 + delta**2)


def symmetric_transfer(N: int, J: float, t):
    """(4/N^2) sin^2(N J t / 2): transfer between any two sites of a uniform network."""
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    return 4.0 / N**2 * np.sin(N * J * np.asarray(t) / 2.0) ** 2


def fourier_state(k: int, m: int, N: int) -> np.ndarray:
    """(1/sqrt k) sum_{j<k} w^{m(j+1)} |j>, w = exp(2 pi i / k)."""
    v = np.zeros(N, dtype=complex)
    j = np.arange(1, k + 1)
    v[:k] = np.exp(2j * np.pi * m * j / k) / math.sqrt(k)
    return v


@dataclass(frozen=True)
class PartialDiagonalization:
    U: np.ndarray
    H_rot: np.ndarray
    active_dim: int

    @property
    def active_block(self) -> np.ndarray:
        a = self.active_dim
        return self.H_rot[:a, :a]


def partial_diagonalization(H, k: int, tol: float = 1e-12) -> PartialDiagonalization:
    """Collapse the symmetric block of the first ``k`` sites.

    Row 0 of ``U`` is the uniform superposition over the block, rows
    1..N-k carry the remaining sites unchanged, and the last k-1 rows are the
    Fourier states of the block, which are eigenstates with energy eps - J.
    """
    H = check_hermitian(H)
    N = H.shape[0]
    if not 1 <= k <= N:
        raise ValueError(f"block size k={k} must lie in 1..{N}")
    diag = np.diag(H).real
    if np.ptp(diag[:k]) > tol * max(1.0, abs(diag[0])):
        raise ValueError(f"sites 0..{k - 1} do not share one energy: {diag[:k]}")
    off = H[:k][~np.eye(N, dtype=bool)[:k]]
    if k > 1 and np.ptp(off.real) > tol * max(1.0, abs(H[0, 1])):
        raise ValueError("sites of the symmetric block must couple homogeneously")
    U = np.zeros((N, N), dtype=complex)
    U[0, :k] = 1.0 / math.sqrt(k)
    for n in range(N - k):
        U[n + 1, n + k] = 1.0
    for m in range(1, k):
        U[N - k + m, :] = fourier_state(k, m, N).conj()
    H_rot = U @ H @ U.conj().T
    return PartialDiagonalization(U, H_rot, N - k + 1)


def one_bath_resonant_max(N: int, eps: float, J: float) -> Tuple[float, float]:
    """Resonant bath-site energy eps + (N-2)J and the resulting maximum 1/(N-1).

    The maximum is first reached at t = pi / (2 sqrt(N-1) J).
    """
    if N < 3:
        raise ValueError(f"N must be >= 3, got {N}")
    return eps + (N - 2) * J, 1.0 / (N - 1)


def one_bath_resonant_time(N: int, J: float) -> float:
    return math.pi / (2.0 * math.sqrt(N - 1) * abs(J))


def two_bath_hamiltonian(N: int, eps: float, J: float, eps1: float, eps2: float) -> np.ndarray:
    """Uniform network whose last two sites (I = N-2, F = N-1) are shifted."""
    H = fully_connected(N, eps, J)
    H[N - 2, N - 2] = eps1
    H[N - 1, N - 1] = eps2
    return H


@dataclass(frozen=True)
class TwoBathCoefficients:
    """c_j = <F|l_j><l_j|I> for the three eigenstates of the active block.

    ``c_antisym`` belongs to the eigenstate with least weight on the uniform
    superposition (exactly (|I> - |F>)/sqrt 2 when eps1 == eps2); the other
    two are ordered by eigenvalue.
    """

    c_antisym: complex
    c_low: complex
    c_high: complex
    eigenvalues: np.ndarray  # antisym, low, high

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.c_antisym, self.c_low, self.c_high])

    def probability(self, t):
        t = np.asarray(t, dtype=float)
        amp = np.exp(-1j * np.multiply.outer(t, self.eigenvalues)) @ self.coefficients
        return np.abs(amp) ** 2


def two_bath_coefficients(
    N: int, eps: float, J: float, eps1: float, eps2: float
) -> TwoBathCoefficients:
    if N < 3:
        raise ValueError(f"N must be >= 3, got {N}")
    pd = partial_diagonalization(two_bath_hamiltonian(N, eps, J, eps1, eps2), N - 2)
    dec = eigh(pd.active_block)
    V = dec.eigenvectors
    # in the rotated basis I -> index 1, F -> index 2, uniform state -> index 0
    c = V[2, :] * V[1, :].conj()
    anti = int(np.argmin(np.abs(V[0, :])))
    rest = [i for i in range(3) if i != anti]
    order = [anti] + rest
    return TwoBathCoefficients(c[anti], c[rest[0]], c[rest[1]], dec.eigenvalues[order])


def _symmetric_block_params(H, k: int) -> Tuple[float, float]:
    H = np.asarray(H)
    if k < 2:
        raise ValueError(f"the bath-free block needs k >= 2, got {k}")
    return float(H[0, 0].real), float(H[0, 1].real)


def phi_return_amplitude(H, k: int, t):
    """<phi| exp(-iHt) |phi> via the active block of the rotated Hamiltonian."""
    pd = partial_diagonalization(H, k)
    dec = eigh(pd.active_block)
    v = dec.eigenvectors[0, :]
    return np.exp(-1j * np.multiply.outer(np.asarray(t, dtype=float), dec.eigenvalues)) @ (
        np.abs(v) ** 2
    )


def intermediate_bath_probability(k: int, H, I: int, F: int, t):
    """Transfer between two bath-free sites of the symmetric block ``0..k-1``.

    P = (1/k^2) |1 - exp(it(eps - J)) <phi| exp(-iHt) |phi>|^2.
    """
    H = check_hermitian(H)
    if not (0 <= I < k and 0 <= F < k) or I == F:
        raise ValueError(f"I={I} and F={F} must be distinct sites of the block 0..{k - 1}")
    eps, J = _symmetric_block_params(H, k)
    ret = phi_return_amplitude(H, k, t)
    return np.abs(1.0 - np.exp(1j * np.asarray(t) * (eps - J)) * ret) ** 2 / k**2


def intermediate_bath_hamiltonian(
    k: int, eps: float, J: float, shifted_energies
) -> np.ndarray:
    """Uniform network of ``k`` bath-free sites followed by sites with given energies."""
    shifted = list(shifted_energies)
    H = fully_connected(k + len(shifted), eps, J)
    for i, e in enumerate(shifted):
        H[k + i, k + i] = e
    return H


def three_level_return_amplitude(J1: float, J2: float, t):
    """<1| exp(-iHt) |1> for the chain 1 -J1- 2 -J2- 3."""
    if J1 == 0 and J2 == 0:
        raise ValueError("J1 and J2 cannot both vanish")
    s = J1**2 + J2**2
    return (J2**2 + J1**2 * np.cos(np.sqrt(s) * np.asarray(t))) / s


def counterexample_hamiltonian(J: float = 1.0) -> np.ndarray:
    """28-site blocked network whose block-1 transfer never reaches 4/21^2."""
    return blocked_fully_connected(
        COUNTEREXAMPLE_BLOCKS, [e * J for e in COUNTEREXAMPLE_ENERGIES], J
    )


def counterexample_probability(t):
    """Closed-form transfer probability between two block-1 sites (t in units of 1/J)."""
    t = np.asarray(t, dtype=float)
    return (
        2091.0
        - 1350.0 * np.cos(42.0 * t / 5.0)
        + 200.0 * np.cos(63.0 * t / 5.0)
        - 216.0 * np.cos(21.0 * t)
        + 625.0 * np.cos(126.0 * t / 5.0)
        - 1350.0 * np.cos(168.0 * t / 5.0)
    ) / 642978.0
