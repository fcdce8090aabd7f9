"""Network Hamiltonians and unit conversions.

Everything is computed in rad/ps with hbar = 1.  Wavenumbers (cm^-1) only
appear when building the FMO matrix and when reporting.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from scipy import constants

# hbar in cm^-1 ps: 1e12 / (2 pi c[cm/s])
HBAR_CM_PS = 1e12 / (2.0 * math.pi * constants.c * 100.0)
# Boltzmann constant in cm^-1 / K
KB_CM_PER_K = constants.k / (constants.h * constants.c * 100.0)

# FMO site energies and couplings, cm^-1, zero shifted by 12210 cm^-1.
_FMO_CM = (
    (200.0, -96.0, 5.0, -4.4, 4.7, -12.6, -6.2),
    (-96.0, 320.0, 33.1, 6.8, 4.5, 7.4, -0.3),
    (5.0, 33.1, 0.0, -51.1, 0.8, -8.4, 7.6),
    (-4.4, 6.8, -51.1, 110.0, -76.6, -14.2, -67.0),
    (4.7, 4.5, 0.8, -76.6, 270.0, 78.3, -0.1),
    (-12.6, 7.4, -8.4, -14.2, 78.3, 420.0, 38.3),
    (-6.2, -0.3, 7.6, -67.0, -0.1, 38.3, 230.0),
)
FMO_SITES = 7


@dataclass(frozen=True)
class UnitConstants:
    hbar_cm_ps: float = HBAR_CM_PS
    kB_cm_per_K: float = KB_CM_PER_K


def cm_to_radps(x):
    """Convert an energy in cm^-1 to an angular frequency in rad/ps."""
    return np.asarray(x, dtype=float) / HBAR_CM_PS if np.ndim(x) else float(x) / HBAR_CM_PS


def radps_to_cm(x):
    return np.asarray(x, dtype=float) * HBAR_CM_PS if np.ndim(x) else float(x) * HBAR_CM_PS


def kelvin_to_radps(T: float) -> float:
    """k_B T expressed as an angular frequency."""
    return KB_CM_PER_K * T / HBAR_CM_PS


def beta_from_kelvin(T: float) -> float:
    """Inverse temperature in units of 1/(rad/ps)."""
    if T <= 0:
        raise ValueError(f"temperature must be positive, got {T} K")
    return 1.0 / kelvin_to_radps(T)


def alpha_over_kbt(alpha: float, T: float) -> float:
    """Dimensionless ratio hbar*alpha / (k_B T) for ``alpha`` in rad/ps."""
    return alpha * beta_from_kelvin(T)


def alpha_from_ratio(ratio: float, T: float) -> float:
    """Inverse of :func:`alpha_over_kbt`."""
    return ratio * kelvin_to_radps(T)


def fully_connected(N: int, eps: float, J: float) -> np.ndarray:
    """Homogeneous fully connected network: diagonal ``eps``, every coupling ``J``."""
    if N < 2:
        raise ValueError(f"a network needs at least 2 sites, got N={N}")
    H = np.full((N, N), float(J))
    np.fill_diagonal(H, float(eps))
    return H


def blocked_fully_connected(
    block_sizes: Sequence[int], block_energies: Sequence[float], J: float
) -> np.ndarray:
    """Fully connected network whose site energies are constant within blocks."""
    if len(block_sizes) != len(block_energies):
        raise ValueError(
            f"{len(block_sizes)} block sizes but {len(block_energies)} block energies"
        )
    if any(k < 1 for k in block_sizes):
        raise ValueError(f"block sizes must be >= 1, got {list(block_sizes)}")
    diag = np.repeat(np.asarray(block_energies, dtype=float), block_sizes)
    H = fully_connected(len(diag), 0.0, J)
    np.fill_diagonal(H, diag)
    return H


def fmo_hamiltonian(units: str = "cm") -> np.ndarray:
    """The 7-site FMO excitonic Hamiltonian.

    Parameters
    ----------
    units : {"cm", "radps"}
        ``"cm"`` returns the printed wavenumbers, ``"radps"`` the matrix
        divided by hbar.
    """
    H = np.array(_FMO_CM, dtype=float)
    if units == "cm":
        return H
    if units == "radps":
        return H / HBAR_CM_PS
    raise ValueError(f"unknown units {units!r}; use 'cm' or 'radps'")


def write_fmo_csv(path: Union[str, Path]) -> Path:
    """Write the FMO matrix (cm^-1) as 7 comma-separated rows."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        for row in _FMO_CM:
            writer.writerow([f"{v:g}" for v in row])
    return path


@dataclass(frozen=True)
class NetworkSpec:
    """Site energies plus either a homogeneous coupling or a full coupling matrix.

    All values in rad/ps.
    """

    site_energies: tuple
    coupling: Union[float, np.ndarray]

    def __post_init__(self):
        energies = tuple(float(e) for e in self.site_energies)
        object.__setattr__(self, "site_energies", energies)
        if len(energies) < 2:
            raise ValueError("a network needs at least 2 sites")
        if np.ndim(self.coupling):
            C = np.array(self.coupling, dtype=float)
            if C.shape != (self.N, self.N):
                raise ValueError(f"coupling matrix shape {C.shape} does not match N={self.N}")
            if not np.allclose(C, C.T, atol=1e-12) or np.any(np.diag(C) != 0):
                raise ValueError("coupling matrix must be symmetric with zero diagonal")
            C.setflags(write=False)
            object.__setattr__(self, "coupling", C)

    @property
    def N(self) -> int:
        return len(self.site_energies)

    def hamiltonian(self) -> np.ndarray:
        if np.ndim(self.coupling):
            H = np.array(self.coupling, dtype=float)
        else:
            H = np.full((self.N, self.N), float(self.coupling))
        np.fill_diagonal(H, self.site_energies)
        return H

    @classmethod
    def homogeneous(cls, N: int, eps: float, J: float) -> "NetworkSpec":
        return cls((eps,) * N, J)

    @classmethod
    def from_hamiltonian(cls, H) -> "NetworkSpec":
        H = np.asarray(H, dtype=float)
        C = H.copy()
        np.fill_diagonal(C, 0.0)
        return cls(tuple(np.diag(H)), C)

    @classmethod
    def fmo(cls) -> "NetworkSpec":
        return cls.from_hamiltonian(fmo_hamiltonian("radps"))
