"""Transfer probabilities, thermal bath mixtures and window maxima.

At finite temperature the network state is a mixture over bath sectors:
each sector evolves unitarily under the network Hamiltonian with its site
energies shifted by ``gamma * m``, and observables are weight-averaged over
sectors.  :class:`SectorEnsemble` holds the per-sector eigendecompositions so
that many times, site pairs or initial states can reuse them.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .linalg import check_hermitian, eigh
from .network import NetworkSpec
from .spin_bath import BathSpec, SectorWeight, sector_product

# samples per ps of window
GRID_DENSITY = 10_000
_BLOCK = 128
_SECTOR_CHUNK = 64

NetworkLike = Union[NetworkSpec, np.ndarray]


def _hamiltonian(network: NetworkLike) -> np.ndarray:
    if isinstance(network, NetworkSpec):
        return network.hamiltonian()
    return check_hermitian(network)


def _check_sites(N: int, I: int, F: int) -> None:
    for s in (I, F):
        if not 0 <= s < N:
            raise ValueError(f"site {s} outside network of {N} sites")
    if I == F:
        raise ValueError(f"initial and final site must differ (both {I})")


def default_grid_points(t_max: float) -> int:
    return max(2, int(math.ceil(GRID_DENSITY * t_max)) + 1)


def transfer_probability(H, I: int, F: int, t):
    """|<F| exp(-iHt) |I>|^2 for scalar or array ``t`` (ps), sites 0-based."""
    H = check_hermitian(H)
    _check_sites(H.shape[0], I, F)
    amp = eigh(H).amplitudes(F, I, t)
    p = amp.real**2 + amp.imag**2
    return float(p) if np.ndim(t) == 0 else p


def _grid_amplitudes(c: np.ndarray, lam: np.ndarray, dt: float, n: int) -> np.ndarray:
    """sum_k c[s,k] exp(-i lam[s,k] j dt) for j = 0..n-1, shape (S, n).

    The sample index is split as j = a*B + b so the exponentials factor into
    two short tables and the sum over k becomes a batched matrix product.
    """
    B = min(_BLOCK, n)
    nA = -(-n // B)
    ta = np.arange(nA) * (B * dt)
    tb = np.arange(B) * dt
    left = c[:, None, :] * np.exp(-1j * ta[None, :, None] * lam[:, None, :])
    right = np.exp(-1j * lam[:, :, None] * tb[None, None, :])
    return (left @ right).reshape(len(c), nA * B)[:, :n]


class SectorEnsemble:
    """A network Hamiltonian diagonalized under a weighted set of site shifts.

    Parameters
    ----------
    H : (N, N) array
        Bare network Hamiltonian, rad/ps.
    shifts : (S, N) array
        Site-energy shifts of each sector, rad/ps.
    weights : (S,) array
        Sector probabilities.
    """

    def __init__(self, H, shifts, weights):
        H = check_hermitian(H)
        shifts = np.atleast_2d(np.asarray(shifts, dtype=float))
        weights = np.asarray(weights, dtype=float)
        if shifts.shape != (len(weights), H.shape[0]):
            raise ValueError(
                f"shifts of shape {shifts.shape} do not match {len(weights)} sectors "
                f"on {H.shape[0]} sites"
            )
        self.H = H
        self.shifts = shifts
        self.weights = weights
        stack = np.repeat(H[None], len(weights), axis=0)
        idx = np.arange(H.shape[0])
        stack[:, idx, idx] += shifts
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(stack)

    @classmethod
    def from_baths(
        cls, network: NetworkLike, baths: Sequence[BathSpec], T: float, **kwargs
    ) -> "SectorEnsemble":
        H = _hamiltonian(network)
        N = H.shape[0]
        for b in baths:
            if b.site >= N:
                raise ValueError(f"bath on site {b.site} outside network of {N} sites")
        sectors = sector_product(baths, T, drop_zero=True, **kwargs)
        return cls.from_sectors(H, sectors)

    @classmethod
    def from_sectors(cls, H, sectors: Sequence[SectorWeight]) -> "SectorEnsemble":
        N = np.shape(H)[0]
        shifts = np.array([s.shift_vector(N) for s in sectors]).reshape(len(sectors), N)
        weights = np.array([s.weight for s in sectors])
        return cls(H, shifts, weights)

    @property
    def N(self) -> int:
        return self.H.shape[0]

    def __len__(self) -> int:
        return len(self.weights)

    def _coefficients(self, I: int, F: int) -> np.ndarray:
        V = self.eigenvectors
        return V[:, F, :] * V[:, I, :].conj()

    def sector_probabilities(self, I: int, F: int, times) -> np.ndarray:
        """Per-sector transfer probability, shape (S, len(times))."""
        _check_sites(self.N, I, F)
        times = np.atleast_1d(np.asarray(times, dtype=float))
        c = self._coefficients(I, F)
        amp = np.einsum("sk,stk->st", c, np.exp(-1j * times[None, :, None] * self.eigenvalues[:, None, :]))
        return amp.real**2 + amp.imag**2

    def probability(self, I: int, F: int, times):
        """Weighted mixture of sector transfer probabilities at arbitrary times."""
        scalar = np.ndim(times) == 0
        times = np.atleast_1d(np.asarray(times, dtype=float))
        total = np.zeros(len(times))
        for lo in range(0, len(self), _SECTOR_CHUNK):
            sl = slice(lo, lo + _SECTOR_CHUNK)
            sub = self._slice(sl)
            total += sub.weights @ sub.sector_probabilities(I, F, times)
        return float(total[0]) if scalar else total

    def grid_probability(self, I: int, F: int, t_max: float, grid_points: int) -> np.ndarray:
        """Mixture probability on ``linspace(0, t_max, grid_points)``."""
        _check_sites(self.N, I, F)
        dt = t_max / (grid_points - 1)
        total = np.zeros(grid_points)
        for lo in range(0, len(self), _SECTOR_CHUNK):
            sl = slice(lo, lo + _SECTOR_CHUNK)
            c = self._coefficients(I, F)[sl]
            amp = _grid_amplitudes(c, self.eigenvalues[sl], dt, grid_points)
            total += self.weights[sl] @ (amp.real**2 + amp.imag**2)
        return total

    def density_matrix(self, psi0, t: float) -> np.ndarray:
        """sum_s w_s |psi_s(t)><psi_s(t)| for the common initial state ``psi0``."""
        psi0 = np.asarray(psi0, dtype=complex)
        V, lam = self.eigenvectors, self.eigenvalues
        coeffs = np.einsum("snk,n->sk", V.conj(), psi0)
        psi_t = np.einsum("snk,sk->sn", V, np.exp(-1j * lam * t) * coeffs)
        return np.einsum("s,sa,sb->ab", self.weights, psi_t, psi_t.conj())

    def _slice(self, sl: slice) -> "SectorEnsemble":
        sub = object.__new__(SectorEnsemble)
        sub.H = self.H
        sub.shifts = self.shifts[sl]
        sub.weights = self.weights[sl]
        sub.eigenvalues = self.eigenvalues[sl]
        sub.eigenvectors = self.eigenvectors[sl]
        return sub


def thermal_transfer_probability(
    network: NetworkLike, baths: Sequence[BathSpec], T: float, I: int, F: int, t
):
    """Bath-averaged transfer probability at temperature ``T`` kelvin (0 allowed)."""
    return SectorEnsemble.from_baths(network, baths, T).probability(I, F, t)


def reduced_density_matrix(
    network: NetworkLike, baths: Sequence[BathSpec], T: float, psi0, t: float
) -> np.ndarray:
    """Network state after tracing out the baths."""
    ens = SectorEnsemble.from_baths(network, baths, T)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (ens.N,):
        raise ValueError(f"state of shape {psi0.shape} does not match {ens.N} sites")
    if abs(np.vdot(psi0, psi0).real - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")
    return ens.density_matrix(psi0, t)


def coherence(rho, a: int, b: int, floor: float = 1e-12) -> float:
    """|rho_ab|^2 / (rho_aa rho_bb); NaN when either population is below ``floor``."""
    if a == b:
        raise ValueError("coherence needs two distinct sites")
    rho = np.asarray(rho)
    paa, pbb = rho[a, a].real, rho[b, b].real
    if paa < floor or pbb < floor:
        return math.nan
    return float(abs(rho[a, b]) ** 2 / (paa * pbb))


def max_over_window(
    evaluator: Callable[[np.ndarray], np.ndarray],
    t_max: float,
    grid_points: Optional[int] = None,
    refine: bool = True,
    values: Optional[np.ndarray] = None,
) -> Tuple[float, float]:
    """Locate the maximum of ``evaluator`` on ``[0, t_max]``.

    The evaluator is sampled on a uniform grid including both endpoints; with
    ``refine`` a parabola through the best sample and its neighbours gives a
    candidate time, kept only if it does not lower the maximum.  Pass
    precomputed grid ``values`` to skip the coarse evaluation.

    Returns
    -------
    (t_star, p_star)
    """
    if t_max <= 0:
        raise ValueError(f"window must be positive, got {t_max}")
    if grid_points is None:
        grid_points = default_grid_points(t_max)
    if grid_points < 2:
        raise ValueError("need at least 2 grid points")
    times = np.linspace(0.0, t_max, grid_points)
    p = np.asarray(evaluator(times) if values is None else values, dtype=float)
    i = int(np.argmax(p))
    t_star, p_star = float(times[i]), float(p[i])
    if refine and 0 < i < grid_points - 1:
        t_star, p_star = _parabolic_step(evaluator, times, p, i)
    return t_star, p_star


def _parabolic_step(evaluator, times, p, i) -> Tuple[float, float]:
    h = times[1] - times[0]
    y0, y1, y2 = p[i - 1], p[i], p[i + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom >= 0:
        return float(times[i]), float(y1)
    t_new = times[i] + 0.5 * h * (y0 - y2) / denom
    p_new = float(np.asarray(evaluator(np.array([t_new])), dtype=float).reshape(-1)[0])
    if p_new >= y1:
        return float(t_new), p_new
    return float(times[i]), float(y1)


@dataclass(frozen=True)
class TransferSeries:
    times: np.ndarray
    probabilities: np.ndarray
    max_probability: float
    argmax_time: float

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t_ps", "probability"])
            for t, p in zip(self.times, self.probabilities):
                writer.writerow([f"{t:.12g}", f"{p:.12g}"])
        return path


def _series(evaluator, grid_eval, t_max, grid_points, refine) -> TransferSeries:
    if grid_points is None:
        grid_points = default_grid_points(t_max)
    times = np.linspace(0.0, t_max, grid_points)
    values = grid_eval(grid_points)
    t_star, p_star = max_over_window(evaluator, t_max, grid_points, refine, values=values)
    return TransferSeries(times, values, p_star, t_star)


def transfer_series(
    H, I: int, F: int, t_max: float, grid_points: Optional[int] = None, refine: bool = True
) -> TransferSeries:
    """Coherent transfer probability sampled over ``[0, t_max]`` with its maximum."""
    ens = SectorEnsemble(H, np.zeros((1, np.shape(H)[0])), [1.0])
    return ensemble_series(ens, I, F, t_max, grid_points, refine)


def ensemble_series(
    ens: SectorEnsemble,
    I: int,
    F: int,
    t_max: float,
    grid_points: Optional[int] = None,
    refine: bool = True,
) -> TransferSeries:
    return _series(
        lambda t: ens.probability(I, F, t),
        lambda n: ens.grid_probability(I, F, t_max, n),
        t_max,
        grid_points,
        refine,
    )


def thermal_transfer_series(
    network: NetworkLike,
    baths: Sequence[BathSpec],
    T: float,
    I: int,
    F: int,
    t_max: float,
    grid_points: Optional[int] = None,
    refine: bool = True,
) -> TransferSeries:
    ens = SectorEnsemble.from_baths(network, baths, T)
    return ensemble_series(ens, I, F, t_max, grid_points, refine)
