"""Thermodynamics of finite spin-1/2 baths that dephase network sites.

A bath of ``n`` spins with level splitting ``alpha`` couples to its site
through ``gamma * |site><site| * S_z``.  Because that coupling commutes with
the bath Hamiltonian, the dynamics only see the magnetization ``m`` of each
bath: a bath in sector ``m`` shifts its site energy by ``gamma * m``.
Sectors are therefore keyed by ``m`` with binomial multiplicities instead of
by the full collective labels ``(j, m)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence

import numpy as np

from .network import beta_from_kelvin

DEFAULT_MAX_SPINS = 24


def _twice(j) -> int:
    tj = 2 * j
    if abs(tj - round(tj)) > 1e-9:
        raise ValueError(f"total spin must be a half-integer, got {j}")
    return int(round(tj))


@lru_cache(maxsize=None)
def _degeneracy(n: int, tj: int) -> int:
    # tj = 2j; terms with an invalid j read as zero
    if tj < 0 or tj > n or (n - tj) % 2:
        return 0
    if n == 0:
        return 1
    if n == 1:
        return 1
    return _degeneracy(n - 1, tj - 1) + _degeneracy(n - 1, tj + 1)


def degeneracy(n: int, j) -> int:
    """Number of total-spin-``j`` multiplets among ``n`` spin-1/2 particles."""
    tj = _twice(j)
    if n < 0 or tj < 0 or tj > n or (n - tj) % 2:
        raise ValueError(f"invalid (n, j) = ({n}, {j}): j must be in n/2, n/2-1, ..., >= 0")
    return _degeneracy(n, tj)


def total_spins(n: int) -> List[float]:
    """Allowed total spins n/2, n/2 - 1, ..., down to 0 or 1/2."""
    return [tj / 2 for tj in range(n, -1, -2)]


def magnetizations(n: int) -> np.ndarray:
    """Ascending magnetization values -n/2, ..., n/2."""
    return np.arange(n + 1) - n / 2


def partition_function(n: int, alpha: float, beta: float) -> float:
    """Partition function of an ``n``-spin bath from the multiplet-resolved sum.

    Each multiplet ``j`` contributes ``nu(n, j) sinh(beta*alpha*(j+1/2)) /
    sinh(beta*alpha/2)``; for ``alpha*beta == 0`` that ratio is ``2j + 1``.
    The result equals ``(2 cosh(beta*alpha/2))**n``.
    """
    if n < 0:
        raise ValueError(f"spin count must be non-negative, got n={n}")
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    if n == 0:
        return 1.0
    x = beta * alpha
    total = 0.0
    for j in total_spins(n):
        nu = _degeneracy(n, int(2 * j))
        if abs(x) < 1e-8:
            # ratio is (2j+1)(1 + O(x^2)); avoids sinh underflow on tiny x
            total += nu * (2 * j + 1)
        else:
            total += nu * math.sinh(x * (j + 0.5)) / math.sinh(x / 2)
    return total


def magnetization_weights(n: int, alpha: float, beta: float) -> Dict[float, float]:
    """Thermal probability of each bath magnetization ``m``.

    ``weight(m) = C(n, n/2 - m) exp(-beta*alpha*m) / Z``.  ``beta`` may be
    ``inf`` for the ground state; for ``alpha == 0`` the bath is degenerate
    and the weights are binomial at any temperature.
    """
    if n < 0:
        raise ValueError(f"spin count must be non-negative, got {n}")
    if beta < 0:
        raise ValueError(f"beta must be non-negative, got {beta}")
    ms = magnetizations(n)
    if n == 0:
        return {0.0: 1.0}
    if math.isinf(beta) and alpha != 0:
        ground = ms[0] if alpha > 0 else ms[-1]
        return {float(m): float(m == ground) for m in ms}
    log_w = np.array([math.log(math.comb(n, k)) for k in range(n, -1, -1)])
    if alpha != 0:
        log_w = log_w - beta * alpha * ms
    log_w -= log_w.max()
    w = np.exp(log_w)
    w /= w.sum()
    return {float(m): float(p) for m, p in zip(ms, w)}


@dataclass(frozen=True)
class BathSpec:
    """A bath of ``n`` spins with splitting ``alpha`` and coupling ``gamma`` on ``site``."""

    n: int
    alpha: float
    gamma: float
    site: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"spin count must be non-negative, got {self.n}")
        if self.site < 0:
            raise ValueError(f"site index must be non-negative, got {self.site}")


@dataclass(frozen=True)
class SectorWeight:
    """One joint magnetization configuration of all baths."""

    m_values: tuple
    weight: float
    shifts: tuple  # (site, gamma * m) per bath

    def shift_vector(self, N: int) -> np.ndarray:
        out = np.zeros(N)
        for site, s in self.shifts:
            out[site] += s
        return out


def bath_weights(bath: BathSpec, T: float) -> Dict[float, float]:
    """Magnetization weights of one bath at temperature ``T`` kelvin (0 allowed)."""
    if T < 0:
        raise ValueError(f"temperature must be non-negative, got {T} K")
    beta = math.inf if T == 0 else beta_from_kelvin(T)
    return magnetization_weights(bath.n, bath.alpha, beta)


def sector_product(
    baths: Sequence[BathSpec],
    T: float,
    max_spins: int = DEFAULT_MAX_SPINS,
    drop_zero: bool = False,
) -> List[SectorWeight]:
    """Enumerate joint bath sectors with product weights and site shifts.

    Sectors come out in lexicographic order of their magnetizations.  With
    ``drop_zero`` the exactly-zero-weight sectors (T = 0) are omitted.

    Raises
    ------
    ValueError
        If the baths hold more than ``max_spins`` spins in total.
    """
    spins = sum(b.n for b in baths)
    if spins > max_spins:
        count = math.prod(b.n + 1 for b in baths)
        raise ValueError(
            f"{spins} bath spins ({count} sectors) exceed the configured limit of {max_spins}"
        )
    per_bath = [sorted(bath_weights(b, T).items()) for b in baths]
    sectors = []
    for combo in itertools.product(*per_bath):
        weight = math.prod(p for _, p in combo)
        if drop_zero and weight == 0.0:
            continue
        m_values = tuple(m for m, _ in combo)
        shifts = tuple((b.site, b.gamma * m) for b, m in zip(baths, m_values))
        sectors.append(SectorWeight(m_values, weight, shifts))
    return sectors
