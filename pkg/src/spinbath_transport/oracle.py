"""Brute-force references that avoid collective-spin bookkeeping.

Everything here enumerates individual spin product states or builds explicit
spin operators, so agreement with :mod:`spin_bath` and :mod:`transport` is an
independent check.  Cost is exponential in the number of spins by design.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from functools import reduce
from typing import Dict, Sequence

import numpy as np

from .network import NetworkSpec, beta_from_kelvin
from .spin_bath import BathSpec

MAX_ORACLE_SPINS = 12
MAX_MULTIPLICITY_SPINS = 8


def brute_force_thermal_transfer(
    network, baths: Sequence[BathSpec], T: float, I: int, F: int, t: float
) -> float:
    """Average transfer probability over all 2**sum(n) bath product states.

    Each spin with projection s = +-1/2 has energy ``alpha*s`` and shifts its
    site by ``gamma*s``.  At ``T == 0`` the average runs over the ground
    product states only.
    """
    H0 = network.hamiltonian() if isinstance(network, NetworkSpec) else np.asarray(network, dtype=float)
    spins = [(b, k) for b in baths for k in range(b.n)]
    if len(spins) > MAX_ORACLE_SPINS:
        raise ValueError(f"{len(spins)} spins exceed the oracle budget of {MAX_ORACLE_SPINS}")
    states = list(itertools.product((-0.5, 0.5), repeat=len(spins)))
    energies = np.array([sum(b.alpha * s for (b, _), s in zip(spins, st)) for st in states])
    if T == 0:
        ground = np.isclose(energies, energies.min(), rtol=0, atol=1e-12)
        weights = ground / ground.sum()
    else:
        beta = beta_from_kelvin(T)
        weights = np.exp(-beta * (energies - energies.min()))
        weights /= weights.sum()
    total = 0.0
    for w, st in zip(weights, states):
        if w == 0.0:
            continue
        H = H0.astype(complex).copy()
        for (b, _), s in zip(spins, st):
            H[b.site, b.site] += b.gamma * s
        vals, vecs = np.linalg.eigh(H)
        amp = np.sum(vecs[F, :] * vecs[I, :].conj() * np.exp(-1j * vals * t))
        total += w * abs(amp) ** 2
    return float(total)


def _collective_spin_squared(n: int) -> np.ndarray:
    sx = np.array([[0, 0.5], [0.5, 0]], dtype=complex)
    sy = np.array([[0, -0.5j], [0.5j, 0]], dtype=complex)
    sz = np.array([[0.5, 0], [0, -0.5]], dtype=complex)
    eye = np.eye(2)

    def embed(op, k):
        return reduce(np.kron, [op if i == k else eye for i in range(n)])

    total = np.zeros((2**n, 2**n), dtype=complex)
    for op in (sx, sy, sz):
        S = sum(embed(op, k) for k in range(n))
        total += S @ S
    return total


def brute_force_multiplicities(n: int) -> Dict[float, int]:
    """Multiplets of total spin ``j`` found by diagonalizing the collective S^2."""
    if not 1 <= n <= MAX_MULTIPLICITY_SPINS:
        raise ValueError(f"n must be in 1..{MAX_MULTIPLICITY_SPINS}, got {n}")
    eig = np.linalg.eigvalsh(_collective_spin_squared(n))
    # j(j+1) = x  ->  j = (-1 + sqrt(1 + 4x)) / 2
    js = np.round(-0.5 + 0.5 * np.sqrt(1.0 + 4.0 * np.clip(eig, 0, None)), 6)
    counts = Counter(float(j) for j in js)
    out = {}
    for j, c in counts.items():
        dim = int(round(2 * j + 1))
        if c % dim:
            raise RuntimeError(f"eigenvalue count {c} for j={j} is not a multiple of {dim}")
        out[j] = c // dim
    return dict(sorted(out.items(), reverse=True))


def brute_force_magnetization_weights(n: int, alpha: float, beta: float) -> Dict[float, float]:
    """Boltzmann weights of total S_z summed over all 2**n product states."""
    acc: Dict[float, float] = {}
    for st in itertools.product((-0.5, 0.5), repeat=n):
        m = float(sum(st))
        acc[m] = acc.get(m, 0.0) + math.exp(-beta * alpha * m)
    Z = sum(acc.values())
    return {m: w / Z for m, w in sorted(acc.items())}
