"""Spin-distribution sweeps over the seven-site FMO complex.

Every site j carries a bath of n_j spins (even counts, fixed total) with a
common splitting ``alpha`` and a common coupling ``gamma``.  For each
distribution and coupling the bath-averaged transfer probability is
maximized over a time window.

Coupling values are handled in rad/ps internally.  The published sweep
quotes couplings as numbers that act as wavenumber shifts per unit
magnetization, so the default grid is 0..200 cm^-1 in steps of 2, converted
with hbar (see :func:`default_gamma_grid`).

Site labels in records and CSV files are 1-based, as in the FMO literature;
the Python functions here take the same 1-based labels.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from .network import (
    FMO_SITES,
    alpha_from_ratio,
    alpha_over_kbt,
    beta_from_kelvin,
    cm_to_radps,
    fmo_hamiltonian,
)
from .spin_bath import magnetization_weights
from .transport import (
    SectorEnsemble,
    _grid_amplitudes,
    _parabolic_step,
    default_grid_points,
)

log = logging.getLogger(__name__)

DEFAULT_TOTAL_SPINS = 10
DEFAULT_ALPHA = 150.0  # rad/ps
DEFAULT_TEMPERATURE = 300.0
DEFAULT_WINDOW = 1.0  # ps
GAMMA_STEP_CM = 2.0
GAMMA_MAX_CM = 200.0
_CHUNK = 64

Distribution = Tuple[int, ...]
PathLike = Union[str, Path]


def default_gamma_grid(step_cm: float = GAMMA_STEP_CM, max_cm: float = GAMMA_MAX_CM) -> np.ndarray:
    """Couplings 0, step, ..., max (as wavenumbers) converted to rad/ps."""
    n = int(round(max_cm / step_cm)) + 1
    return cm_to_radps(np.arange(n) * step_cm)


def enumerate_even_distributions(total: int = DEFAULT_TOTAL_SPINS, sites: int = FMO_SITES) -> List[Distribution]:
    """All placements of ``total`` spins on ``sites`` sites in even counts.

    Lexicographic order, largest count on the first site first.
    """
    if total < 0 or total % 2:
        raise ValueError(f"total spin count must be even and non-negative, got {total}")
    pairs = total // 2
    out: List[Distribution] = []

    def place(prefix, remaining, left):
        if left == 1:
            out.append(tuple(prefix + [2 * remaining]))
            return
        for k in range(remaining, -1, -1):
            place(prefix + [2 * k], remaining - k, left - 1)

    place([], pairs, sites)
    return out


@dataclass(frozen=True)
class SweepRecord:
    distribution: Distribution
    gamma: float  # rad/ps
    max_probability: float
    argmax_time_ps: float
    initial_site: int
    final_site: int
    temperature_K: float
    alpha: float  # rad/ps

    @property
    def key(self):
        return record_key(
            self.distribution, self.gamma, self.initial_site, self.final_site,
            self.temperature_K, self.alpha,
        )

    def to_json(self) -> str:
        d = asdict(self)
        d["distribution"] = list(self.distribution)
        return json.dumps(d, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "SweepRecord":
        d = json.loads(line)
        d["distribution"] = tuple(d["distribution"])
        return cls(**d)


def _r12(x: float) -> float:
    return float(f"{x:.12g}")


def record_key(distribution, gamma, initial, final, T, alpha):
    return (tuple(distribution), f"{gamma:.12g}", initial, final, f"{T:.12g}", f"{alpha:.12g}")


# --------------------------------------------------------------------------- engine


def _sector_table(distributions: Sequence[Distribution], alpha: float, T: float):
    """Unique magnetization vectors across distributions and the weight matrix.

    Returns ``(M, W)`` with ``M`` of shape (U, sites) holding magnetizations
    and ``W`` a sparse (D, U) matrix of sector weights.
    """
    beta = math.inf if T == 0 else beta_from_kelvin(T)
    cache: Dict[int, List[Tuple[float, float]]] = {}
    index: Dict[Tuple[int, ...], int] = {}
    rows, cols, vals = [], [], []
    for d_idx, dist in enumerate(distributions):
        per_site = []
        for n in dist:
            if n not in cache:
                cache[n] = [(m, w) for m, w in sorted(magnetization_weights(n, alpha, beta).items()) if w > 0]
            per_site.append(cache[n])
        # iterate in lexicographic order of (m_1, ..., m_sites)
        combos = [((), 1.0)]
        for options in per_site:
            combos = [(key + (m,), w * p) for key, w in combos for m, p in options]
        for key, w in combos:
            ikey = tuple(int(round(2 * m)) for m in key)
            u = index.setdefault(ikey, len(index))
            rows.append(d_idx)
            cols.append(u)
            vals.append(w)
    M = np.array(sorted(index, key=index.get), dtype=float).reshape(len(index), -1) / 2.0
    W = sparse.csc_matrix((vals, (rows, cols)), shape=(len(distributions), len(index)))
    return M, W


def _sweep_gamma(args) -> List[SweepRecord]:
    (H, distributions, gamma, pairs, alpha, T, window, grid_points) = args
    M, W = _sector_table(distributions, alpha, T)
    ens = SectorEnsemble(H, gamma * M, np.ones(len(M)))
    dt = window / (grid_points - 1)
    times = np.linspace(0.0, window, grid_points)
    records = []
    for I, F in pairs:
        i0, f0 = I - 1, F - 1
        mix = np.zeros((len(distributions), grid_points))
        coeffs = ens._coefficients(i0, f0)
        for lo in range(0, len(M), _CHUNK):
            hi = min(lo + _CHUNK, len(M))
            amp = _grid_amplitudes(coeffs[lo:hi], ens.eigenvalues[lo:hi], dt, grid_points)
            mix += W[:, lo:hi] @ (amp.real**2 + amp.imag**2)
        W_csr = W.tocsr()
        for d_idx, dist in enumerate(distributions):
            row = W_csr.getrow(d_idx)
            sub = ens._slice(row.indices)
            sub.weights = row.data
            p = mix[d_idx]
            i = int(np.argmax(p))
            t_star, p_star = float(times[i]), float(p[i])
            if 0 < i < grid_points - 1:
                t_star, p_star = _parabolic_step(lambda t: sub.probability(i0, f0, t), times, p, i)
            records.append(
                SweepRecord(tuple(dist), _r12(gamma), _r12(p_star), _r12(t_star), I, F, _r12(T), _r12(alpha))
            )
    return records


def run_sweep(
    pairs: Sequence[Tuple[int, int]] = ((1, 3),),
    total_spins: int = DEFAULT_TOTAL_SPINS,
    gamma_grid: Optional[Sequence[float]] = None,
    alpha: float = DEFAULT_ALPHA,
    T: float = DEFAULT_TEMPERATURE,
    window: float = DEFAULT_WINDOW,
    grid_points: Optional[int] = None,
    distributions: Optional[Sequence[Distribution]] = None,
    records_path: Optional[PathLike] = None,
    jobs: int = 1,
    H: Optional[np.ndarray] = None,
    progress: Optional[Callable[[int, int], None]] = None,
) -> List[SweepRecord]:
    """Maximum transfer probability for every (distribution, coupling) pair.

    Parameters
    ----------
    pairs
        (initial, final) site labels, 1-based.
    gamma_grid
        Couplings in rad/ps; defaults to :func:`default_gamma_grid`.
    records_path
        Optional line-delimited record file.  Records already present are
        reused; new ones are appended one coupling at a time.
    jobs
        Worker processes; couplings are distributed across them and written
        back in grid order.

    Returns
    -------
    list of SweepRecord
        Coupling-major, then distribution order, then pair order.
    """
    H = fmo_hamiltonian("radps") if H is None else np.asarray(H, dtype=float)
    N = H.shape[0]
    for I, F in pairs:
        if not (1 <= I <= N and 1 <= F <= N) or I == F:
            raise ValueError(f"invalid site pair ({I}, {F}) for {N} sites")
    gamma_grid = default_gamma_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=float)
    if len(gamma_grid) == 0:
        raise ValueError("gamma grid is empty")
    if distributions is None:
        distributions = enumerate_even_distributions(total_spins, N)
    distributions = [tuple(d) for d in distributions]
    if grid_points is None:
        grid_points = default_grid_points(window)

    store = RecordStore(records_path) if records_path is not None else None
    have = store.load() if store else {}

    todo = []
    for g in gamma_grid:
        missing = [
            d for d in distributions
            if any(record_key(d, _r12(g), I, F, _r12(T), _r12(alpha)) not in have for I, F in pairs)
        ]
        if missing:
            todo.append((H, missing, float(g), tuple(pairs), alpha, T, window, grid_points))

    results: Dict[tuple, SweepRecord] = dict(have)
    done = 0
    for batch in _map(_sweep_gamma, todo, jobs):
        fresh = [r for r in batch if r.key not in results]
        for r in fresh:
            results[r.key] = r
        if store:
            store.append(fresh)
        done += 1
        if progress:
            progress(done, len(todo))

    out = []
    for g in gamma_grid:
        for d in distributions:
            for I, F in pairs:
                out.append(results[record_key(d, _r12(g), I, F, _r12(T), _r12(alpha))])
    return out


def sweep(I: int, F: int, **kwargs) -> List[SweepRecord]:
    """Single-pair form of :func:`run_sweep`."""
    return run_sweep(pairs=((I, F),), **kwargs)


def _map(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        for it in items:
            yield fn(it)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield from pool.map(fn, items)


class RecordStore:
    """Append-only line-delimited record file keyed by (distribution, gamma, ...)."""

    def __init__(self, path: PathLike):
        self.path = Path(path)

    def load(self) -> Dict[tuple, SweepRecord]:
        if not self.path.exists():
            return {}
        records: Dict[tuple, SweepRecord] = {}
        good_bytes = 0
        with self.path.open("rb") as fh:
            for raw in fh:
                if not raw.endswith(b"\n"):
                    break  # torn final line from an interrupted write
                try:
                    rec = SweepRecord.from_json(raw.decode())
                except (ValueError, TypeError, KeyError) as exc:
                    raise ValueError(f"{self.path}: corrupt record at byte {good_bytes}: {exc}") from exc
                records.setdefault(rec.key, rec)
                good_bytes += len(raw)
        if good_bytes != self.path.stat().st_size:
            log.warning("truncating torn record at end of %s", self.path)
            with self.path.open("r+b") as fh:
                fh.truncate(good_bytes)
        return records

    def append(self, records: Iterable[SweepRecord]) -> None:
        lines = [r.to_json() + "\n" for r in records]
        if not lines:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        try:
            with self.path.open("a") as fh:
                fh.writelines(lines)
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            first = json.loads(lines[0])
            raise OSError(
                f"could not write record distribution={first['distribution']} "
                f"gamma={first['gamma']} to {self.path}: {exc}"
            ) from exc


def read_records(path: PathLike) -> List[SweepRecord]:
    with Path(path).open() as fh:
        return [SweepRecord.from_json(line) for line in fh if line.strip()]


def write_records(records: Iterable[SweepRecord], path: PathLike) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")
    return path


# --------------------------------------------------------------------------- analysis


def best_by_distribution(records: Iterable[SweepRecord]) -> Dict[Distribution, SweepRecord]:
    """Highest-probability record of each distribution (ties go to the smaller coupling)."""
    best: Dict[Distribution, SweepRecord] = {}
    for r in records:
        cur = best.get(r.distribution)
        if cur is None or r.max_probability > cur.max_probability:
            best[r.distribution] = r
    return best


def ranked(records: Iterable[SweepRecord]) -> List[SweepRecord]:
    return sorted(best_by_distribution(records).values(), key=lambda r: (-r.max_probability, r.distribution))


def cumulative_distribution(
    records: Iterable[SweepRecord],
    predicate: Optional[Callable[[Distribution], bool]] = None,
) -> List[Tuple[float, int]]:
    """Sorted per-distribution maxima with their running count."""
    values = sorted(
        r.max_probability
        for d, r in best_by_distribution(records).items()
        if predicate is None or predicate(d)
    )
    return [(v, i + 1) for i, v in enumerate(values)]


def fraction_exceeding(
    records: Iterable[SweepRecord],
    threshold: float,
    predicate: Optional[Callable[[Distribution], bool]] = None,
) -> float:
    best = [
        r.max_probability
        for d, r in best_by_distribution(records).items()
        if predicate is None or predicate(d)
    ]
    if not best:
        raise ValueError("no distributions selected")
    return sum(v > threshold for v in best) / len(best)


def alpha_scan(
    I: int,
    F: int,
    distribution: Sequence[int],
    gamma: float,
    T: float,
    alpha_grid: Sequence[float],
    window: float = DEFAULT_WINDOW,
    grid_points: Optional[int] = None,
    H: Optional[np.ndarray] = None,
) -> List[Tuple[float, float]]:
    """(alpha/k_BT, max probability) for each bath splitting in ``alpha_grid`` (rad/ps)."""
    H = fmo_hamiltonian("radps") if H is None else np.asarray(H, dtype=float)
    if grid_points is None:
        grid_points = default_grid_points(window)
    out = []
    for a in alpha_grid:
        (rec,) = _sweep_gamma((H, [tuple(distribution)], float(gamma), ((I, F),), float(a), T, window, grid_points))
        ratio = alpha_over_kbt(a, T) if T > 0 else math.inf
        out.append((ratio, rec.max_probability))
    return out


def alpha_grid_from_ratios(ratios: Sequence[float], T: float) -> np.ndarray:
    return np.array([alpha_from_ratio(r, T) for r in ratios])


# --------------------------------------------------------------------------- CSV


def write_summary_csv(records: Iterable[SweepRecord], path: PathLike) -> Path:
    path = Path(path)
    best = ranked(records)
    sites = len(best[0].distribution) if best else FMO_SITES
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"n{i + 1}" for i in range(sites)] + ["best_gamma_radps", "max_probability", "argmax_time_ps"])
        for r in best:
            w.writerow(list(r.distribution) + [f"{r.gamma:.12g}", f"{r.max_probability:.12g}", f"{r.argmax_time_ps:.12g}"])
    return path


def write_cumulative_csv(cdf: Iterable[Tuple[float, int]], path: PathLike) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["max_probability", "cumulative_count"])
        for v, c in cdf:
            w.writerow([f"{v:.12g}", c])
    return path


def write_scan_csv(scan: Iterable[Tuple[float, float]], path: PathLike) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha_over_kbt", "max_probability"])
        for x, p in scan:
            w.writerow([f"{x:.12g}", f"{p:.12g}"])
    return path
