"""Command-line front end.

Every subcommand prints ``key=value`` lines and writes CSV files into
``--out``.  Energies and couplings are read in rad/ps unless ``--units cm``
is given.  A flat ``key=value`` file passed with ``--config`` supplies
defaults that explicit flags override.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import analytic, fmo, oracle
from .linalg import propagate
from .network import (
    alpha_over_kbt,
    cm_to_radps,
    fully_connected,
    radps_to_cm,
)
from .spin_bath import BathSpec, degeneracy, magnetization_weights, partition_function
from .transport import (
    SectorEnsemble,
    ensemble_series,
    thermal_transfer_probability,
    transfer_series,
)

log = logging.getLogger("spinbath_transport")

ENERGY_FLAGS = ("j", "eps", "eps1", "eps2", "alpha", "gamma", "gamma_max", "gamma_step")


def _floats(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def read_config(path: Path) -> Dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _emit(**items) -> None:
    for k, v in items.items():
        if isinstance(v, float):
            v = f"{v:.10g}"
        print(f"{k}={v}")


def _to_radps(args, value):
    if value is None:
        return None
    return cm_to_radps(value) if args.units == "cm" else value


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


# --------------------------------------------------------------------------- dimer


def cmd_dimer(args) -> int:
    J = _to_radps(args, args.j)
    eps1, eps2 = _to_radps(args, args.eps1), _to_radps(args, args.eps2)
    alpha = _to_radps(args, args.alpha)
    gmax, gstep = _to_radps(args, args.gamma_max), _to_radps(args, args.gamma_step)
    n1, n2 = _ints(args.nspins)
    H = np.array([[eps1, J], [J, eps2]], dtype=float)
    window = args.window or 2.0 * math.pi / abs(J)
    gammas = _grid(0.0, gmax, gstep)
    rows = []
    best = (-1.0, 0.0, 0.0)
    for g1 in gammas:
        for g2 in gammas:
            baths = [BathSpec(n1, alpha, g1, 0), BathSpec(n2, alpha, g2, 1)]
            ens = SectorEnsemble.from_baths(H, baths, args.temp)
            s = ensemble_series(ens, 0, 1, window, args.grid_points)
            rows.append((g1, g2, s.max_probability))
            if s.max_probability > best[0]:
                best = (s.max_probability, g1, g2)
    path = args.out / "dimer_surface.csv"
    _write_rows(path, ["gamma1_radps", "gamma2_radps", "max_probability"], rows)
    _emit(peak=best[0], gamma1_radps=best[1], gamma2_radps=best[2], surface_csv=str(path))
    if args.temp == 0:
        _emit(zero_temperature_closed_form=analytic.dimer_max_probability(
            eps1, eps2, J, -best[1] * n1 / 2, -best[2] * n2 / 2))
    return 0


# --------------------------------------------------------------------------- network


def _network_baths(mode: str, N: int, nspins: Sequence[int], alpha: float, gammas: Sequence[float]):
    if mode == "none":
        return []
    if mode == "I":
        return [BathSpec(nspins[0], alpha, gammas[0], 0)]
    if mode in ("I,F", "IF"):
        return [BathSpec(nspins[0], alpha, gammas[0], 0), BathSpec(nspins[1], alpha, gammas[1], 1)]
    if mode == "intermediate":
        if len(nspins) != N - 2:
            raise ValueError(f"intermediate mode needs {N - 2} spin counts, got {len(nspins)}")
        return [BathSpec(n, alpha, gammas[0], 2 + i) for i, n in enumerate(nspins)]
    raise ValueError(f"unknown bath placement {mode!r}; use none, I, I,F or intermediate")


def cmd_network(args) -> int:
    N = args.n
    J = _to_radps(args, args.j)
    eps = _to_radps(args, args.eps)
    alpha = _to_radps(args, args.alpha)
    H = fully_connected(N, eps, J)
    window = args.window
    mode = args.baths
    nspins = _ints(args.nspins) if args.nspins else []
    if mode == "I,F" and len(nspins) == 1:
        nspins = nspins * 2

    if not args.scan_gamma:
        g = _to_radps(args, args.gamma)
        baths = _network_baths(mode, N, nspins, alpha, [g, g])
        ens = SectorEnsemble.from_baths(H, baths, args.temp)
        series = ensemble_series(ens, 0, 1, window, args.grid_points)
        path = series.to_csv(args.out / "network_series.csv")
        extra = {}
        if mode == "none":
            extra["closed_form_max"] = 4.0 / N**2
        _emit(peak=series.max_probability, argmax_time_ps=series.argmax_time, series_csv=str(path), **extra)
        return 0

    two_d = mode == "I,F"
    default_max, default_step = (20.0, 0.5) if two_d else (200.0, 5.0)
    gmax = _to_radps(args, args.gamma_max) if args.gamma_max is not None else default_max
    gstep = _to_radps(args, args.gamma_step) if args.gamma_step is not None else default_step
    gammas = _grid(0.0, gmax, gstep)
    combos = [(g1, g2) for g1 in gammas for g2 in gammas] if two_d else [(g, g) for g in gammas]
    rows, best = [], (-1.0, 0.0, 0.0, 0.0)
    for g1, g2 in combos:
        baths = _network_baths(mode, N, nspins, alpha, [g1, g2])
        ens = SectorEnsemble.from_baths(H, baths, args.temp)
        s = ensemble_series(ens, 0, 1, window, args.grid_points)
        rows.append((g1, g2, s.max_probability, s.argmax_time) if two_d else (g1, s.max_probability, s.argmax_time))
        if s.max_probability > best[0]:
            best = (s.max_probability, g1, g2, s.argmax_time)
    path = args.out / "network_gamma_scan.csv"
    header = (["gamma1_radps", "gamma2_radps"] if two_d else ["gamma_radps"]) + ["max_probability", "argmax_time_ps"]
    _write_rows(path, header, rows)
    out = {"peak": best[0], "gamma1_radps": best[1]}
    if two_d:
        out["gamma2_radps"] = best[2]
    out.update(argmax_time_ps=best[3], scan_csv=str(path))
    _emit(**out)
    return 0


# --------------------------------------------------------------------------- fmo


def _pairs(text: str):
    pairs = []
    for item in text.split(","):
        a, b = item.split("-")
        pairs.append((int(a), int(b)))
    return pairs


def _fmo_gamma_grid(args) -> np.ndarray:
    if args.gamma_max is None and args.gamma_step is None:
        return fmo.default_gamma_grid()
    gmax = args.gamma_max if args.gamma_max is not None else (
        fmo.GAMMA_MAX_CM if args.units == "cm" else radps_to_cm(fmo.default_gamma_grid()[-1]))
    gstep = args.gamma_step if args.gamma_step is not None else (
        fmo.GAMMA_STEP_CM if args.units == "cm" else cm_to_radps(fmo.GAMMA_STEP_CM))
    return np.asarray(_to_radps(args, _grid(0.0, gmax, gstep)))


def cmd_fmo_sweep(args) -> int:
    pairs = _pairs(args.pairs)
    records_path = Path(args.records) if args.records else args.out / "fmo_records.jsonl"

    def progress(done, total):
        log.info("coupling %d/%d done", done, total)

    records = fmo.run_sweep(
        pairs=pairs,
        total_spins=args.total_spins,
        gamma_grid=_fmo_gamma_grid(args),
        alpha=_to_radps(args, args.alpha),
        T=args.temp,
        window=args.window,
        grid_points=args.grid_points,
        records_path=records_path,
        jobs=args.jobs,
        progress=progress,
    )
    _emit(records=str(records_path), record_count=len(records))
    for I, F in pairs:
        sel = [r for r in records if (r.initial_site, r.final_site) == (I, F)]
        best = fmo.ranked(sel)
        summary = fmo.write_summary_csv(sel, args.out / f"fmo_summary_{I}_{F}.csv")
        top = best[0]
        _emit(**{
            f"best_{I}_{F}_distribution": ",".join(map(str, top.distribution)),
            f"best_{I}_{F}_max_probability": top.max_probability,
            f"best_{I}_{F}_gamma_radps": top.gamma,
            f"best_{I}_{F}_gamma_cm": radps_to_cm(top.gamma),
            f"best_{I}_{F}_argmax_time_ps": top.argmax_time_ps,
            f"summary_{I}_{F}_csv": str(summary),
        })
    return 0


def _parse_filter(text: Optional[str]):
    if not text:
        return None
    conds = []
    for item in text.split(","):
        k, v = item.split("=")
        conds.append((int(k.strip().lstrip("n")) - 1, int(v)))
    return lambda d: all(d[i] == v for i, v in conds)


def cmd_fmo_cdf(args) -> int:
    records_path = Path(args.records) if args.records else args.out / "fmo_records.jsonl"
    if not records_path.exists():
        print(f"error: records file not found: {records_path}", file=sys.stderr)
        return 2
    records = fmo.read_records(records_path)
    pred = _parse_filter(args.filter)
    for I, F in sorted({(r.initial_site, r.final_site) for r in records}):
        sel = [r for r in records if (r.initial_site, r.final_site) == (I, F)]
        bare = max(r.max_probability for r in sel if r.gamma == 0.0) if any(r.gamma == 0.0 for r in sel) else None
        path = fmo.write_cumulative_csv(fmo.cumulative_distribution(sel), args.out / f"fmo_cdf_{I}_{F}.csv")
        out = {f"cdf_{I}_{F}_csv": str(path)}
        if pred is not None:
            fpath = fmo.write_cumulative_csv(
                fmo.cumulative_distribution(sel, pred), args.out / f"fmo_cdf_{I}_{F}_filtered.csv")
            out[f"cdf_{I}_{F}_filtered_csv"] = str(fpath)
        if bare is not None:
            out[f"bare_{I}_{F}"] = bare
            out[f"fraction_improved_{I}_{F}"] = fmo.fraction_exceeding(sel, bare + 1e-9)
        _emit(**out)
    return 0


def cmd_fmo_alpha_scan(args) -> int:
    gamma = _to_radps(args, args.gamma) if args.gamma is not None else cm_to_radps(170.0)
    ratios = _grid(args.ratio_min, args.ratio_max, args.ratio_step)
    alphas = fmo.alpha_grid_from_ratios(ratios, args.temp)
    scan = fmo.alpha_scan(
        args.initial, args.final, _ints(args.distribution), gamma, args.temp, alphas,
        window=args.window, grid_points=args.grid_points,
    )
    path = fmo.write_scan_csv(scan, args.out / "fmo_alpha_scan.csv")
    at = float(np.interp(alpha_over_kbt(fmo.DEFAULT_ALPHA, args.temp), [r for r, _ in scan], [p for _, p in scan]))
    _emit(scan_csv=str(path), first_max_probability=scan[0][1], last_max_probability=scan[-1][1],
          peak=max(p for _, p in scan), max_probability_at_default_alpha=at)
    return 0


# --------------------------------------------------------------------------- appendix


def cmd_appendix(args) -> int:
    H = analytic.counterexample_hamiltonian()
    period = analytic.COUNTEREXAMPLE_PERIOD
    series = transfer_series(H, 0, 1, period, args.grid_points)
    closed = analytic.counterexample_probability(series.times)
    mismatch = float(np.max(np.abs(closed - series.probabilities)))
    scaled = 441.0 / 4.0 * series.probabilities
    rows = list(zip(series.times, series.probabilities, scaled))
    path = args.out / "appendix_series.csv"
    _write_rows(path, ["t_over_j", "probability", "scaled_probability"], rows)
    _emit(max_scaled_probability=441.0 / 4.0 * series.max_probability,
          argmax_time=series.argmax_time, closed_form_max_abs_error=mismatch,
          bound_reached=bool(441.0 / 4.0 * series.max_probability >= 1.0), series_csv=str(path))
    return 0


# --------------------------------------------------------------------------- validate


def validation_checks(seed: int = 0):
    """Yield (name, passed, detail) for the randomized oracle comparisons."""
    rng = np.random.default_rng(seed)

    worst = 0.0
    for _ in range(20):
        gamma, alpha = rng.uniform(-20, 20), rng.uniform(1, 300)
        T, t = rng.uniform(10, 500), rng.uniform(0, 2)
        H = np.array([[rng.normal(), 1.0], [1.0, rng.normal()]]) * 10
        baths = [BathSpec(2, alpha, gamma, 0)]
        a = thermal_transfer_probability(H, baths, T, 0, 1, t)
        b = oracle.brute_force_thermal_transfer(H, baths, T, 0, 1, t)
        worst = max(worst, abs(a - b))
    yield "dimer_thermal_vs_brute_force", worst <= 1e-12, worst

    worst = 0.0
    for _ in range(10):
        N = int(rng.integers(3, 6))
        H = fully_connected(N, 0.0, rng.uniform(1, 10))
        ns = rng.multinomial(int(rng.integers(1, 7)), [1 / N] * N)
        baths = [BathSpec(int(n), rng.uniform(10, 200), rng.uniform(-30, 30), s) for s, n in enumerate(ns) if n]
        T, t = rng.uniform(50, 400), rng.uniform(0, 1)
        a = thermal_transfer_probability(H, baths, T, 0, 1, t)
        b = oracle.brute_force_thermal_transfer(H, baths, T, 0, 1, t)
        worst = max(worst, abs(a - b))
    yield "network_thermal_vs_brute_force", worst <= 1e-12, worst

    ok = all(
        oracle.brute_force_multiplicities(n) == {j: degeneracy(n, j) for j in oracle.brute_force_multiplicities(n)}
        for n in range(1, 9)
    )
    yield "multiplicities_vs_brute_force", ok, "n<=8"

    worst = 0.0
    for n in range(1, 7):
        beta, alpha = rng.uniform(0.001, 0.1), rng.uniform(-100, 100)
        w = magnetization_weights(n, alpha, beta)
        ref = oracle.brute_force_magnetization_weights(n, alpha, beta)
        worst = max(worst, max(abs(w[m] - ref[m]) for m in ref))
    yield "magnetization_weights_vs_brute_force", worst <= 1e-12, worst

    worst = 0.0
    for _ in range(50):
        n, alpha, beta = int(rng.integers(1, 30)), rng.uniform(-100, 100), rng.uniform(1e-4, 0.05)
        z = partition_function(n, alpha, beta)
        worst = max(worst, abs(z / (2 * math.cosh(beta * alpha / 2)) ** n - 1))
    yield "partition_function_identity", worst <= 1e-10, worst

    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 12))
        A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        H = A + A.conj().T
        psi = rng.normal(size=d) + 1j * rng.normal(size=d)
        psi /= np.linalg.norm(psi)
        worst = max(worst, abs(np.linalg.norm(propagate(H, psi, rng.uniform(-5, 5))) - 1))
    yield "propagation_unitarity", worst <= 1e-10, worst


def cmd_validate(args) -> int:
    failed = 0
    rows = []
    for name, ok, detail in validation_checks(args.seed):
        print(f"{name}={'pass' if ok else 'FAIL'} detail={detail}")
        rows.append((name, "pass" if ok else "fail", detail))
        failed += not ok
    _write_rows(args.out / "validate.csv", ["check", "result", "detail"], rows)
    return 1 if failed else 0


# --------------------------------------------------------------------------- plumbing


def _write_rows(path: Path, header, rows) -> None:
    import csv

    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{x:.12g}" if isinstance(x, (float, np.floating)) else x for x in row])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--config", type=Path, help="key=value defaults file")
    common.add_argument("--units", choices=("radps", "cm"), default="radps",
                        help="unit of energy/coupling flags (default rad/ps)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--grid-points", type=int, default=None,
                        help="time samples per window (default 10000 per ps)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="spinbath-transport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    parsers = {}

    p = sub.add_parser("dimer", parents=[common], help="dimer maxima over (gamma1, gamma2)")
    p.add_argument("--j", type=float, default=10.0)
    p.add_argument("--eps1", type=float, default=0.0)
    p.add_argument("--eps2", type=float, default=0.0)
    p.add_argument("--nspins", default="10,10")
    p.add_argument("--alpha", type=float, default=150.0)
    p.add_argument("--temp", type=float, default=300.0)
    p.add_argument("--gamma-max", type=float, default=20.0)
    p.add_argument("--gamma-step", type=float, default=1.0)
    p.add_argument("--window", type=float, default=None, help="ps (default one period 2pi/J)")
    p.set_defaults(func=cmd_dimer)
    parsers["dimer"] = p

    p = sub.add_parser("network", parents=[common], help="fully connected network scenarios")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--j", type=float, default=10.0)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--baths", default="I,F", help="none | I | I,F | intermediate")
    p.add_argument("--nspins", default="10,10")
    p.add_argument("--alpha", type=float, default=150.0)
    p.add_argument("--temp", type=float, default=300.0)
    p.add_argument("--gamma", type=float, default=0.0, help="coupling for a single series")
    p.add_argument("--scan-gamma", action="store_true", help="scan couplings instead of one series")
    p.add_argument("--gamma-max", type=float, default=None)
    p.add_argument("--gamma-step", type=float, default=None)
    p.add_argument("--window", type=float, default=1.0, help="ps")
    p.set_defaults(func=cmd_network)
    parsers["network"] = p

    p = sub.add_parser("fmo", help="FMO complex experiments")
    fsub = p.add_subparsers(dest="fmo_command", required=True)

    q = fsub.add_parser("sweep", parents=[common], help="all even spin distributions x couplings")
    q.add_argument("--pairs", default="1-3,6-3", help="initial-final site labels, 1-based")
    q.add_argument("--total-spins", type=int, default=fmo.DEFAULT_TOTAL_SPINS)
    q.add_argument("--gamma-max", type=float, default=None, help="default: 200 cm^-1")
    q.add_argument("--gamma-step", type=float, default=None, help="default: 2 cm^-1")
    q.add_argument("--alpha", type=float, default=fmo.DEFAULT_ALPHA)
    q.add_argument("--temp", type=float, default=fmo.DEFAULT_TEMPERATURE)
    q.add_argument("--window", type=float, default=fmo.DEFAULT_WINDOW)
    q.add_argument("--records", default=None, help="record file (default OUT/fmo_records.jsonl)")
    q.set_defaults(func=cmd_fmo_sweep)
    parsers["fmo sweep"] = q

    q = fsub.add_parser("cdf", parents=[common], help="cumulative distributions from records")
    q.add_argument("--records", default=None)
    q.add_argument("--filter", default=None, help="e.g. n1=2,n3=0")
    q.set_defaults(func=cmd_fmo_cdf)
    parsers["fmo cdf"] = q

    q = fsub.add_parser("alpha-scan", parents=[common], help="maximum vs alpha/k_BT")
    q.add_argument("--initial", type=int, default=1)
    q.add_argument("--final", type=int, default=3)
    q.add_argument("--distribution", default="2,0,0,8,0,0,0")
    q.add_argument("--gamma", type=float, default=None, help="default: 170 cm^-1")
    q.add_argument("--temp", type=float, default=fmo.DEFAULT_TEMPERATURE)
    q.add_argument("--ratio-min", type=float, default=0.0)
    q.add_argument("--ratio-max", type=float, default=15.0)
    q.add_argument("--ratio-step", type=float, default=0.25)
    q.add_argument("--window", type=float, default=fmo.DEFAULT_WINDOW)
    q.set_defaults(func=cmd_fmo_alpha_scan)
    parsers["fmo alpha-scan"] = q

    p = sub.add_parser("appendix", parents=[common], help="counterexample network")
    p.set_defaults(func=cmd_appendix)
    parsers["appendix"] = p

    p = sub.add_parser("validate", parents=[common], help="oracle cross-checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_validate)
    parsers["validate"] = p

    parser._subcommand_parsers = parsers
    return parser


def _command_key(args) -> str:
    return args.command if args.command != "fmo" else f"fmo {args.fmo_command}"


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            conf = read_config(args.config)
        except OSError as exc:
            print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
            return 2
        sub = parser._subcommand_parsers[_command_key(args)]
        known = {a.dest: a for a in sub._actions}
        unknown = sorted(set(conf) - set(known))
        if unknown:
            print(f"error: unknown config keys in {args.config}: {', '.join(unknown)}", file=sys.stderr)
            return 2
        sub.set_defaults(**{k: (known[k].type(v) if known[k].type else v) for k, v in conf.items()})
        args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {args.out}: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
