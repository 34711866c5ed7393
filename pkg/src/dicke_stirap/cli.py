"""Command-line scenario runner.

Every command reads an optional JSON config (``--config``), merges it over
built-in defaults, and writes CSV data plus a JSON summary to ``--out``.
Physics parameters are dimensionless (frequencies in 1/T, times in T) except
in the ``physical`` block of ``estimate``.  Outputs carry no timestamps, so
identical configs produce byte-identical files.

Exit codes: 0 success, 1 physics/validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import oracle
from .darkstate import dark_trajectory
from .errors import AmbiguityError, ConsistencyError, DomainError, IntegrationError
from .estimates import TWO_PI, PhysicalParams, estimate_report
from .hamiltonian import DriveParams, build_chain_matrix, pulse_envelopes
from .propagator import (
    adiabatic_projection,
    default_endpoints,
    propagate,
    renormalized_fidelity,
    state_populations,
    transfer,
)
from .spectrum import SpectrumSample, adiabaticity_area, e1_closed_form, instantaneous_spectrum
from .symbasis import enumerate_basis

log = logging.getLogger("dicke_stirap")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PHYSICS = {
    "N": 5,
    "m": 2,
    "omega0": 50.0,
    "gamma": 2.0,
    "delta": 0.0,
    "tau": -0.6,
    "pulse_width": 1.0,
    "tol": 1e-10,
}

DEFAULTS = {
    "trace": {**PHYSICS, "n_report": 401, "initial": None, "target": None},
    "delay-scan": {
        **PHYSICS,
        "tau_min": -1.5,
        "tau_max": 1.5,
        "n_tau": 31,
        "gammas": [0.0, 2.0],
        "direction": "forward",
    },
    "contour": {
        **PHYSICS,
        "omega0_values": [10.0, 20.0, 30.0, 40.0, 50.0, 60.0],
        "delta_values": [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
        "max_points": 400,
    },
    "spectrum": {**PHYSICS, "gamma": 0.0, "n_times": 201, "compare": {"omega0": 20.0, "delta": 10.0}},
    "oracle-check": {
        "N": 3,
        "m_values": [1, 2],
        "seeds": 5,
        "tol": 1e-10,
        "thresholds": {"amplitude": 1e-6, "excitation": 1e-10, "picture": 1e-8, "phase": 1e-6},
    },
    "estimate": {
        "physical": {
            "gamma_2pi_mhz": 22.0,
            "trap_2pi_mhz": 4.0,
            "omega0_over_trap": 0.1,
            "heating_rate_hz": 5.0,
            "n_ions": 10,
            "stage_time_factor": 6.0,
        },
        "infidelity": 0.01,
    },
    "spatial-profile": {**PHYSICS, "variations": [0.0, 0.1, 0.5], "positions": None},
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- config and output


def resolve_config(command: str, path: str | None, tol: float | None) -> dict:
    cfg = json.loads(json.dumps(DEFAULTS[command]))
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(user, dict):
            raise UsageError("config must be a JSON object")
        declared = user.pop("command", command)
        if declared != command:
            raise UsageError(f"config is for command {declared!r}, not {command!r}")
        unknown = set(user) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
        for key, value in user.items():
            if isinstance(cfg.get(key), dict) and isinstance(value, dict):
                cfg[key].update(value)
            else:
                cfg[key] = value
    if tol is not None and "tol" in cfg:
        cfg["tol"] = tol
    return cfg


def metadata(command: str, cfg: dict, **extra) -> dict:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    meta = {
        "package": "dicke_stirap",
        "version": __version__,
        "command": command,
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
        "config": cfg,
    }
    meta.update(extra)
    return meta


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path: Path, meta: dict, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        for key in sorted(meta):
            fh.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path: Path, record: dict) -> None:
    path.write_text(json.dumps(_jsonable(record), sort_keys=True, indent=2) + "\n")


def drive(cfg: dict, **changes) -> DriveParams:
    kw = {k: cfg[k] for k in ("omega0", "tau", "delta", "gamma", "pulse_width")}
    kw.update(changes)
    return DriveParams(**kw)


def run_points(fn, jobs: list, threads: int) -> list:
    """Evaluate ``fn`` over ``jobs``; results come back in job order."""
    if threads <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


# ---------------------------------------------------------------- commands


def cmd_trace(cfg: dict, out: Path, threads: int) -> int:
    N, m = cfg["N"], cfg["m"]
    p = drive(cfg)
    initial, target = default_endpoints(m, p)
    initial = tuple(cfg["initial"] or initial)
    target = tuple(cfg["target"] or target)
    basis = enumerate_basis(N, m)
    tgt = basis.basis_vector(*target)
    traj = propagate(basis.basis_vector(*initial), N, m, p, tol=cfg["tol"], n_report=cfg["n_report"], target=tgt)
    dark = adiabatic_projection(traj, dark_trajectory(N, m, p, traj.times)) if m >= 1 else np.ones(len(traj.times))
    pops = state_populations(traj)
    meta = metadata("trace", cfg, tol=cfg["tol"], window=list(traj.window))

    header = ["time", "norm"] + [f"pop_eps{e}" for e in range(m + 1)]
    header += [f"pop_mu{mu}_eps{eps}" for mu, eps in basis] + ["fidelity", "dark_projection"]
    rows = (
        [t, n, *mp, *sp_, f, d]
        for t, n, mp, sp_, f, d in zip(traj.times, traj.norm, traj.manifold_pops, pops, traj.fidelity_vs_target, dark)
    )
    write_csv(out / "trace.csv", meta, header, rows)
    summary = {
        "metadata": meta,
        "initial": list(initial),
        "target": list(target),
        "final_fidelity": float(traj.fidelity_vs_target[-1]),
        "final_fidelity_renormalized": float(renormalized_fidelity(traj, tgt)[-1]),
        "dark_retention": traj.dark_retention,
        "min_norm": float(traj.norm.min()),
        "min_dark_projection": float(dark.min()),
    }
    write_json(out / "summary.json", summary)
    print(f"final fidelity {summary['final_fidelity']:.6f}, dark retention {summary['dark_retention']:.6f}")
    return EXIT_OK


def _delay_point(job):
    cfg, tau, gamma = job
    p = drive(cfg, tau=tau, gamma=gamma)
    fock, dicke = (cfg["m"], 0), (0, 0)
    start, end = (dicke, fock) if cfg["direction"] == "forward" else (fock, dicke)
    return transfer(cfg["N"], cfg["m"], p, start, end, cfg["tol"])[0]


def delay_scan(cfg: dict, threads: int = 1) -> tuple[np.ndarray, dict[float, np.ndarray]]:
    if cfg["direction"] not in ("forward", "reverse"):
        raise UsageError("direction must be 'forward' or 'reverse'")
    taus = np.linspace(cfg["tau_min"], cfg["tau_max"], cfg["n_tau"])
    jobs = [(cfg, float(tau), float(g)) for g in cfg["gammas"] for tau in taus]
    values = np.array(run_points(_delay_point, jobs, threads)).reshape(len(cfg["gammas"]), len(taus))
    return taus, {float(g): values[i] for i, g in enumerate(cfg["gammas"])}


def cmd_delay_scan(cfg: dict, out: Path, threads: int) -> int:
    taus, fids = delay_scan(cfg, threads)
    meta = metadata("delay-scan", cfg, tol=cfg["tol"], window="default per tau")
    gammas = list(fids)
    header = ["index", "tau"] + [f"fidelity_gamma={_fmt(g)}" for g in gammas]
    write_csv(out / "delay_scan.csv", meta, header, ([i, tau] + [fids[g][i] for g in gammas] for i, tau in enumerate(taus)))
    asym = {}
    for g in gammas:
        f = fids[g]
        asym[_fmt(g)] = float(np.max(np.abs(f - f[::-1]))) if np.allclose(taus, -taus[::-1]) else None
    write_json(out / "summary.json", {"metadata": meta, "max_asymmetry": asym})
    return EXIT_OK


def _contour_point(job):
    cfg, omega0, delta = job
    p = drive(cfg, omega0=omega0, delta=delta)
    return transfer(cfg["N"], cfg["m"], p, *default_endpoints(cfg["m"], p), cfg["tol"])


def cmd_contour(cfg: dict, out: Path, threads: int) -> int:
    omegas, deltas = cfg["omega0_values"], cfg["delta_values"]
    if len(omegas) * len(deltas) > cfg["max_points"]:
        raise UsageError(
            f"grid of {len(omegas) * len(deltas)} points exceeds max_points={cfg['max_points']}; "
            "raise max_points or coarsen the grid"
        )
    jobs = [(cfg, float(o), float(d)) for o in omegas for d in deltas]
    results = run_points(_contour_point, jobs, threads)
    meta = metadata("contour", cfg, tol=cfg["tol"], window="default per point")
    rows = ([i, o, d, f, r] for i, ((_, o, d), (f, r)) in enumerate(zip(jobs, results)))
    write_csv(out / "contour.csv", meta, ["index", "omega0", "delta", "fidelity", "dark_retention"], rows)
    best = max(range(len(jobs)), key=lambda i: results[i][0])
    write_json(
        out / "summary.json",
        {"metadata": meta, "best": {"omega0": jobs[best][1], "delta": jobs[best][2], "fidelity": results[best][0]}},
    )
    return EXIT_OK


def scan_spectrum(N: int, m: int, p: DriveParams, times) -> list[SpectrumSample]:
    """Spectrum on a grid; samples where E1 or the roots are undetermined get NaN fields.

    Far in the wings one pulse is exponentially small and the two smallest
    eigenvalues can fall below the resolution threshold.
    """
    samples = []
    for t in times:
        chain = build_chain_matrix(N, m, t, p)
        try:
            samples.append(instantaneous_spectrum(chain))
        except (AmbiguityError, ConsistencyError):
            ev = np.linalg.eigvals(chain.matrix)
            ev = ev[np.lexsort((ev.imag, ev.real))]
            nan = complex("nan")
            samples.append(SpectrumSample(float(t), ev, int(np.argmin(np.abs(ev))), nan, np.full(m, nan), None))
    return samples


def cmd_spectrum(cfg: dict, out: Path, threads: int) -> int:
    N, m = cfg["N"], cfg["m"]
    p = drive(cfg)
    window = p.default_window()
    times = np.linspace(window[0], window[1], cfg["n_times"])
    samples = scan_spectrum(N, m, p, times)
    alt = scan_spectrum(N, m, drive(cfg, **cfg["compare"]), times) if cfg.get("compare") else None

    header = ["time", "omega_a", "omega_b"]
    header += [f"eig{k}_{part}" for k in range(2 * m + 1) for part in ("re", "im")]
    header += ["e1_re", "e1_im"] + [f"z{k}_re" for k in range(m)] + ["gamma_root", "pairing_residual"]
    rows, gammas, z_dev = [], [], 0.0
    for i, s in enumerate(samples):
        oa, ob = pulse_envelopes(s.time, p)
        ev = s.eigenvalues
        pairing = float(np.max(np.abs(ev + ev[::-1])))
        z = s.z_roots if len(s.z_roots) == m else np.full(m, np.nan)
        g = s.gamma.real if s.gamma is not None else float("nan")
        gammas.append(g)
        rows.append([s.time, oa, ob, *np.column_stack([ev.real, ev.imag]).ravel(), s.e1.real, s.e1.imag, *z.real, g, pairing])
        if alt is not None and len(alt[i].z_roots) == m and len(s.z_roots) == m:
            dev = np.abs(np.sort(s.z_roots.real) - np.sort(alt[i].z_roots.real))
            if np.all(np.isfinite(dev)):
                z_dev = max(z_dev, float(dev.max()))
    meta = metadata("spectrum", cfg, window=list(window))
    write_csv(out / "spectrum.csv", meta, header, rows)

    g = np.array(gammas)
    ok = np.isfinite(g)
    summary = {
        "metadata": meta,
        "undetermined_samples": int((~ok).sum()),
        "adiabaticity_area": adiabaticity_area(times[ok], g[ok], p.omega0),
        "z_invariance_max_deviation": z_dev if alt is not None else None,
        "max_pairing_residual": max(r[-1] for r in rows),
    }
    if m == 1:
        summary["m1_closed_form_max_error"] = max(
            (abs(s.e1 - e1_closed_form(s.gamma.real, p.omega0, p.delta)) for s in samples if s.gamma is not None),
            default=None,
        )
    write_json(out / "summary.json", summary)
    return EXIT_OK


def random_drive(rng: np.random.Generator) -> DriveParams:
    tau = rng.uniform(0.3, 1.0) * rng.choice([-1.0, 1.0])
    return DriveParams(
        omega0=rng.uniform(5.0, 30.0), tau=tau, delta=rng.uniform(-5.0, 5.0), gamma=rng.uniform(0.0, 2.0)
    )


def random_symmetric_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    c = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return c / np.linalg.norm(c)


def random_chain_config(rng: np.random.Generator, N: int, cutoff: int) -> oracle.FullSpaceConfig:
    return oracle.FullSpaceConfig(
        N,
        cutoff,
        positions=np.sort(rng.uniform(-2.0, 2.0, N)),
        k_a=rng.uniform(-3.0, 3.0),
        k_b=rng.uniform(-3.0, 3.0),
        theta_a=rng.uniform(0.0, np.pi),
        theta_b=rng.uniform(0.0, np.pi),
        laser_phase_a=rng.uniform(0.0, 2 * np.pi),
        laser_phase_b=rng.uniform(0.0, 2 * np.pi),
    )


def oracle_checks(cfg: dict) -> dict:
    """Reduced-vs-full equivalence, excitation conservation, picture agreement, phase pattern."""
    N, tol, thr = cfg["N"], cfg["tol"], cfg["thresholds"]
    amp_dev, exc_dev, pic_dev = 0.0, 0.0, 0.0
    for m in cfg["m_values"]:
        for seed in range(cfg["seeds"]):
            rng = np.random.default_rng([seed, m])
            p = random_drive(rng)
            coeffs = random_symmetric_state(rng, len(enumerate_basis(N, m)))
            r = oracle.reduction_deviation(N, m, p, coeffs, tol)
            amp_dev = max(amp_dev, r["max_amplitude_deviation"])
            r0 = oracle.reduction_deviation(N, m, p.replace(gamma=0.0), coeffs, tol)
            exc_dev = max(exc_dev, r0["excitation_drift"])
            chain = random_chain_config(rng, N, m + 1)
            psi0 = oracle.symmetric_to_full(coeffs, enumerate_basis(N, m), m + 1)
            pic_dev = max(pic_dev, oracle.picture_deviation(chain, p, psi0))
    m = max(cfg["m_values"])
    phase = oracle.final_phase_error(
        random_chain_config(np.random.default_rng(12345), N, m + 1), m, DriveParams(50.0, -0.6)
    )
    checks = {
        "reduction_equivalence": (amp_dev, thr["amplitude"]),
        "excitation_conservation": (exc_dev, thr["excitation"]),
        "picture_agreement": (pic_dev, thr["picture"]),
        "final_phase_pattern": (phase["max_phase_error"], thr["phase"]),
    }
    return {name: {"value": v, "threshold": t, "passed": bool(v <= t)} for name, (v, t) in checks.items()}


def cmd_oracle_check(cfg: dict, out: Path, threads: int) -> int:
    report = oracle_checks(cfg)
    meta = metadata("oracle-check", cfg, tol=cfg["tol"])
    passed = all(r["passed"] for r in report.values())
    write_json(out / "oracle_check.json", {"metadata": meta, "checks": report, "passed": passed})
    for name, r in report.items():
        print(f"{'PASS' if r['passed'] else 'FAIL'} {name}: {r['value']:.3e} (<= {r['threshold']:.0e})")
    return EXIT_OK if passed else EXIT_FAIL


def physical_params(block: dict) -> PhysicalParams:
    trap = TWO_PI * block["trap_2pi_mhz"] * 1e6
    if "omega0_2pi_mhz" in block:
        omega0 = TWO_PI * block["omega0_2pi_mhz"] * 1e6
    else:
        omega0 = block["omega0_over_trap"] * trap
    return PhysicalParams(
        gamma_phys=TWO_PI * block["gamma_2pi_mhz"] * 1e6,
        omega0_phys=omega0,
        trap_freq=trap,
        heating_rate=block["heating_rate_hz"],
        n_ions=block["n_ions"],
        stage_time_factor=block["stage_time_factor"],
    )


def cmd_estimate(cfg: dict, out: Path, threads: int) -> int:
    report = estimate_report(physical_params(cfg["physical"]), cfg["infidelity"])
    report["min_pulse_time_us"] = report["min_pulse_time_s"] * 1e6
    if report["warning"]:
        log.warning(report["warning"])
    write_json(out / "estimate.json", {"metadata": metadata("estimate", cfg), **report})
    print(
        f"T >= {report['min_pulse_time_us']:.1f} us, heating events {report['heating_events']:.3g}, "
        f"heating-limited fidelity {report['heating_fidelity']:.4f}"
    )
    return EXIT_OK


def _profile_point(job):
    cfg, variation = job
    return oracle.profile_fidelity(cfg["N"], cfg["m"], drive(cfg), variation, cfg["positions"], cfg["tol"])


def cmd_spatial_profile(cfg: dict, out: Path, threads: int) -> int:
    if drive(cfg).tau >= 0:
        raise UsageError("spatial-profile simulates the Fock -> Dicke stage and needs tau < 0")
    results = run_points(_profile_point, [(cfg, float(v)) for v in cfg["variations"]], threads)
    meta = metadata("spatial-profile", cfg, tol=cfg["tol"])
    write_csv(
        out / "spatial_profile.csv",
        meta,
        ["index", "variation", "fidelity", "dark_retention"],
        ([i, r["variation"], r["fidelity"], r["dark_retention"]] for i, r in enumerate(results)),
    )
    write_json(out / "summary.json", {"metadata": meta, "runs": results})
    return EXIT_OK


COMMANDS = {
    "trace": cmd_trace,
    "delay-scan": cmd_delay_scan,
    "contour": cmd_contour,
    "spectrum": cmd_spectrum,
    "oracle-check": cmd_oracle_check,
    "estimate": cmd_estimate,
    "spatial-profile": cmd_spatial_profile,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dicke-stirap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cp = sub.add_parser(name)
        cp.add_argument("--config", help="JSON config file")
        cp.add_argument("--out", default=".", help="output directory (default: current)")
        cp.add_argument("--threads", type=int, default=1, help="worker processes for scans")
        cp.add_argument("--tol", type=float, help="override integrator tolerance")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.command, args.config, args.tol)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, max(1, args.threads))
    except (UsageError, KeyError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, IntegrationError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
