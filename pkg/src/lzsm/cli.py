"""Command-line front end: configured runs, sweeps, CSV/figure output.

Exit codes: 0 success, 1 failed verification, 2 configuration error,
3 numerical convergence failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from pathlib import Path

import numpy as np

from . import figures, ssh
from .adiabatic import eigenframe
from .analysis import sweep, write_sweep_csv
from .errors import ConvergenceError
from .pauli import SymmetryAxis
from .propagator import default_tls_steps, evolve_converged
from .schedules import (example1_schedule, example2_schedule,
                        schedule_from_config)
from .verify import SUITES, run_suite

EXPERIMENTS = ("example1", "example2", "ssh", "custom")

EXAMPLE1_DEFAULTS = {"J0": 1.0, "Jx": 1.5, "Jy": 0.5, "Jz": 2.0}
EXAMPLE2_DEFAULTS = {"Jtheta": float(np.sqrt(2) / 2), "Jr": 1.0,
                     "Jphi": float(-np.sqrt(2) / 2),
                     "theta": float(np.pi / 3), "phi": float(np.pi / 6),
                     "T0": 1.26, "tau": 0.0}
SSH_DEFAULTS = {"sites": 32, "w": 1.0, "v0": 0.9, "delta0": 0.1, "dt": 0.01}


@dataclass
class RunConfig:
    """Validated description of one CLI run."""

    experiment: str
    params: dict = field(default_factory=dict)
    sweep_axis: str = ""
    sweep_values: list = field(default_factory=list)
    out: str = "out"
    n_steps: int | None = None
    tol: float | None = None
    threads: int = 1
    figures: bool = True

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        values = list(self.sweep_values)
        if not values:
            raise ValueError("sweep value list must be nonempty")
        diffs = np.diff(values)
        if len(values) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("sweep values must be strictly monotone")
        if self.n_steps is not None and self.tol is not None:
            raise ValueError("--steps and --tol are mutually exclusive")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f: data[f] for f in cls.__dataclass_fields__ if f in data}
        return cls(**known)


def parse_sweep_spec(spec: str) -> list[float]:
    """start:stop:count, endpoints inclusive."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError("sweep spec must be start:stop:count")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError("sweep count must be >= 1")
    return [float(x) for x in np.linspace(start, stop, count)]


# ---- picklable schedule families for process pools -------------------

def _example1_at(T, J0, Jx, Jy, Jz):
    return example1_schedule(J0, Jx, Jy, Jz, T)


def _example2_at_tau(tau, Jtheta, Jr, Jphi, T0, theta, phi):
    return example2_schedule(Jtheta, Jr, Jphi, T0, tau,
                             SymmetryAxis(theta, phi))


def _example2_at_T0(T0, Jtheta, Jr, Jphi, tau, theta, phi):
    return example2_schedule(Jtheta, Jr, Jphi, T0, tau,
                             SymmetryAxis(theta, phi))


def _custom_at_tau(tau, spec):
    sched, _ = schedule_from_config({**spec, "tau": float(tau)})
    return sched


def _schedule_family(config: RunConfig):
    """(make_schedule, axis, param_name) for the configured experiment."""
    p = config.params
    if config.experiment == "example1":
        if config.sweep_axis != "T":
            raise ValueError("example1 sweeps over T")
        kw = {k: float(p.get(k, EXAMPLE1_DEFAULTS[k])) for k in EXAMPLE1_DEFAULTS}
        return partial(_example1_at, **kw), SymmetryAxis(0.0, 0.0), "T"
    if config.experiment == "example2":
        kw = {k: float(p.get(k, EXAMPLE2_DEFAULTS[k])) for k in EXAMPLE2_DEFAULTS}
        axis = SymmetryAxis(kw["theta"], kw["phi"])
        if config.sweep_axis == "tau":
            kw.pop("tau")
            return partial(_example2_at_tau, **kw), axis, "tau"
        if config.sweep_axis == "T0":
            kw.pop("T0")
            return partial(_example2_at_T0, **kw), axis, "T0"
        raise ValueError("example2 sweeps over tau or T0")
    if config.experiment == "custom":
        if config.sweep_axis != "tau":
            raise ValueError("custom schedules sweep over tau")
        spec = p.get("schedule")
        if not isinstance(spec, dict):
            raise ValueError("custom runs need params.schedule from --config")
        _, axis = schedule_from_config(spec)
        return partial(_custom_at_tau, spec=spec), axis, "tau"
    raise ValueError(f"no schedule family for {config.experiment!r}")


def _resolve_steps(config: RunConfig, make_schedule, axis, value) -> int | None:
    """Fixed step count, or one calibrated by whole-run refinement."""
    if config.tol is None:
        return config.n_steps
    sched = make_schedule(value)
    psi0 = eigenframe(sched, 0.0, axis).v_minus
    _, n_used = evolve_converged(sched, psi0, 0.0, sched.duration, config.tol,
                                 n_start=default_tls_steps(sched.duration) // 4)
    return n_used


def _local_maxima(values, ys):
    peaks = []
    for k in range(1, len(ys) - 1):
        if ys[k] > ys[k - 1] and ys[k] > ys[k + 1]:
            peaks.append({"param": float(values[k]), "value": float(ys[k])})
    return peaks


def _run_tls_experiment(config: RunConfig, out_dir: Path) -> dict:
    make_schedule, axis, param_name = _schedule_family(config)
    n_steps = config.n_steps
    if config.tol is not None:
        # calibrate on the longest protocol in the sweep
        n_steps = _resolve_steps(config, make_schedule, axis,
                                 max(config.sweep_values[0],
                                     config.sweep_values[-1]))
    rows = sweep(make_schedule, config.sweep_values, axis,
                 n_steps=n_steps, workers=config.threads)
    csv_path = out_dir / "sweep.csv"
    write_sweep_csv(rows, csv_path)
    if config.figures:
        figures.render_sweep_figure(rows, param_name, out_dir / "sweep.png")
    good = [r for r in rows if r.report is not None]
    deviations = [abs(r.report.p_mm_tm - r.report.p_mm_num) for r in good]
    return {
        "csv": csv_path.name,
        "resolved_n_steps": n_steps,
        "rows": len(rows),
        "failed_rows": [{"param": r.value, "error": r.error}
                        for r in rows if r.error],
        "peaks_P_mm_num": _local_maxima([r.value for r in good],
                                        [r.report.p_mm_num for r in good]),
        "max_tm_num_deviation": max(deviations) if deviations else None,
    }


def _ssh_point(args) -> tuple[float, float]:
    n_cells, w, v0, delta0, T, n_chain, n_tls = args
    model = ssh.ChainModel(n_cells, w, v0, delta0, T)
    return (ssh.transport_probability(model, n_chain),
            ssh.reduced_pmm_numeric(model, n_tls))


def _run_ssh_experiment(config: RunConfig, out_dir: Path) -> dict:
    p = {**SSH_DEFAULTS, **config.params}
    if config.sweep_axis != "T":
        raise ValueError("ssh sweeps over T")
    sites = int(p["sites"])
    if sites % 2 or sites < 4:
        raise ValueError("--sites must be an even count >= 4")
    n_cells = sites // 2
    values = [float(v) for v in config.sweep_values]

    if config.tol is not None:
        model0 = ssh.ChainModel(n_cells, p["w"], p["v0"], p["delta0"],
                                max(values[0], values[-1]))
        psi0 = np.zeros(model0.n_sites, dtype=complex)
        psi0[0] = 1.0
        _, n_used = evolve_converged(model0, psi0, 0.0, model0.total_time,
                                     config.tol,
                                     n_start=ssh.chain_steps(model0) // 4)
        chain_steps = [n_used] * len(values)
    elif config.n_steps is not None:
        chain_steps = [config.n_steps] * len(values)
    else:
        chain_steps = [ssh.chain_steps(
            ssh.ChainModel(n_cells, p["w"], p["v0"], p["delta0"], T),
            dt_max=float(p["dt"])) for T in values]

    jobs = [(n_cells, p["w"], p["v0"], p["delta0"], T, nc, None)
            for T, nc in zip(values, chain_steps)]
    if config.threads > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(_ssh_point, jobs))
    else:
        results = [_ssh_point(job) for job in jobs]
    p_chain = [r[0] for r in results]
    p_reduced = [r[1] for r in results]

    transport_csv = out_dir / "transport.csv"
    ssh.write_transport_csv(values, p_chain, p_reduced, transport_csv)

    model_ref = ssh.ChainModel(n_cells, p["w"], p["v0"], p["delta0"], values[0])
    grid = np.linspace(0.0, model_ref.total_time, 201)
    times, energies = ssh.spectrum_vs_time(model_ref, grid)
    spectrum_csv = out_dir / "spectrum.csv"
    ssh.write_spectrum_csv(times, energies, spectrum_csv)

    if config.figures:
        figures.render_transport_figure(values, p_chain, p_reduced,
                                        out_dir / "transport.png")
        figures.render_spectrum_figure(times, energies, n_cells,
                                       out_dir / "spectrum.png")
    return {
        "csv": transport_csv.name,
        "spectrum_csv": spectrum_csv.name,
        "resolved_chain_steps": chain_steps[-1],
        "rows": len(values),
        "peaks_P_2N": _local_maxima(values, p_chain),
        "qsl_time": ssh.qsl_time(model_ref),
        "max_chain_reduced_deviation": float(np.max(np.abs(
            np.array(p_chain) - np.array(p_reduced)))),
    }


def run(config: RunConfig) -> int:
    """Execute a configured run; returns the process exit code."""
    started = time.perf_counter()
    try:
        config.validate()
        out_dir = Path(config.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if config.experiment == "ssh":
            summary = _run_ssh_experiment(config, out_dir)
        else:
            summary = _run_tls_experiment(config, out_dir)
    except (ValueError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 3
    summary_doc = {
        "config": config.to_dict(),
        "wall_time_seconds": time.perf_counter() - started,
        **summary,
    }
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary_doc, fh, indent=2)
        fh.write("\n")
    print(f"wrote {config.out}/summary.json")
    return 0


# ---- argument parsing -------------------------------------------------

def _add_common(sub):
    sub.add_argument("--config", type=str, default=None,
                     help="JSON run config; flags override its fields")
    sub.add_argument("--out", type=str, default=None, help="output directory")
    sub.add_argument("--steps", type=int, default=None,
                     help="fixed step count per run")
    sub.add_argument("--tol", type=float, default=None,
                     help="whole-run refinement tolerance instead of --steps")
    sub.add_argument("--threads", type=int, default=None,
                     help="parallel sweep workers")
    sub.add_argument("--sweep", nargs=2, metavar=("AXIS", "START:STOP:COUNT"),
                     default=None, help="sweep axis and inclusive grid")
    sub.add_argument("--no-figures", action="store_true",
                     help="skip PNG rendering, write CSV/JSON only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lzsm",
        description="Interference analysis of mirror-symmetric two-level "
                    "drives and SSH edge-state transport.")
    subs = parser.add_subparsers(dest="command", required=True)

    s1 = subs.add_parser("example1", help="two-sharp-minima drive, sweep T")
    _add_common(s1)
    for key in EXAMPLE1_DEFAULTS:
        s1.add_argument(f"--{key}", type=float, default=None)

    s2 = subs.add_parser("example2", help="flat-band drive with hold, sweep tau")
    _add_common(s2)
    for key in EXAMPLE2_DEFAULTS:
        s2.add_argument(f"--{key}", type=float, default=None)

    s3 = subs.add_parser("ssh", help="SSH chain transport, sweep T")
    _add_common(s3)
    s3.add_argument("--sites", type=int, default=None, help="lattice sites (2N)")
    for key in ("w", "v0", "delta0", "dt"):
        s3.add_argument(f"--{key}", type=float, default=None)

    s4 = subs.add_parser("custom", help="custom schedule from --config, sweep tau")
    _add_common(s4)

    s5 = subs.add_parser("verify", help="run a built-in verification suite")
    s5.add_argument("suite", choices=sorted(SUITES))
    s5.add_argument("--config", type=str, default=None,
                    help="JSON schedule spec to verify instead of built-ins")
    s5.add_argument("--out", type=str, default=None,
                    help="also write the JSON report to this file")
    return parser


def _config_from_args(args) -> RunConfig:
    base: dict = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    config = RunConfig.from_dict(base) if base else RunConfig(experiment=args.command)
    config.experiment = args.command

    params = dict(config.params)
    flag_keys = {
        "example1": list(EXAMPLE1_DEFAULTS),
        "example2": list(EXAMPLE2_DEFAULTS),
        "ssh": ["sites", "w", "v0", "delta0", "dt"],
        "custom": [],
    }[args.command]
    for key in flag_keys:
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    config.params = params

    if args.sweep is not None:
        config.sweep_axis = args.sweep[0]
        config.sweep_values = parse_sweep_spec(args.sweep[1])
    if not config.sweep_axis:
        config.sweep_axis = {"example1": "T", "example2": "tau",
                             "ssh": "T", "custom": "tau"}[args.command]
    if args.out is not None:
        config.out = args.out
    if args.steps is not None:
        config.n_steps = args.steps
    if args.tol is not None:
        config.tol = args.tol
    if args.threads is not None:
        config.threads = args.threads
    if args.no_figures:
        config.figures = False
    return config


def _run_verify(args) -> int:
    sched = axis = None
    if args.config:
        with open(args.config) as fh:
            spec = json.load(fh)
        sched, axis = schedule_from_config(spec.get("schedule", spec))
        theta = spec.get("axis_theta")
        phi = spec.get("axis_phi")
        if theta is not None or phi is not None:
            axis = SymmetryAxis(float(theta or 0.0), float(phi or 0.0))
    report = run_suite(args.suite, sched=sched, axis=axis)
    text = json.dumps(report, indent=2)
    print(text)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n")
    return 0 if report["passed"] else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _run_verify(args)
    try:
        config = _config_from_args(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
