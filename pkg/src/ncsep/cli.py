"""Command-line entry point.

Examples::

    ncsep toy --out toy.csv
    ncsep sweep --config run.toml --t-end 50 --format json
    ncsep eigen --config run.toml --t 3
    ncsep phases --config run.toml --out trajectory.csv
    ncsep check --config run.toml
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys

import numpy as np

from .canonical import build_hamiltonian, build_omega, build_Q, derived_params, normal_frequencies
from .checks import checks_at
from .config import ExperimentConfig, SweepSpec, load_config, parse_occupation
from .dynamics import OscillatorModes, constraint_residual, integrate_beta, phase_record, write_trajectory_csv
from .errors import ConfigError, NCSepError, PartialResultsError
from .experiment import (
    is_toy_config, make_grid, records_to_json, run_toy, sign_disagreements, sweep,
    toy_ps_closed_form, write_json, write_records_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_REPRODUCTION = 4


def _common(p: argparse.ArgumentParser, grid=True, config=True):
    if config:
        p.add_argument("--config", help="JSON or TOML experiment file")
        p.add_argument("--state", help="occupation numbers as n1,n2")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), help="output format")
    if grid:
        p.add_argument("--t-start", type=float)
        p.add_argument("--t-end", type=float)
        p.add_argument("--t-step", type=float)
        p.add_argument("--refine-tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncsep", description="Separability of a two-dimensional "
                                 "oscillator with noncommuting coordinates.")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("sweep", help="run the pipeline over a time grid"))
    p = sub.add_parser("toy", help="built-in toy model: records plus transition report")
    _common(p, config=False)
    p.add_argument("--convention", choices=("paper", "physical"), default="paper")
    _common(sub.add_parser("check", help="evaluate structural identities on the config grid"))
    p = sub.add_parser("eigen", help="normal frequencies and Q diagnostics at one time")
    _common(p, grid=False)
    p.add_argument("--t", type=float, default=0.0)
    _common(sub.add_parser("phases", help="integrate displacements and report phases"), grid=False)
    return ap


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    sw = cfg.sweep
    grid = {k: getattr(args, k, None) for k in ("t_start", "t_end", "t_step", "refine_tol")}
    if any(v is not None for v in grid.values()):
        sw = SweepSpec(**{**sw.__dict__, **{k: v for k, v in grid.items() if v is not None}})
    n = parse_occupation(args.state) if args.state else cfg.n
    return cfg.with_overrides(sweep=sw, n=n, output_format=args.format, output_path=args.out)


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _emit_records(cfg, records, extra=None):
    with _output(cfg.output_path) as fh:
        if cfg.output_format == "json":
            write_json({"records": records_to_json(records), **(extra or {})}, fh)
        else:
            write_records_csv(records, fh)


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    s = cfg.sweep
    attach = s.closed_form == "toy" or (s.closed_form == "auto" and is_toy_config(cfg.oscillator))
    times = make_grid(s.t_start, s.t_end, s.t_step)
    try:
        records = sweep(cfg.oscillator, times, cfg.n, cfg.convention,
                        toy_ps_closed_form if attach else None)
    except PartialResultsError as exc:
        _emit_records(cfg, exc.records)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _emit_records(cfg, records)
    bad = sign_disagreements(records)
    if bad:
        print(f"warning: pipeline and closed form disagree in sign at {len(bad)} grid points "
              f"(first at t={bad[0]:g})", file=sys.stderr)
        return EXIT_REPRODUCTION
    return EXIT_OK


def _cmd_toy(args) -> int:
    kw = {k: getattr(args, k) for k in ("t_start", "t_end", "t_step", "refine_tol")
          if getattr(args, k) is not None}
    report = run_toy(convention=args.convention, **kw)
    cfg = ExperimentConfig(output_format=args.format or "csv", output_path=args.out)
    summary = report.summary()
    _emit_records(cfg, report.records, {"report": summary} if cfg.output_format == "json" else None)
    for tr in report.transitions:
        print(f"pipeline transition: t={tr.t:.6f} ({tr.direction})", file=sys.stderr)
    for tr in report.closed_form_transitions:
        print(f"closed-form transition: t={tr.t:.6f} ({tr.direction})", file=sys.stderr)
    for run in report.runs:
        print(f"region [{run.t_start:g}, {run.t_end:g}]: {run.verdict}", file=sys.stderr)
    if not report.reproduced:
        print(f"warning: reference transitions {list(report.reference)} not reproduced; "
              f"{len(report.disagreements)} grid points disagree in sign", file=sys.stderr)
        return EXIT_REPRODUCTION
    return EXIT_OK


def _cmd_check(args) -> int:
    cfg = _load(args)
    s = cfg.sweep
    times = make_grid(s.t_start, s.t_end, s.t_step)
    failed = 0
    with _output(cfg.output_path) as fh:
        for t in times:
            for r in checks_at(cfg.oscillator, float(t)):
                failed += not r.passed
                status = "PASS" if r.passed else "FAIL"
                fh.write(f"{status} t={r.t:g} {r.name} value={r.value:.3e} threshold={r.threshold:.0e}\n")
    return EXIT_NUMERICAL if failed else EXIT_OK


def _cmd_eigen(args) -> int:
    cfg = _load(args)
    dp = derived_params(cfg.oscillator, args.t)
    dec = build_Q(dp)
    omega = build_omega(build_hamiltonian(dp)[0])
    l1, l2 = normal_frequencies(dp)
    info = {
        "t": args.t, "lambda1": l1, "lambda2": l2, "b": dp.b, "c": dp.c, "delta": dp.delta,
        "mu": [dp.mu1, dp.mu2], "alpha": [dp.alpha1, dp.alpha2], "nu": [dp.nu1, dp.nu2],
        "gamma": dec.gamma.tolist(), "k": [dec.k1, dec.k2], "method": dec.method,
        "residuals": dec.residuals(omega),
        "omega_eigenvalues_imag": sorted(np.linalg.eigvals(omega).imag.tolist()),
    }
    with _output(cfg.output_path) as fh:
        write_json(info, fh)
    return EXIT_OK


def _cmd_phases(args) -> int:
    cfg = _load(args)
    d = cfg.dynamics
    modes = OscillatorModes(cfg.oscillator)
    traj = integrate_beta(modes, cfg.beta0, (0.0, d.t_end), d.tol, n_points=d.n_points)
    rec = phase_record(traj, *cfg.n)
    with _output(cfg.output_path) as fh:
        write_trajectory_csv(traj, fh)
    summary = {**rec.__dict__, "constraint_residual": constraint_residual(traj)}
    print(json.dumps(summary), file=sys.stderr)
    return EXIT_OK


_COMMANDS = {"sweep": _cmd_sweep, "toy": _cmd_toy, "check": _cmd_check,
             "eigen": _cmd_eigen, "phases": _cmd_phases}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NCSepError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
