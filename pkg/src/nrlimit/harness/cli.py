"""Command-line entry point ``nrlimit``."""
from __future__ import annotations

import argparse
import sys
import time

from ..hamalg import expand_dispersion, expand_nonlinearity, normal_form
from .config import ConfigError, load_config
from .experiments import exp_linear_longtime, exp_nonlinear_locuniform, exp_transform_gain, run_evolve
from .validation import run_validation_suite

__all__ = ["main", "build_parser"]


def _print_poly(title: str, poly) -> None:
    print(f"{title}:")
    for line in poly.to_text().splitlines():
        print(f"  {line}")


def cmd_coeffs(args) -> int:
    hs, coeffs = expand_dispersion(args.r)
    fs = expand_nonlinearity(args.l, args.r)
    for j, (a, b) in enumerate(zip(coeffs.a, coeffs.b), start=1):
        print(f"a_{j} = {a}  b_{j} = {b}")
    for j in range(args.r):
        _print_poly(f"h_{j + 1}", hs[j])
        _print_poly(f"F_{j + 1}", fs[j])
    return 0


def cmd_normalform(args) -> int:
    t0 = time.perf_counter()
    nf = normal_form(args.l, args.r, complex_case=args.complex)
    elapsed = time.perf_counter() - t0
    for j in sorted(nf.Z):
        _print_poly(f"Z_{j}", nf.Z[j])
    for j in sorted(nf.chi):
        _print_poly(f"chi_{j}", nf.chi[j])
    print(f"CERTIFIED={nf.certified} TIME={elapsed:.3f}s")
    return 0 if nf.certified else 1


def _run_report(args, func, tag) -> int:
    try:
        cfg = load_config(args.config, tag)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if cfg.experiment != tag:
        print(f"config error: experiment must be {tag!r}, got {cfg.experiment!r}", file=sys.stderr)
        return 2
    report = func(cfg)
    text = report.to_csv(cfg.output or None)
    if not cfg.output:
        sys.stdout.write(text)
    if cfg.dat:
        report.to_dat(cfg.dat)
    for line in report.diagnostics():
        print(line, file=sys.stderr)
    print(report.summary_line())
    return 0 if report.passed else 1


def cmd_evolve(args) -> int:
    try:
        cfg = load_config(args.config, "evolve")
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    traj, text = run_evolve(cfg)
    if not cfg.output:
        sys.stdout.write(text)
    drift = traj.max_drift()
    ok = drift <= cfg.guard
    print(f"DRIFT={drift:.3e} PASS={ok}")
    return 0 if ok else 1


def cmd_validate(args) -> int:
    ok, _ = run_validation_suite(verbose=True)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nrlimit", description="Normal forms and non-relativistic limit experiments")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("coeffs", help="print dispersion/nonlinearity expansion coefficients")
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--r", type=int, required=True)
    s.set_defaults(func=cmd_coeffs)

    s = sub.add_parser("normalform", help="compute the order-r gauge normal form")
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--complex", action="store_true", help="two-component (complex NLKG) system")
    s.set_defaults(func=cmd_normalform)

    for name, func, tag in (
        ("converge-linear", exp_linear_longtime, "linear_longtime"),
        ("converge-nonlinear", exp_nonlinear_locuniform, "nonlinear_locuniform"),
        ("transform-gain", exp_transform_gain, "transform_gain"),
    ):
        s = sub.add_parser(name, help=f"run the {tag} sweep")
        s.add_argument("--config", required=True)
        s.set_defaults(func=lambda a, f=func, t=tag: _run_report(a, f, t))

    s = sub.add_parser("evolve", help="evolve one system and write a trajectory CSV")
    s.add_argument("--config", required=True)
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("validate", help="run the fast validation suite")
    s.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
