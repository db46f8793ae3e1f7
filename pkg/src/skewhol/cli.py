"""Command line entry point: ``skewhol run|sweep|check|list-scenarios``.

Exit codes: 0 bound holds and certificates pass, 1 bound violated,
2 certificate failure, 3 configuration error.
"""

import argparse
import logging
import sys
from pathlib import Path

from .experiment import (
    SCENARIOS,
    ConfigError,
    load_config,
    run_certificates,
    run_experiment,
    run_sweep,
    scenario,
    sweep_summary,
)
from .report import FORMATS, canonical_json, emit_report, emit_sweep

EXIT_OK, EXIT_BOUND, EXIT_CERT, EXIT_CONFIG = 0, 1, 2, 3


def _resolve(target, args):
    cfg = scenario(target) if target in SCENARIOS else None
    if cfg is None:
        if not Path(target).exists():
            raise ConfigError(
                f"{target!r} is neither a builtin scenario nor a config file"
            )
        cfg = load_config(target)
    if args.points is not None:
        if args.points < 1:
            raise ConfigError("--points must be positive")
        cfg.points = args.points
        cfg.explicit_points = None
    if args.seed is not None:
        cfg.seed = args.seed
    if args.tol is not None:
        if args.tol <= 0:
            raise ConfigError("--tol must be positive")
        cfg.rank_tol = args.tol
    if args.fd_step is not None:
        if args.fd_step <= 0:
            raise ConfigError("--fd-step must be positive")
        cfg.fd_step = args.fd_step
    if args.variant is not None:
        cfg.variant = {"endo": "endomorphism"}.get(args.variant, args.variant)
    return cfg


def _write(data, out):
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _certificate_text(certs):
    lines = [f"certificates at {certs['points']} points (fd step {certs['fd_step']:g}):"]
    for key, entry in certs.items():
        if not isinstance(entry, dict):
            continue
        status = "ok" if entry["pass"] else "FAIL"
        if "max" in entry:
            lines.append(f"  {key:<17} max {entry['max']:.3e}  < {entry['threshold']:.0e}  {status}")
        else:
            slope = "exact" if entry["slope"] is None else f"slope {entry['slope']:.3f}"
            lines.append(f"  {key:<17} {slope}  {status}")
    lines.append(f"CERTIFICATES PASS: {'yes' if certs['all_pass'] else 'no'}")
    return "\n".join(lines) + "\n"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="skewhol",
        description="Off-diagonal curvature versus mixed tensor rank for "
        "skew-torsion connections on product manifolds.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("target", help="builtin scenario name or TOML config path")
    common.add_argument("--points", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float, help="relative rank tolerance")
    common.add_argument("--fd-step", type=float, help="finite-difference step")
    common.add_argument("--variant", choices=["endo", "vector", "both"])
    common.add_argument("--format", choices=FORMATS, default="text")
    common.add_argument("--out", help="write the report here instead of stdout")

    sub.add_parser("run", parents=[common], help="verify the bound for one configuration")
    sub.add_parser("sweep", parents=[common], help="repeat a run under each sweep metric")
    sub.add_parser("check", parents=[common], help="certificate checks only")
    sub.add_parser("list-scenarios", help="show the builtin scenarios")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "list-scenarios":
        for name, (_, desc) in SCENARIOS.items():
            print(f"{name:<18} {desc}")
        return EXIT_OK
    try:
        cfg = _resolve(args.target, args)
        if args.command == "run":
            report = run_experiment(cfg)
            _write(emit_report(report, args.format), args.out)
            return report.exit_code()
        if args.command == "sweep":
            if not cfg.sweep:
                raise ConfigError("no [sweep] section: nothing to sweep")
            reports = run_sweep(cfg)
            summary = sweep_summary(reports)
            _write(emit_sweep(reports, summary, args.format), args.out)
            if not summary["bound_holds_all"]:
                return EXIT_BOUND
            return EXIT_OK if summary["certificates_pass_all"] else EXIT_CERT
        if args.command == "check":
            certs = run_certificates(cfg)
            if args.format == "json":
                _write(canonical_json(certs).encode(), args.out)
            else:
                _write(_certificate_text(certs).encode(), args.out)
            return EXIT_OK if certs["all_pass"] else EXIT_CERT
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    parser.error(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
