"""Command-line front end.

Subcommands: ``analyze`` (one parameter point, JSON to stdout), ``sweep``
(parameter sweep, CSV), ``figure`` (preset sweeps reproducing the
evaluation figures, CSV) and ``verify`` (consistency suite, JSON report).
Exit codes: 0 success, 1 verification failure, 2 invalid arguments.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import FibageError, InvalidConfig
from .models import PrimitiveKind, analyze
from .rates import RateParams
from .sweep import (FIGURES, GridSpec, SWEEP_VARS, SweepSpec, figure_data, rows_to_csv,
                    run_sweep, verify)


def _parse_kinds(text: str) -> tuple[PrimitiveKind, ...]:
    return tuple(PrimitiveKind.parse(token) for token in text.split(",") if token.strip())


def _parse_range(text: str) -> GridSpec:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise InvalidConfig(f"range must look like start:stop:points[:spacing], got {text!r}")
    spacing = parts[3] if len(parts) == 4 else "linear"
    return GridSpec(start=float(parts[0]), stop=float(parts[1]),
                    points=int(parts[2]), spacing=spacing)


def _write_output(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _cmd_analyze(args: argparse.Namespace) -> int:
    kind = PrimitiveKind.parse(args.model)
    if args.no_preempt:
        kind = PrimitiveKind(kind.mechanism, preemptive=False)
    params = RateParams.from_normalized(args.rho_hat, args.beta, args.sigma, args.mu_hat)
    result = analyze(kind, params)
    doc = {
        "kind": kind.mechanism.value,
        "preemptive": kind.preemptive,
        "rho_hat": params.rho_hat,
        "beta": params.beta,
        "sigma": params.sigma,
        "mu_hat": params.mu_hat,
        "pi": [float(x) for x in result.pi.pi],
        "age_app": result.avg_age_app,
        "age_location": result.avg_age_location,
        "delivery": result.delivery.value if result.delivery is not None else None,
    }
    _write_output(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = SweepSpec(
        kinds=_parse_kinds(args.models),
        var=args.var,
        grid=_parse_range(args.range),
        rho_hat=args.rho_hat,
        beta=args.beta,
        sigma_rcu=args.sigma_rcu,
        sigma_rwl=args.sigma_rwl,
        mode="both" if args.simulate else "analytic",
        horizon=args.horizon,
        seed=args.seed,
        batches=args.batches,
        warmup_fraction=args.warmup)
    rows = run_sweep(spec)
    meta = {"var": spec.var, "mode": spec.mode,
            "models": ",".join(k.label for k in spec.kinds)}
    if spec.mode != "analytic":
        meta.update(horizon=spec.horizon, seed=spec.seed, batches=spec.batches)
    _write_output(rows_to_csv(rows, metadata=meta), args.out)
    return 0


def _cmd_figure(args: argparse.Namespace) -> int:
    _write_output(figure_data(args.figure), args.out)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    report = verify(grid_points=args.grid, seed=args.seed, sim_horizon=args.horizon)
    _write_output(json.dumps(report.to_dict(), indent=2) + "\n", args.out)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fibage",
        description="Age analysis and simulation of a shared-memory forwarder "
                    "synchronized by RCU or a readers-writer lock.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="solve one parameter point analytically")
    p.add_argument("--model", required=True, help="rcu or rwl (optionally rcu-np/rwl-np)")
    p.add_argument("--no-preempt", action="store_true",
                   help="use the non-preemptive variant")
    p.add_argument("--rho-hat", type=float, required=True,
                   help="normalized location-update rate")
    p.add_argument("--beta", type=float, required=True, help="normalized app-update rate")
    p.add_argument("--sigma", type=float, required=True, help="normalized read speed")
    p.add_argument("--mu-hat", type=float, default=1.0, help="write speed (default 1)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("sweep", help="sweep a normalized rate over a grid")
    p.add_argument("--models", default="rcu,rwl",
                   help="comma-separated kinds, e.g. rcu,rwl,rcu-np")
    p.add_argument("--var", choices=SWEEP_VARS, default="rho_hat")
    p.add_argument("--range", required=True, metavar="START:STOP:POINTS[:SPACING]",
                   help="grid, e.g. 0.005:0.1:20 or 0.1:10:8:log")
    p.add_argument("--rho-hat", type=float, default=0.05)
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--sigma-rcu", type=float, default=10.0)
    p.add_argument("--sigma-rwl", type=float, default=1.0)
    p.add_argument("--simulate", action="store_true",
                   help="add simulation columns next to the analytic ones")
    p.add_argument("--horizon", type=float, default=1e6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--batches", type=int, default=20)
    p.add_argument("--warmup", type=float, default=0.1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("figure", help="emit the preset sweep behind one figure")
    p.add_argument("figure", choices=FIGURES)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_figure)

    p = sub.add_parser("verify", help="run the internal consistency suite")
    p.add_argument("--grid", type=int, default=100,
                   help="random parameter tuples per check (default 100)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=float, default=2e5,
                   help="simulation horizon for the sim-vs-analytic check")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FibageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
