"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 solver error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import DataError, SolverError
from .estimation import EstimationConfig, estimate, read_macmap_csv, read_scans_csv, read_usage_csv
from .harness import ExperimentSpec, generalization_trend, report_json, run_experiment
from .pain import Neighborhood, dump_json, load_json, per_home_pain, read_allocation, read_pain
from .solvers import SOLVER_NAMES, run_solver

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _companion(out: Path, role: str) -> Path:
    return out.with_name(f"{out.stem}_{role}{out.suffix or '.json'}")


def cmd_estimate(args) -> int:
    doc = load_json(args.config) if args.config else {}
    cfg = EstimationConfig.from_dict(doc)
    mac_map = read_macmap_csv(args.macmap)
    ids = tuple(doc.get("home_ids") or mac_map.homes())
    hood = Neighborhood(ids, int(doc.get("num_channels", 2)))
    samples = [s for f in args.usage for s in read_usage_csv(f)]
    scans = read_scans_csv(args.scans)
    est = estimate(samples, scans, mac_map, cfg, hood)
    out = Path(args.out)
    dump_json(est.p.to_dict(hood.num_channels), out)
    for role, m in (("U", est.u), ("S", est.s), ("Sb", est.sb)):
        dump_json(m.to_dict(hood.num_channels), _companion(out, role))
    print(json.dumps({"P": str(out), "hours_per_home": len(est.series.axis),
                      "days": [d.isoformat() for d in est.series.days]}))
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.channels < 2:
        raise UsageError("--channels must be >= 2")
    p = read_pain(args.pain)
    config = load_json(args.config) if args.config else {}
    report = run_solver(args.solver, p, args.channels, config, args.seed)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(repr(report.objective))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    p = read_pain(args.pain)
    alloc = read_allocation(args.allocation)
    print(json.dumps(per_home_pain(p, alloc).to_dict(), indent=2))
    return EXIT_OK


def cmd_pipeline(args) -> int:
    spec = ExperimentSpec.load(args.spec)
    text = report_json(run_experiment(spec))
    out = Path(args.out) if args.out else spec.output
    if out is not None:
        out.write_text(text, encoding="utf-8")
        print(str(out))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    from .synth import SynthConfig, generate

    doc = load_json(args.config) if args.config else {}
    if args.seed is not None:
        doc["seed"] = args.seed
    est = EstimationConfig.from_dict(doc.pop("estimation", {}) or {})
    data = generate(SynthConfig.from_dict(doc))
    print(str(data.write(args.out, est)))
    return EXIT_OK


def cmd_trend(args) -> int:
    result = generalization_trend(range(args.seeds), n_homes=20, sigma=args.sigma)
    print(json.dumps(result, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wifipain", description="Wi-Fi channel allocation by potential pain.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="estimate U, S, S_b and P from telemetry CSVs")
    p.add_argument("--usage", nargs="+", required=True)
    p.add_argument("--scans", required=True)
    p.add_argument("--macmap", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="P JSON path; U/S/Sb go next to it")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("solve", help="choose a channel per home")
    p.add_argument("--pain", required=True)
    p.add_argument("--channels", type=int, default=2)
    p.add_argument("--solver", choices=SOLVER_NAMES, default="anneal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="solver config JSON")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("evaluate", help="total and per-home pain of an allocation")
    p.add_argument("--pain", required=True)
    p.add_argument("--allocation", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("pipeline", help="run a train/test experiment")
    p.add_argument("--spec", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("synth", help="write a synthetic neighborhood")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("trend", help="1-day vs 4-day generalization on synthetic data")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--sigma", type=float, default=0.5)
    p.set_defaults(func=cmd_trend)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"wifipain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"wifipain: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (DataError, OSError) as exc:
        print(f"wifipain: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
