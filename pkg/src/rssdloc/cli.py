"""Command-line interface.

Subcommands:
  run       run a scenario and write track/theta/summary CSVs
  sweep     run a scenario for several values of one config key
  build-db  generate the fingerprint database CSV for a scenario
  compare   run several modes on paired seeds and tabulate the summaries
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .errors import LocalizationError
from .harness import aggregate, run_scenario, scenario_db, write_report_files, write_summary_csv
from .scenario import Mode, load_scenario


def _common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", required=True, help="scenario YAML file")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--trials", type=int, default=None, help="override the trial count")
    p.add_argument("--out", default="out", help="output directory")


def _load(args, extra_overrides=None):
    overrides = dict(extra_overrides or {})
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    return load_scenario(args.scenario, overrides)


def _cmd_run(args) -> int:
    s = _load(args)
    reports = run_scenario(s)
    write_report_files(reports, args.out)
    summary = aggregate(reports)
    theta = ("-" if summary.theta_std_median is None
             else f"{math.degrees(summary.theta_std_median):.2f} deg")
    print(f"{s.name} [{s.mode.value}] trials={summary.trials} "
          f"rmse_median={summary.rmse_median:.4f} m "
          f"rmse_mean={summary.rmse_mean:.4f} m theta_std={theta}")
    return 0


def _cmd_sweep(args) -> int:
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    summaries = []
    for v in values:
        try:
            parsed = float(v) if "." in v or v.lstrip("-").isdigit() else v
        except ValueError:
            parsed = v
        s = _load(args, {args.param: parsed})
        summaries.append(aggregate(run_scenario(s)))
        theta = ("-" if summaries[-1].theta_std_median is None
                 else f"{math.degrees(summaries[-1].theta_std_median):.2f} deg")
        print(f"{args.param}={v}: rmse_median={summaries[-1].rmse_median:.4f} m "
              f"theta_std={theta}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_summary_csv(summaries, out / "summary.csv")
    return 0


def _cmd_build_db(args) -> int:
    s = _load(args)
    db = scenario_db(s)
    out = Path(args.out)
    if out.suffix != ".csv":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "fingerprints.csv"
    db.to_csv(out)
    print(f"wrote {len(db)} reference points to {out}")
    return 0


def _cmd_compare(args) -> int:
    modes = [Mode(m.strip()) for m in args.modes.split(",") if m.strip()]
    base = _load(args)
    summaries = []
    for mode in modes:
        s = base.with_mode(mode)
        summaries.append(aggregate(run_scenario(s)))
        print(f"{mode.value}: rmse_median={summaries[-1].rmse_median:.4f} m "
              f"rmse_mean={summaries[-1].rmse_mean:.4f} m")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_summary_csv(summaries, out / "summary.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rssdloc",
        description="TDOA-assisted RSSD indoor localization simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario")
    _common_args(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="vary one scenario key")
    _common_args(p)
    p.add_argument("--param", required=True,
                   help="dotted config path, e.g. waypoint.update_rate")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("build-db", help="write the fingerprint database CSV")
    _common_args(p)
    p.set_defaults(func=_cmd_build_db)

    p = sub.add_parser("compare", help="run several modes on paired seeds")
    _common_args(p)
    p.add_argument("--modes", required=True,
                   help="comma-separated mode names, e.g. SIM_RSSD,SIM_RSSD_TDOA")
    p.set_defaults(func=_cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LocalizationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
