"""Command-line entry point: ``python3 -m horizonpcm <command> ...``.

Failures print a single ``error: <kind>: <message>`` line on stderr and
exit non-zero (2 for usage errors, 1 otherwise).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .degeneracy import (MYOPIA, TWIN_STORAGE, VRE_SPLIT, build_degenerate_instance,
                         twin_run)
from .formulation import AS_PRINTED, PHYSICAL, FormulationOptions, perturb_storage_costs
from .horizon import HorizonPolicy, SimulationError, run_simulation
from .io import (DataError, load_system, read_ledger, read_prices, refresh_manifest,
                 series_digest, system_digest, write_ledger, write_prices, write_system,
                 write_table)
from .metrics import (daily_net_load_table, dispatch_week_table, metric_report,
                      soc_histogram_table)
from .pricing import compute_lmps, price_stats
from .solver import TIE_BREAKS, SolveSettings
from .system import SynthParams, synth_system, validate_system


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _solver_flags(p: argparse.ArgumentParser, tie_break: bool = True) -> None:
    p.add_argument("--window-hours", type=int, default=48)
    p.add_argument("--advance-hours", type=int, default=24)
    p.add_argument("--mip-gap", type=float, default=1e-4)
    p.add_argument("--time-limit", type=float, default=1000.0)
    if tie_break:
        p.add_argument("--tie-break", choices=TIE_BREAKS, default="lex_forward")
    p.add_argument("--perturb-pct", type=float, default=0.10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--efficiency-convention", choices=(PHYSICAL, AS_PRINTED), default=PHYSICAL)
    p.add_argument("--mip-engine", choices=("highs", "bnb"), default="highs")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="horizonpcm", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a system descriptor and its series")
    p.add_argument("system")

    p = sub.add_parser("synth", help="generate a synthetic system")
    p.add_argument("--zones", type=int, default=3)
    p.add_argument("--thermal-per-zone", type=int, default=2)
    p.add_argument("--hours", type=int, default=168)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb-pct", type=float, default=0.10)
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="run one rolling-horizon simulation")
    p.add_argument("system")
    _solver_flags(p)
    p.add_argument("--prices", action="store_true", help="also compute LMPs")
    p.add_argument("--out", required=True)

    p = sub.add_parser("twin", help="compare two tie-break policies")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("system", nargs="?")
    src.add_argument("--instance", choices=(TWIN_STORAGE, VRE_SPLIT, MYOPIA))
    p.add_argument("--days", type=int, default=None)
    _solver_flags(p, tie_break=False)
    p.add_argument("--tie-break-a", choices=TIE_BREAKS, default="lex_forward")
    p.add_argument("--tie-break-b", choices=TIE_BREAKS, default="lex_reverse")
    p.add_argument("--out", required=True)

    p = sub.add_parser("lmp", help="price a stored run")
    p.add_argument("results")
    p.add_argument("--system", help="descriptor of the run inputs (default: from the manifest)")
    p.add_argument("--time-limit", type=float, default=1000.0)

    p = sub.add_parser("report", help="metrics and plot tables for a stored run")
    p.add_argument("results")
    p.add_argument("--compare", help="second results directory (minuend is the first)")
    p.add_argument("--week", type=int, default=0)
    p.add_argument("--out", required=True)
    return ap


def _settings(args, tie_break: str | None = None) -> SolveSettings:
    return SolveSettings(rel_gap=args.mip_gap, time_limit=args.time_limit,
                         tie_break=tie_break or args.tie_break, seed=args.seed,
                         mip_engine=args.mip_engine)


def _policy(args) -> HorizonPolicy:
    if args.advance_hours > args.window_hours:
        raise UsageError("--advance-hours must not exceed --window-hours")
    name = {(48, 24): "traditional", (192, 24): "extended"}.get(
        (args.window_hours, args.advance_hours), "custom")
    return HorizonPolicy(args.window_hours, args.advance_hours, name)


def _costs(args, spec):
    if not 0 <= args.perturb_pct < 1:
        raise UsageError("--perturb-pct must lie in [0, 1)")
    return perturb_storage_costs(spec, args.perturb_pct, args.seed)


def cmd_validate(args) -> int:
    spec, series = load_system(args.system)
    print(f"ok: {len(spec.zones)} zones, {series.hours} hours")
    return 0


def cmd_synth(args) -> int:
    if args.zones < 1 or args.hours < 24 or args.hours % 24:
        raise UsageError("need --zones >= 1 and --hours a positive multiple of 24")
    spec, series = synth_system(SynthParams(zones=args.zones,
                                            thermal_per_zone=args.thermal_per_zone,
                                            hours=args.hours), args.seed, args.perturb_pct)
    path = write_system(spec, series, args.out)
    print(path)
    return 0


def _run_inputs(args, spec, series):
    return {"system_sha256": system_digest(spec), "series_sha256": series_digest(series),
            "system_path": str(Path(args.system).resolve()) if getattr(args, "system", None)
            else None}


def cmd_run(args) -> int:
    policy = _policy(args)
    spec, series = load_system(args.system)
    settings = _settings(args)
    ledger = run_simulation(spec, series, policy, settings,
                            FormulationOptions(args.efficiency_convention),
                            _costs(args, spec))
    prices = compute_lmps(spec, series, ledger, settings) if args.prices else None
    summary = metric_report(ledger, prices).summary()
    if prices is not None:
        summary["lmp"] = price_stats(prices)
    write_ledger(ledger, args.out, prices, _run_inputs(args, spec, series), summary)
    print(json.dumps({"out": args.out, "tpc_total": summary["tpc_total"],
                      "windows": len(ledger.windows)}))
    return 0


def cmd_twin(args) -> int:
    policy = _policy(args)
    if args.instance:
        spec, series = build_degenerate_instance(args.instance, args.seed, args.days)
    else:
        spec, series = load_system(args.system)
    costs = _costs(args, spec)
    options = FormulationOptions(args.efficiency_convention)
    out = Path(args.out)
    if args.instance:
        write_system(spec, series, out / "input")
    report = twin_run(spec, series, policy, _settings(args, args.tie_break_a),
                      _settings(args, args.tie_break_b), costs, costs, prices=True,
                      options=options)
    inputs = {"system_sha256": system_digest(spec), "series_sha256": series_digest(series)}
    ma = write_ledger(report.ledger_a, out / "a", inputs=inputs)
    mb = write_ledger(report.ledger_b, out / "b", inputs=inputs)
    summary = report.summary()
    summary["runs"] = {"a": {"dir": "a", "files": ma["files"]},
                       "b": {"dir": "b", "files": mb["files"]}}
    (out / "comparison.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    days = report.tpc_daily_delta.size
    fams = sorted(report.dispatch_distance)
    write_table(out / "comparison_daily.csv",
                ["day", "tpc_delta", "cumulative_tpc_delta"] + [f"l1_{f}" for f in fams],
                np.column_stack([np.arange(days), report.tpc_daily_delta,
                                 report.cumulative_delta]
                                + [report.dispatch_distance[f] for f in fams]))
    techs = sorted(report.soc_delta)
    write_table(out / "soc_delta.csv", ["hour"] + [f"soc_delta_pct_{t}" for t in techs],
                np.column_stack([np.arange(report.ledger_a.hours)]
                                + [report.soc_delta[t] for t in techs]))
    total = float(sum(v.sum() for v in report.dispatch_distance.values()))
    print(json.dumps({"out": str(out), "onset_day": report.onset_day,
                      "dispatch_distance": total,
                      "max_objective_rel_diff": summary["max_objective_rel_diff"]}))
    return 0


def _system_for(results: Path, explicit: str | None):
    if explicit:
        return load_system(explicit)
    m = json.loads((results / "manifest.json").read_text())
    path = m.get("inputs", {}).get("system_path")
    if not path:
        raise UsageError("run manifest names no input system; pass --system")
    return load_system(path)


def cmd_lmp(args) -> int:
    results = Path(args.results)
    ledger = read_ledger(results)
    spec, series = _system_for(results, args.system)
    if system_digest(spec) != system_digest(ledger.spec):
        raise DataError(results / "manifest.json", None, "input system differs from the run")
    prices = compute_lmps(spec, series, ledger,
                          SolveSettings(time_limit=args.time_limit))
    write_prices(prices, ledger, results)
    refresh_manifest(results)
    print(json.dumps(price_stats(prices)))
    return 0


def cmd_report(args) -> int:
    results = Path(args.results)
    ledger = read_ledger(results)
    prices = read_prices(results) if (results / "prices.csv").exists() else None
    other = read_ledger(args.compare) if args.compare else None
    rep = metric_report(ledger, prices, other)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = rep.summary()
    if prices is not None:
        summary["lmp"] = price_stats(prices)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    write_table(out / "daily_net_load.csv", *daily_net_load_table(ledger, other))
    write_table(out / "soc_histogram.csv", *soc_histogram_table(ledger))
    write_table(out / "dispatch_week.csv", *dispatch_week_table(ledger, args.week))
    print(json.dumps({"out": str(out), "tpc_total": rep.tpc_total}))
    return 0


COMMANDS = {"validate": cmd_validate, "synth": cmd_synth, "run": cmd_run, "twin": cmd_twin,
            "lmp": cmd_lmp, "report": cmd_report}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"error: simulation: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
