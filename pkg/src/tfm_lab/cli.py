"""Command-line surface.

Subcommands:

* ``audit``           run one incentive property on one instance file
* ``report-card``     the full 6 x 3 battery, compared to the expected pattern
* ``simulate``        run a scenario file and export the trace
* ``counterexample``  replay a named violation

Exit codes: 0 when all requested checks pass (for report-card: every cell
matches the expected pattern), 2 when at least one Violated verdict was
produced (for counterexample this means the violation was reproduced, which
is the documented outcome), 1 on usage, schema, or runtime errors.  When an
``--out`` path is given, report paths also render a PNG figure next to the
delimited output unless ``--no-plot`` is passed.

``TFM_LAB_SEED`` is the seed fallback when ``--seed`` is absent.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .audit import (
    DSIC,
    MMIC,
    OCA_PROOF,
    AuditError,
    DeviationSpace,
    StrategyNotIndividuallyRational,
    check_dsic,
    check_mmic,
    check_oca_proof,
)
from .battery import default_strategy
from .export import (
    report_rows_to_csv,
    report_rows_to_jsonable,
    trace_to_jsonable,
    verdict_to_jsonable,
    write_json,
    write_trace_csv,
)
from .mechanisms import KINDS
from .model import Mempool
from .report import ReportCardConfig, replay_counterexample, run_report_card
from .scenario import ScenarioError, parse_audit_instance, parse_scenario
from .sim import run, summarize_for

EXIT_PASS = 0
EXIT_ERROR = 1
EXIT_VIOLATED = 2


def _seed_from(args: argparse.Namespace, default: int) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("TFM_LAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ScenarioError(f"TFM_LAB_SEED: expected an integer, got {env!r}") from exc
    return default


def _cmd_audit(args: argparse.Namespace) -> int:
    mech, chain, txs, strategy, forbid, dev_kwargs = parse_audit_instance(args.scenario)
    if args.max_txs is not None and len(txs) > args.max_txs:
        raise ScenarioError(f"instance has {len(txs)} transactions, --max-txs is {args.max_txs}")
    if args.grid_step is not None:
        dev_kwargs["step"] = args.grid_step
    dev = DeviationSpace.for_instance(mech, chain.base_fee, txs, **dev_kwargs)
    prop = args.property
    if prop == MMIC:
        verdict = check_mmic(mech, chain, Mempool(txs), dev)
    else:
        strategy = strategy or default_strategy(mech.kind, prop)
        if prop == DSIC:
            verdict = check_dsic(mech, chain, txs, strategy, dev, forbid_overbidding=forbid)
        else:
            verdict = check_oca_proof(mech, chain, txs, strategy, dev)
    doc = verdict_to_jsonable(verdict, chain, txs)
    print(json.dumps(doc["verdict"], indent=2, sort_keys=True))
    if args.out:
        write_json(doc, args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_VIOLATED if verdict.violated else EXIT_PASS


def _cmd_report_card(args: argparse.Namespace) -> int:
    cfg = ReportCardConfig(
        instances_per_cell=args.instances,
        seed=_seed_from(args, ReportCardConfig().seed),
        grid_step=args.grid_step or 1,
    )
    kinds = [args.mechanism] if args.mechanism else list(KINDS)
    rows = run_report_card(cfg, kinds)
    width = max(len(k) for k in kinds) + 2
    for r in rows:
        flag = "ok" if r.matches else "MISMATCH"
        print(f"{r.mechanism:<{width}} {r.property:<5} {r.verdict:<12} expected={r.expected:<8} [{flag}]  {r.detail}")
    all_match = all(r.matches for r in rows)
    print(f"{'all cells match the expected pattern' if all_match else 'PATTERN MISMATCH'}")
    if args.out:
        out = Path(args.out)
        if args.format == "csv":
            report_rows_to_csv(rows, out)
        else:
            write_json(report_rows_to_jsonable(rows), out)
        print(f"wrote {out}", file=sys.stderr)
        if not args.no_plot:
            from .plots import render_report_card

            fig = render_report_card(rows, out.with_suffix(".png"))
            print(f"wrote {fig}", file=sys.stderr)
    return EXIT_PASS if all_match else EXIT_VIOLATED


def _cmd_simulate(args: argparse.Namespace) -> int:
    scenario = parse_scenario(args.scenario)
    if args.seed is not None or os.environ.get("TFM_LAB_SEED") is not None:
        from dataclasses import replace

        scenario = replace(scenario, seed=_seed_from(args, scenario.seed))
    trace = run(scenario)
    summary = summarize_for(scenario, trace)
    print(json.dumps(summary, indent=2, sort_keys=True))
    if args.out:
        out = Path(args.out)
        if args.format == "json":
            write_json(trace_to_jsonable(trace), out)
        else:
            write_trace_csv(trace, out)
        print(f"wrote {out}", file=sys.stderr)
        if not args.no_plot:
            from .plots import render_trace

            fig = render_trace(trace, scenario.mechanism.target_size, out.with_suffix(".png"))
            print(f"wrote {fig}", file=sys.stderr)
    return EXIT_PASS


def _cmd_counterexample(args: argparse.Namespace) -> int:
    verdict, chain, txs = replay_counterexample(args.name)
    doc = verdict_to_jsonable(verdict, chain, txs)
    print(json.dumps(doc, indent=2, sort_keys=True))
    if args.out:
        write_json(doc, args.out)
        print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_VIOLATED if verdict.violated else EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tfm-lab",
        description="Fee-mechanism lab: incentive audits, report card, and block simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_audit = sub.add_parser("audit", help="run one property check on one instance file")
    p_audit.add_argument("--scenario", required=True, help="instance file (JSON)")
    p_audit.add_argument("--property", required=True, choices=[MMIC, DSIC, OCA_PROOF])
    p_audit.add_argument("--grid-step", type=int, default=None)
    p_audit.add_argument("--max-txs", type=int, default=None)
    p_audit.add_argument("--out", default=None)
    p_audit.set_defaults(func=_cmd_audit)

    p_card = sub.add_parser("report-card", help="full mechanism x property battery")
    p_card.add_argument("--instances", type=int, default=ReportCardConfig().instances_per_cell)
    p_card.add_argument("--seed", type=int, default=None)
    p_card.add_argument("--mechanism", choices=list(KINDS), default=None)
    p_card.add_argument("--grid-step", type=int, default=None)
    p_card.add_argument("--out", default=None)
    p_card.add_argument("--format", choices=["csv", "json"], default="csv")
    p_card.add_argument("--no-plot", action="store_true")
    p_card.set_defaults(func=_cmd_report_card)

    p_sim = sub.add_parser("simulate", help="run a scenario file")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--format", choices=["csv", "json"], default="csv")
    p_sim.add_argument("--no-plot", action="store_true")
    p_sim.set_defaults(func=_cmd_simulate)

    p_cx = sub.add_parser("counterexample", help="replay a named violation")
    p_cx.add_argument("name", help="spa-fake-bid | beta-burn-fpa-oca | beta-burn-1559-oca | "
                                   "tipless-low-basefee-oca | 1559-low-basefee-dsic")
    p_cx.add_argument("--out", default=None)
    p_cx.set_defaults(func=_cmd_counterexample)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, StrategyNotIndividuallyRational, AuditError, KeyError, OSError) as exc:
        msg = exc.args[0] if exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
