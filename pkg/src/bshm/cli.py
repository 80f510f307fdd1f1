"""Command-line interface.

Verbs: generate, graph, oneshot, offline, online, oracle, verify, bench.
All outputs are deterministic for a fixed seed and arguments; rationals are
printed in canonical reduced form.  The exit code is 0 exactly when every
requested check passed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import harness, offline, oneshot, online, oracle
from .graph import build_forest, to_dot
from .model import (
    BshmError,
    Instance,
    dump_instance,
    format_rational,
    load_instance,
    to_rational,
)


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--jobs", type=int, default=6, metavar="N")
    parser.add_argument("--types", type=int, default=3, metavar="K")
    parser.add_argument("--mu", type=str, default="2", metavar="X")
    parser.add_argument("--out", type=str, default=None, metavar="PATH")
    parser.add_argument("--format", choices=("json", "csv"), default="json")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _spec_from_args(args, seed: int) -> harness.GeneratorSpec:
    mu = to_rational(args.mu)
    return harness.GeneratorSpec(
        seed=seed,
        n_jobs=args.jobs,
        n_types=args.types,
        mu=mu,
        horizon=max(Fraction(12), 3 * mu),
    )


def _batch(args) -> list[tuple[str, Instance]]:
    if args.instance:
        return [
            (path, load_instance(path, round_to_power_of_8=not args.raw_rates))
            for path in args.instance
        ]
    return [
        (f"seed{args.seed + i}", harness.generate(_spec_from_args(args, args.seed + i)))
        for i in range(args.count)
    ]


def _json_dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def cmd_generate(args) -> int:
    instance = harness.generate(_spec_from_args(args, args.seed))
    buf = io.StringIO()
    dump_instance(instance, buf)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_graph(args) -> int:
    instance = load_instance(args.instance, round_to_power_of_8=not args.raw_rates)
    forest = build_forest(instance.types)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(to_dot(forest, instance.types))
    payload = {
        "parents": {
            str(z): forest.parent(z) for z in instance.types.indices
        },
        "roots": list(forest.roots),
    }
    _emit(_json_dumps(payload), args.out)
    return 0


def cmd_oneshot(args) -> int:
    instance = load_instance(args.instance, round_to_power_of_8=not args.raw_rates)
    forest = build_forest(instance.types)
    t = to_rational(args.at)
    active = [job for job in instance.jobs if job.active_at(t)]
    if not active:
        _emit(_json_dumps({"at": format_rational(t), "active_jobs": 0}), args.out)
        return 0
    opt = oneshot.optimal_oneshot(active, instance.types, node_cap=args.node_cap)
    zd, alt = oneshot.alternative_config(active, instance.types, forest)
    cmap = oneshot.charge(active, instance.types, forest)
    payload = {
        "at": format_rational(t),
        "active_jobs": len(active),
        "oneshot_opt_cost": format_rational(opt.cost),
        "oneshot_opt_counts": {
            str(z): format_rational(opt.count(z))
            for z in instance.types.indices if opt.count(z)
        },
        "alt_config_cost": format_rational(alt.cost),
        "alt_top_type": zd,
        "charge_case": cmap.case,
        "charges": {
            jid: format_rational(v) for jid, v in sorted(cmap.charges.items())
        },
    }
    _emit(_json_dumps(payload), args.out)
    return 0


def _schedule_json(schedule: offline.Schedule) -> str:
    payload = {
        job_id: {"type": z, "machine": k}
        for job_id, (z, k) in schedule.assignments.items()
    }
    return _json_dumps(payload)


def cmd_offline(args) -> int:
    instance = load_instance(args.instance, round_to_power_of_8=not args.raw_rates)
    forest = build_forest(instance.types)
    schedule, _, audit = offline.alg_offline(
        instance, forest, oneshot_node_cap=args.node_cap if args.with_opt else None
    )
    if args.out:
        _emit(_schedule_json(schedule), args.out)
    if args.audit:
        with open(args.audit, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([
                "t0", "t1", "rounded_cost", "alt_config_cost",
                "oneshot_opt_cost", "realized_rate",
            ])
            for row in audit:
                writer.writerow([
                    format_rational(row.t0),
                    format_rational(row.t1),
                    format_rational(row.rounded_cost),
                    "" if row.alt_config_cost is None
                    else format_rational(row.alt_config_cost),
                    "" if row.oneshot_opt_cost is None
                    else format_rational(row.oneshot_opt_cost),
                    format_rational(row.realized_rate),
                ])
    cost = schedule.cost(instance.types)
    sys.stdout.write(_json_dumps({"offline_cost": format_rational(cost)}))
    return 0


def cmd_online(args) -> int:
    instance = load_instance(args.instance, round_to_power_of_8=not args.raw_rates)
    forest = build_forest(instance.types)
    result = online.simulate(instance, forest)
    if args.out:
        _emit(_schedule_json(result.schedule), args.out)
    if args.series:
        with open(args.series, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            header = ["t0", "t1"]
            header += [f"open_{z}" for z in instance.types.indices]
            header.append("cost_rate")
            writer.writerow(header)
            for row in result.series:
                writer.writerow(
                    [format_rational(row.t0), format_rational(row.t1)]
                    + [str(c) for c in row.open_counts]
                    + [format_rational(row.cost_rate)]
                )
    status = {"online_cost": format_rational(result.total_cost)}
    exit_code = 0
    if args.check_artificial:
        results = harness.check_online(
            instance, forest, args.instance, with_oracle=True,
            oneshot_node_cap=args.node_cap,
        )
        failures = [r for r in results if not r.passed]
        status["checks_run"] = len(results)
        status["checks_failed"] = len(failures)
        if failures:
            status["failures"] = [
                {"check": r.check, "detail": r.detail} for r in failures
            ]
            exit_code = 1
    sys.stdout.write(_json_dumps(status))
    return exit_code


def cmd_oracle(args) -> int:
    instance = load_instance(args.instance, round_to_power_of_8=not args.raw_rates)
    budget = oracle.OracleBudget(
        max_nodes=args.max_nodes,
        max_machines_per_type=args.max_machines,
    )
    cost2, witness = oracle.opt2(instance, budget)
    lb = oracle.opt1_lower_bound(instance, budget)
    payload = {
        "opt2": format_rational(cost2),
        "opt1_lower_bound": format_rational(lb),
        "witness": {
            job_id: {"type": z, "machine": k}
            for job_id, (z, k) in witness.assignments.items()
        },
    }
    _emit(_json_dumps(payload), args.out)
    return 0


def cmd_verify(args) -> int:
    instances = _batch(args)
    report = harness.verify(
        instances, level=args.level, seed=args.seed,
        oneshot_node_cap=args.node_cap,
    )
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["check", "subject", "passed", "detail"])
        for r in report.results:
            writer.writerow([r.check, r.subject, int(r.passed), r.detail])
        _emit(buf.getvalue(), args.out)
    else:
        _emit(report.to_json() + "\n", args.out)
    return 0 if report.ok else 1


def cmd_bench(args) -> int:
    instances = _batch(args)
    rows = harness.ratio_report(
        instances, level=args.level, oneshot_node_cap=args.node_cap
    )
    csv_text = harness.report_to_csv(rows)
    if args.out:
        _emit(csv_text, args.out)
        sys.stdout.write(_json_dumps(harness.report_summary(rows)))
    elif args.format == "csv":
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(_json_dumps(harness.report_summary(rows)))
    if args.plot_script:
        with open(args.plot_script, "w", encoding="utf-8") as fh:
            fh.write(harness.PLOT_SCRIPT)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bshm",
        description="Busy-time scheduling on heterogeneous machines: "
                    "schedulers, exact oracles, and verification suites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random instance")
    _common_flags(p)

    p = sub.add_parser("graph", help="inspect the cost-per-capacity forest")
    _common_flags(p)
    p.add_argument("--instance", required=True)
    p.add_argument("--dot", default=None, help="write DOT output here")
    p.add_argument("--raw-rates", action="store_true",
                   help="skip rounding rates to powers of 8 at load")

    p = sub.add_parser("oneshot", help="solve a single instant exactly")
    _common_flags(p)
    p.add_argument("--instance", required=True)
    p.add_argument("--at", required=True, help="time instant (rational)")
    p.add_argument("--node-cap", type=int, default=2_000_000)
    p.add_argument("--raw-rates", action="store_true")

    p = sub.add_parser("offline", help="run the offline scheduler")
    _common_flags(p)
    p.add_argument("--instance", required=True)
    p.add_argument("--audit", default=None, help="write per-segment audit CSV")
    p.add_argument("--with-opt", action="store_true",
                   help="include exact one-shot costs in the audit")
    p.add_argument("--node-cap", type=int, default=300_000)
    p.add_argument("--raw-rates", action="store_true")

    p = sub.add_parser("online", help="run the online scheduler")
    _common_flags(p)
    p.add_argument("--instance", required=True)
    p.add_argument("--series", default=None, help="write open-count series CSV")
    p.add_argument("--check-artificial", action="store_true",
                   help="check the fill and cost bounds inline")
    p.add_argument("--node-cap", type=int, default=300_000)
    p.add_argument("--raw-rates", action="store_true")

    p = sub.add_parser("oracle", help="exact optimum at desk scale")
    _common_flags(p)
    p.add_argument("--instance", required=True)
    p.add_argument("--max-nodes", type=int, default=2_000_000)
    p.add_argument("--max-machines", type=int, default=8)
    p.add_argument("--raw-rates", action="store_true")

    p = sub.add_parser("verify", help="run the property suites")
    _common_flags(p)
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--count", type=int, default=25,
                   help="number of generated instances")
    p.add_argument("--instance", action="append", default=None,
                   help="verify these files instead of generated instances")
    p.add_argument("--node-cap", type=int, default=300_000)
    p.add_argument("--raw-rates", action="store_true")

    p = sub.add_parser("bench", help="batch ratio report")
    _common_flags(p)
    p.add_argument("--level", choices=("fast", "full"), default="full")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--instance", action="append", default=None)
    p.add_argument("--node-cap", type=int, default=300_000)
    p.add_argument("--plot-script", default=None,
                   help="write a standalone plotting script here")
    p.add_argument("--raw-rates", action="store_true")

    return parser


HANDLERS = {
    "generate": cmd_generate,
    "graph": cmd_graph,
    "oneshot": cmd_oneshot,
    "offline": cmd_offline,
    "online": cmd_online,
    "oracle": cmd_oracle,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except BshmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
