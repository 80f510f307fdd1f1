#!/usr/bin/env python3
"""Measure how much slack the proven constants leave on random instances.

Reports, over a batch of instances, the observed maxima of:
  - one-shot optimum vs the closed-form configuration (proven within
    [7/15, 8/7]),
  - per-instant scheduler cost vs 21x the closed-form configuration,
  - per-instant scheduler cost vs 45x the one-shot optimum,
  - open-machine cost vs 5x the one-shot optimum over jobs plus fillers.

Usage: python scripts/bound_slack.py [--count 100] [--seed 0]
"""

import argparse
import json
import sys
from fractions import Fraction

from bshm.graph import build_forest
from bshm.harness import GeneratorSpec, generate
from bshm.model import SearchSpaceExceeded
from bshm import offline, oneshot, online


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--count", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--node-cap", type=int, default=400_000)
    args = parser.parse_args()

    opt_over_alt = Fraction(0)
    alt_over_opt = Fraction(0)
    rounded_over_alt = Fraction(0)
    rounded_over_opt = Fraction(0)
    open_over_opt = Fraction(0)

    for i in range(args.count):
        seed = args.seed + i
        spec = GeneratorSpec(
            seed=seed,
            n_jobs=2 + seed % 10,
            n_types=1 + seed % 5,
            mu=Fraction(1 + seed % 4),
            horizon=Fraction(12),
            size_dist="clustered" if seed % 3 == 0 else "uniform",
            time_dist="pileup" if seed % 5 == 0 else "spread",
        )
        inst = generate(spec)
        forest = build_forest(inst.types)
        table = inst.types

        _, _, audit = offline.alg_offline(
            inst, forest, oneshot_node_cap=args.node_cap
        )
        for row in audit:
            if row.alt_config_cost:
                rounded_over_alt = max(
                    rounded_over_alt, row.rounded_cost / row.alt_config_cost
                )
            if row.oneshot_opt_cost:
                rounded_over_opt = max(
                    rounded_over_opt, row.rounded_cost / row.oneshot_opt_cost
                )
            if row.alt_config_cost and row.oneshot_opt_cost:
                opt_over_alt = max(
                    opt_over_alt, row.oneshot_opt_cost / row.alt_config_cost
                )
                alt_over_opt = max(
                    alt_over_opt, row.alt_config_cost / row.oneshot_opt_cost
                )

        sim = online.simulate(inst, forest)
        arts = online.artificial_fleet(inst)
        for a, _ in online.combined_breakpoints(inst, arts).segments():
            counts = sim.counts_at(a)
            if not any(counts):
                continue
            rate = sum(
                (counts[z - 1] * table.rate(z) for z in table.indices),
                Fraction(0),
            )
            pool = [j for j in inst.jobs if j.active_at(a)]
            pool += online.active_artificial(arts, a)
            try:
                opt = oneshot.optimal_oneshot(pool, table,
                                              node_cap=args.node_cap)
            except SearchSpaceExceeded:
                continue
            open_over_opt = max(open_over_opt, rate / opt.cost)

    json.dump(
        {
            "instances": args.count,
            "oneshot_opt_over_alt": {"seen": float(opt_over_alt),
                                     "proven": float(Fraction(8, 7))},
            "alt_over_oneshot_opt": {"seen": float(alt_over_opt),
                                     "proven": float(Fraction(15, 7))},
            "offline_rate_over_alt": {"seen": float(rounded_over_alt),
                                      "proven": 21.0},
            "offline_rate_over_opt": {"seen": float(rounded_over_opt),
                                      "proven": 45.0},
            "online_rate_over_opt_with_fillers": {"seen": float(open_over_opt),
                                                  "proven": 5.0},
        },
        sys.stdout, indent=2, sort_keys=True,
    )
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
