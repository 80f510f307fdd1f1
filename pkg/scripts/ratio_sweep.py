#!/usr/bin/env python3
"""Sweep the max/min job length ratio and record cost ratios.

For each ratio value, a batch of tiny instances is generated; the offline
and online schedulers run against the exact-optimum oracle.  Writes one
CSV per run plus a JSON summary on stdout.

Usage: python scripts/ratio_sweep.py [--out sweep.csv] [--per-mu 20]
"""

import argparse
import json
import sys
from fractions import Fraction

from bshm.harness import GeneratorSpec, generate, ratio_report, report_to_csv


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="sweep.csv")
    parser.add_argument("--per-mu", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mus", default="1,2,3,4,6,8")
    args = parser.parse_args()

    instances = []
    for mu_text in args.mus.split(","):
        mu = Fraction(mu_text)
        for i in range(args.per_mu):
            seed = args.seed + 10_000 * int(mu) + i
            spec = GeneratorSpec(
                seed=seed,
                n_jobs=2 + i % 5,
                n_types=1 + i % 3,
                mu=mu,
                horizon=max(Fraction(12), 3 * mu),
                size_dist="clustered" if i % 2 else "uniform",
                time_dist="pileup" if i % 4 == 0 else "spread",
            )
            instances.append((f"mu{mu}_{i}", generate(spec)))

    rows = ratio_report(instances, level="full")
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report_to_csv(rows))

    worst_online = {}
    for row in rows:
        if row.online_over_opt2 is None:
            continue
        key = str(row.mu)
        worst_online[key] = max(
            worst_online.get(key, Fraction(0)), row.online_over_opt2
        )
    json.dump(
        {
            "csv": args.out,
            "instances": len(rows),
            "worst_online_over_opt2_by_mu": {
                k: float(v) for k, v in sorted(worst_online.items())
            },
        },
        sys.stdout, indent=2, sort_keys=True,
    )
    print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
