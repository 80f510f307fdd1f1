"""Acceptance suite.

One test per criterion; each prints a single pass/fail line (run with -s
to see them stream).  All comparisons are exact rational inequalities; the
only tolerances are the per-criterion wall-clock budgets, asserted as
stated.
"""

import random
import subprocess
import sys
import time
from fractions import Fraction as F

import pytest

from bshm.graph import build_forest
from bshm.harness import (
    GeneratorSpec,
    check_forest,
    check_offline,
    check_online,
    check_oneshot_fast,
    check_stretch_integral,
    generate,
    random_table,
)
from bshm import offline, oneshot, online, oracle


def report(num, name, ok, elapsed, limit=None, extra=""):
    budget = f", limit {limit}s" if limit else ""
    tail = f" [{extra}]" if extra else ""
    print(f"ACCEPTANCE {num:02d} {name}: "
          f"{'PASS' if ok else 'FAIL'} ({elapsed:.2f}s{budget}){tail}",
          flush=True)


@pytest.fixture(scope="module")
def oneshot_batch():
    batch = []
    for seed in range(500):
        spec = GeneratorSpec(
            seed=seed,
            n_jobs=1 + seed % 8,
            n_types=1 + seed % 5,
            mu=F(1 + seed % 4),
            horizon=F(12),
            size_dist="clustered" if seed % 3 == 0 else "uniform",
        )
        batch.append((f"one{seed}", generate(spec)))
    return batch


@pytest.fixture(scope="module")
def tiny_batch():
    batch = []
    for seed in range(100):
        spec = GeneratorSpec(
            seed=7000 + seed,
            n_jobs=1 + seed % 6,
            n_types=1 + seed % 3,
            mu=F(1 + seed % 3),
            horizon=F(8),
            size_dist="clustered" if seed % 2 else "uniform",
            time_dist="pileup" if seed % 4 == 0 else "spread",
        )
        batch.append((f"tiny{seed}", generate(spec)))
    return batch


def test_01_worked_example_fidelity(table13, forest13):
    t0 = time.monotonic()
    ok = (
        forest13.parent(10) == 11
        and forest13.ancestors(10) == (10, 11, 13)
        and forest13.children(11) == (9, 10)
        and forest13.subtree(11) == (8, 9, 10, 11)
        and forest13.younger_siblings(11) == (7,)
        and forest13.elder_siblings(11) == (12,)
        and forest13.t_set(10) == (3, 5, 7, 9, 10)
        and forest13.roots == (3, 5, 13)
    )
    elapsed = time.monotonic() - t0
    report(1, "worked-example-fidelity", ok and elapsed < 1, elapsed, 1)
    assert ok
    assert elapsed < 1


def test_02_forest_properties_on_random_tables():
    t0 = time.monotonic()
    rng = random.Random(20240)
    failures = []
    for i in range(1000):
        table = random_table(rng, rng.randint(3, 15))
        forest = build_forest(table)
        failures += [r for r in check_forest(table, forest, f"t{i}")
                     if not r.passed]
    elapsed = time.monotonic() - t0
    ok = not failures
    report(2, "forest-structure-on-1000-tables", ok and elapsed < 10,
           elapsed, 10)
    assert ok, failures[:3]
    assert elapsed < 10


def test_03_oneshot_bracket(oneshot_batch):
    t0 = time.monotonic()
    failures = []
    for label, inst in oneshot_batch:
        if not inst.jobs:
            continue
        forest = build_forest(inst.types)
        opt = oneshot.optimal_oneshot(
            oneshot.sized_jobs(inst.jobs, inst.types), inst.types
        )
        _, alt = oneshot.alternative_config(inst.jobs, inst.types, forest)
        if not (F(7, 15) * alt.cost <= opt.cost <= F(8, 7) * alt.cost):
            failures.append((label, opt.cost, alt.cost))
    elapsed = time.monotonic() - t0
    ok = not failures
    report(3, "oneshot-bracket-500-instances", ok and elapsed < 120,
           elapsed, 120)
    assert ok, failures[:3]
    assert elapsed < 120


def test_04_canonical_optimum(oneshot_batch):
    t0 = time.monotonic()
    failures = []
    for label, inst in oneshot_batch:
        if not inst.jobs:
            continue
        forest = build_forest(inst.types)
        sized = oneshot.sized_jobs(inst.jobs, inst.types)
        opt = oneshot.optimal_oneshot(sized, inst.types)
        out = oneshot.canonicalize(opt, sized, inst.types, forest)
        props = oneshot.canonical_properties(out, sized, inst.types, forest)
        if not (out.cost == opt.cost and out.feasible_for(sized)
                and all(props)):
            failures.append((label, props))
    elapsed = time.monotonic() - t0
    ok = not failures
    report(4, "canonical-optimum-500-instances", ok, elapsed)
    assert ok, failures[:3]


def test_05_charge_brackets_and_group_totals(oneshot_batch):
    t0 = time.monotonic()
    failures = []
    for label, inst in oneshot_batch:
        if not inst.jobs:
            continue
        forest = build_forest(inst.types)
        results = check_oneshot_fast(
            list(inst.jobs), inst.types, forest, label, rng=None
        )
        wanted = {"oneshot/charge-bracket", "oneshot/side-group-total-exact",
                  "oneshot/head-group-total-matches-case"}
        failures += [r for r in results
                     if r.check in wanted and not r.passed]
    elapsed = time.monotonic() - t0
    ok = not failures
    report(5, "charge-brackets-and-totals", ok, elapsed)
    assert ok, failures[:3]


def test_06_charge_monotone_under_growth():
    t0 = time.monotonic()
    rng = random.Random(606060)
    failures = []
    for seed in range(500):
        spec = GeneratorSpec(
            seed=2000 + seed,
            n_jobs=2 + seed % 7,
            n_types=1 + seed % 5,
            mu=F(1 + seed % 3),
            size_dist="clustered" if seed % 3 == 0 else "uniform",
        )
        inst = generate(spec)
        forest = build_forest(inst.types)
        big = oneshot.charge(inst.jobs, inst.types, forest)
        sub = rng.sample(list(inst.jobs), rng.randint(1, len(inst.jobs) - 1))
        small = oneshot.charge(sub, inst.types, forest)
        for job in sub:
            if not small.charges[job.id] >= big.charges[job.id]:
                failures.append((seed, job.id))
    elapsed = time.monotonic() - t0
    ok = not failures
    report(6, "charge-monotone-500-pairs", ok, elapsed)
    assert ok, failures[:3]


def test_07_offline_per_instant_bounds():
    t0 = time.monotonic()
    failures = []
    for seed in range(200):
        spec = GeneratorSpec(
            seed=3000 + seed,
            n_jobs=1 + (seed * 7) % 20,
            n_types=1 + seed % 5,
            mu=F(1 + seed % 4),
            horizon=F(16),
            size_dist="clustered" if seed % 3 == 0 else "uniform",
            time_dist="pileup" if seed % 5 == 0 else "spread",
        )
        inst = generate(spec)
        forest = build_forest(inst.types)
        results = check_offline(
            inst, forest, f"off{seed}",
            with_oracle=True, oneshot_node_cap=400_000,
        )
        failures += [r for r in results if not r.passed]
    elapsed = time.monotonic() - t0
    ok = not failures
    report(7, "offline-per-instant-bounds-200-instances",
           ok and elapsed < 300, elapsed, 300)
    assert ok, [(r.check, r.subject, r.detail) for r in failures[:3]]
    assert elapsed < 300


def test_08_offline_end_to_end_ratio(tiny_batch):
    t0 = time.monotonic()
    failures = []
    worst = F(0)
    for label, inst in tiny_batch:
        if not inst.jobs:
            continue
        forest = build_forest(inst.types)
        schedule, _, _ = offline.alg_offline(inst, forest,
                                             oneshot_node_cap=None)
        cost = schedule.cost(inst.types)
        exact, _ = oracle.opt2(inst)
        if not cost <= 180 * exact:
            failures.append((label, cost, exact))
        if exact:
            worst = max(worst, cost / exact)
    elapsed = time.monotonic() - t0
    ok = not failures
    report(8, "offline-end-to-end-ratio", ok, elapsed,
           extra=f"max offline/opt2 = {worst} ~ {float(worst):.3f}")
    assert ok, failures[:3]


def test_09_online_invariants():
    t0 = time.monotonic()
    failures = []
    for seed in range(200):
        pileup = seed % 3 == 0
        spec = GeneratorSpec(
            seed=4000 + seed,
            n_jobs=8 + seed % 7 if pileup else 1 + seed % 8,
            n_types=1 + seed % 4,
            mu=F(1 + seed % 3),
            horizon=F(12),
            size_dist="clustered" if seed % 2 == 0 else "uniform",
            time_dist="pileup" if pileup else "spread",
        )
        inst = generate(spec)
        forest = build_forest(inst.types)
        results = check_online(
            inst, forest, f"on{seed}",
            with_oracle=True, oneshot_node_cap=400_000,
        )
        failures += [r for r in results if not r.passed]
    elapsed = time.monotonic() - t0
    ok = not failures
    report(9, "online-invariants-200-instances", ok and elapsed < 300,
           elapsed, 300)
    assert ok, [(r.check, r.subject, r.detail) for r in failures[:3]]
    assert elapsed < 300


def test_10_extension_integral():
    t0 = time.monotonic()
    failures = []
    for seed in range(100):
        spec = GeneratorSpec(
            seed=5000 + seed,
            n_jobs=1 + seed % 8,
            n_types=1 + seed % 4,
            mu=F(1 + seed % 3),
            horizon=F(12),
            time_dist="pileup" if seed % 4 == 0 else "spread",
        )
        inst = generate(spec)
        forest = build_forest(inst.types)
        results = check_stretch_integral(inst, forest, f"ext{seed}")
        failures += [r for r in results if not r.passed]
    elapsed = time.monotonic() - t0
    ok = not failures
    report(10, "extension-integral-both-factors", ok, elapsed)
    assert ok, [(r.check, r.subject, r.detail) for r in failures[:3]]


def test_11_online_end_to_end(tiny_batch):
    t0 = time.monotonic()
    failures = []
    ratios = []
    for label, inst in tiny_batch:
        if not inst.jobs:
            continue
        forest = build_forest(inst.types)
        result = online.simulate(inst, forest, check_invariants=True)
        exact, _ = oracle.opt2(inst)
        if not result.total_cost >= exact:
            failures.append((label, result.total_cost, exact))
        if exact:
            ratios.append((inst.mu, result.total_cost / exact))
    worst = max((r for _, r in ratios), default=F(0))
    by_mu = {}
    for m, r in ratios:
        by_mu[m] = max(by_mu.get(m, F(0)), r)
    summary = ", ".join(
        f"mu={m}: max {float(r):.3f}" for m, r in sorted(by_mu.items())
    )
    elapsed = time.monotonic() - t0
    ok = not failures
    report(11, "online-end-to-end-vs-optimum", ok, elapsed,
           extra=f"max online/opt2 = {float(worst):.3f}; {summary}")
    assert ok, failures[:3]


def test_12_cli_determinism(tmp_path):
    t0 = time.monotonic()
    inst_path = tmp_path / "inst.json"
    subprocess.run(
        [sys.executable, "-m", "bshm", "generate", "--seed", "7",
         "--jobs", "5", "--types", "3", "--out", str(inst_path)],
        check=True,
    )
    commands = [
        ["generate", "--seed", "11", "--jobs", "5"],
        ["graph", "--instance", str(inst_path)],
        ["oneshot", "--instance", str(inst_path), "--at", "1"],
        ["offline", "--instance", str(inst_path)],
        ["online", "--instance", str(inst_path)],
        ["oracle", "--instance", str(inst_path)],
        ["verify", "--seed", "3", "--count", "3"],
        ["bench", "--seed", "3", "--count", "3", "--jobs", "4"],
    ]
    mismatches = []
    for argv in commands:
        runs = [
            subprocess.run(
                [sys.executable, "-m", "bshm"] + argv,
                capture_output=True, check=True,
            )
            for _ in range(2)
        ]
        if runs[0].stdout != runs[1].stdout:
            mismatches.append(argv[0])
    elapsed = time.monotonic() - t0
    ok = not mismatches
    report(12, "cli-determinism-all-verbs", ok, elapsed)
    assert ok, mismatches
