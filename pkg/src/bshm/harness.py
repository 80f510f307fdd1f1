"""Instance generation, property suites, and batch reports.

Every inequality asserted by the analysis is re-checked here as an exact
rational comparison on concrete instances.  The fast level covers all
checks that need no exact solver; the full level adds the solver-backed
brackets and the scheduling-optimum ratios on tractable instances.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .graph import CostCapacityForest, build_forest
from .model import (
    Instance,
    InvariantViolation,
    Job,
    MachineTypeTable,
    SearchSpaceExceeded,
    ValidationError,
    exact_machine_type,
    format_rational,
    to_rational,
)
from . import offline, oneshot, online, oracle


# ---------------------------------------------------------------------------
# generation

@dataclass(frozen=True)
class GeneratorSpec:
    """Reproducible random-instance recipe; same seed, same instance."""

    seed: int = 0
    n_jobs: int = 6
    n_types: int = 3
    mu: Fraction = Fraction(2)        # target max/min job length ratio
    size_dist: str = "uniform"        # "uniform" over (0, g_max] or "clustered"
    time_dist: str = "spread"         # "spread" over the horizon or "pileup"
    horizon: Fraction = Fraction(12)
    growth_lo: Fraction = Fraction(5, 4)   # capacity growth factor range
    growth_hi: Fraction = Fraction(32)
    rate_exponent_lo: int = -3             # power-of-8 exponent of the lowest rate

    def __post_init__(self):
        object.__setattr__(self, "mu", to_rational(self.mu))
        object.__setattr__(self, "horizon", to_rational(self.horizon))
        object.__setattr__(self, "growth_lo", to_rational(self.growth_lo))
        object.__setattr__(self, "growth_hi", to_rational(self.growth_hi))
        if self.n_jobs < 0 or self.n_types < 1:
            raise ValidationError("need n_jobs >= 0 and n_types >= 1")
        if self.mu < 1:
            raise ValidationError("max/min length ratio target must be >= 1")
        if self.horizon < self.mu:
            raise ValidationError("horizon must fit the longest job")
        if not 1 < self.growth_lo <= self.growth_hi:
            raise ValidationError("capacity growth factors must exceed 1")
        if self.size_dist not in ("uniform", "clustered"):
            raise ValidationError(f"unknown size distribution {self.size_dist!r}")
        if self.time_dist not in ("spread", "pileup"):
            raise ValidationError(f"unknown time distribution {self.time_dist!r}")


def random_table(rng: random.Random, n_types: int,
                 growth_lo: Fraction = Fraction(5, 4),
                 growth_hi: Fraction = Fraction(32),
                 rate_exponent_lo: int = -3) -> MachineTypeTable:
    """Random valid table: strictly increasing capacities, power-of-8 rates.

    Growth factors vary against the 8x rate steps, so per-unit costs rise
    and fall and the resulting forests take many shapes.
    """
    lo_q, hi_q = int(growth_lo * 4), int(growth_hi * 4)
    caps, exps = [], []
    g = Fraction(1)
    e = rate_exponent_lo + rng.randint(0, 2)
    for _ in range(n_types):
        caps.append(g)
        exps.append(e)
        g *= Fraction(rng.randint(max(5, lo_q), max(5, hi_q)), 4)
        e += rng.choice((1, 1, 1, 2))
    rates = [Fraction(8) ** x for x in exps]
    return MachineTypeTable(tuple(zip(caps, rates)))


def generate_with_intent(spec: GeneratorSpec) -> tuple[Instance, tuple[int, ...]]:
    """Generate an instance plus, per job, the type its size was aimed at."""
    rng = random.Random(spec.seed)
    table = random_table(
        rng, spec.n_types, spec.growth_lo, spec.growth_hi, spec.rate_exponent_lo
    )
    n = spec.n_jobs
    if n == 0:
        return Instance(jobs=(), types=table), ()
    lengths = [Fraction(1)]
    if n > 1:
        lengths.append(spec.mu)
        lengths.extend(
            1 + (spec.mu - 1) * Fraction(rng.randint(0, 16), 16)
            for _ in range(n - 2)
        )
    rng.shuffle(lengths)

    jobs = []
    intents = []
    for i, length in enumerate(lengths):
        if spec.time_dist == "pileup":
            # heavy overlap: releases crowd into one window of unit width
            start = Fraction(rng.randint(0, 16), 16)
        else:
            latest = spec.horizon - length
            start = Fraction(rng.randint(0, int(latest * 4)), 4)
        if spec.size_dist == "uniform":
            size = table.max_capacity * Fraction(rng.randint(1, 48), 48)
            intent = exact_machine_type(size, table)
        else:
            intent = rng.randint(1, len(table))
            lo = table.capacity(intent - 1) if intent > 1 else Fraction(0)
            size = lo + (table.capacity(intent) - lo) * Fraction(rng.randint(13, 16), 16)
        jobs.append(Job(id=f"j{i}", size=size, start=start, end=start + length))
        intents.append(intent)
    return Instance(jobs=tuple(jobs), types=table), tuple(intents)


def generate(spec: GeneratorSpec) -> Instance:
    return generate_with_intent(spec)[0]


# ---------------------------------------------------------------------------
# check plumbing

@dataclass(frozen=True)
class CheckResult:
    check: str
    subject: str
    passed: bool
    detail: str = ""


class Checker:
    def __init__(self, subject: str):
        self.subject = subject
        self.results: list[CheckResult] = []

    def expect(self, check: str, condition: bool, detail: str = "") -> None:
        self.results.append(CheckResult(
            check=check, subject=self.subject, passed=bool(condition),
            detail="" if condition else detail,
        ))


# ---------------------------------------------------------------------------
# forest checks

def check_forest(table: MachineTypeTable, forest: CostCapacityForest,
                 subject: str) -> list[CheckResult]:
    ck = Checker(subject)
    n = len(table)
    try:
        for i in range(1, n + 1):
            forest.ancestors(i)
        well_formed = all(
            p is None or i < p <= n
            for i, p in enumerate(forest.parents, start=1)
        )
        ck.expect("forest/rooted-upward-links", well_formed,
                  f"parents={forest.parents}")
    except (ValidationError, InvariantViolation) as exc:
        ck.expect("forest/rooted-upward-links", False, str(exc))
        return ck.results

    for k in range(1, n + 1):
        sub = forest.subtree(k)
        ck.expect(
            "forest/subtree-consecutive",
            sub == tuple(range(forest.lowest(k), k + 1)),
            f"subtree({k})={sub}",
        )
        tset = forest.t_set(k)
        pairs_ok = all(
            table.unit_cost(y1) <= table.unit_cost(y2)
            for a, y1 in enumerate(tset)
            for y2 in tset[a + 1:]
        )
        ck.expect("forest/unit-cost-monotone-on-cover", pairs_ok,
                  f"t_set({k})={tset}")
        covered: list[int] = []
        for z in tset:
            covered.extend(forest.subtree(z))
        ck.expect(
            "forest/cover-partitions-prefix",
            sorted(covered) == list(range(1, k + 1))
            and len(covered) == len(set(covered)),
            f"t_set({k})={tset} covers {sorted(covered)}",
        )
        ck.expect(
            "forest/cover-members-adjacent",
            all(
                tset[q] == forest.lowest(tset[q + 1]) - 1
                for q in range(len(tset) - 1)
            ),
            f"t_set({k})={tset}",
        )
    for k0 in range(1, n + 1):
        tset = set(forest.t_set(k0))
        for k1 in forest.ancestors(k0):
            inter = tset & set(forest.subtree(k1))
            z0 = min(inter)
            ck.expect(
                "forest/cover-splits-at-subtree",
                inter == {z for z in tset if z >= z0}
                and (tset - inter) == {z for z in tset if z < z0},
                f"k0={k0} k1={k1}",
            )
    return ck.results


# ---------------------------------------------------------------------------
# one-shot checks

def check_oneshot_fast(jobs: Sequence, table: MachineTypeTable,
                       forest: CostCapacityForest, subject: str,
                       rng: Optional[random.Random] = None,
                       subset_samples: int = 2) -> list[CheckResult]:
    ck = Checker(subject)
    if not jobs:
        return ck.results
    sized = oneshot.sized_jobs(jobs, table)
    k0 = max(m for _, m in sized)

    for z_star in forest.ancestors(k0):
        config = oneshot.cn_config(sized, z_star, table, forest)
        tset = forest.t_set(z_star)
        load = {
            i: sum((s for s, m in sized if m in set(forest.subtree(i))),
                   Fraction(0))
            for i in tset
        }
        gap = {
            i: load[i] * table.unit_cost(i) - config.count(i) * table.rate(i)
            for i in tset
        }
        window_ok = all(
            abs(sum(gap[z] for z in tset if z0 <= z <= z1)) < table.rate(z_star)
            for z0 in tset for z1 in tset if z0 <= z1
        )
        ck.expect("oneshot/count-load-window-bound", window_ok,
                  f"top={z_star}")
        suffix_ok = all(
            sum(config.count(z) * table.rate(z) for z in tset if z >= z0)
            >= sum(load[z] * table.unit_cost(z) for z in tset if z >= z0)
            for z0 in tset
        )
        ck.expect("oneshot/suffix-cost-dominates-load", suffix_ok,
                  f"top={z_star}")

    zd = oneshot.z_diamond(sized, table, forest)
    for z_star in forest.ancestors(k0):
        if z_star >= zd:
            break
        config = oneshot.cn_config(sized, z_star, table, forest)
        ck.expect(
            "oneshot/lower-tops-are-not-decent",
            not oneshot.is_decent(config, z_star, table, forest),
            f"top={z_star} below {zd} is decent",
        )

    cmap = oneshot.charge(jobs, table, forest)
    by_id = {job.id: job for job in jobs}
    mtype = {job.id: exact_machine_type(job.size, table) for job in jobs}
    head_members = set(forest.subtree(zd))
    for i in forest.t_set(zd):
        if i == zd:
            continue
        members = set(forest.subtree(i))
        group = [jid for jid in cmap.charges if mtype[jid] in members]
        expected = sum(
            (by_id[jid].size for jid in group), Fraction(0)
        ) * table.unit_cost(i)
        ck.expect(
            "oneshot/side-group-total-exact",
            sum((cmap.charges[jid] for jid in group), Fraction(0)) == expected,
            f"cover type {i}",
        )
    head_ids = [jid for jid in cmap.charges if mtype[jid] in head_members]
    head_total = sum((cmap.charges[jid] for jid in head_ids), Fraction(0))
    head_size = sum((by_id[jid].size for jid in head_ids), Fraction(0))
    if cmap.case == "saturated":
        expected = head_size * table.unit_cost(zd)
    elif cmap.case in ("over-budget", "under-budget"):
        expected = table.rate(zd)
    else:
        expected = (
            sum(
                (by_id[jid].size
                 * table.unit_cost(_child_of(mtype[jid], zd, forest))
                 for jid in head_ids),
                Fraction(0),
            )
        )
    ck.expect(
        "oneshot/head-group-total-matches-case",
        head_total == expected,
        f"case={cmap.case} total={head_total} expected={expected}",
    )

    _, alt = oneshot.alternative_config(sized, table, forest)
    total = cmap.total
    ck.expect(
        "oneshot/charge-bracket",
        Fraction(1, 2) * total <= alt.cost <= Fraction(15, 7) * total,
        f"charges={total} alt={alt.cost}",
    )

    if rng is not None and len(jobs) >= 2:
        for _ in range(subset_samples):
            size = rng.randint(1, len(jobs) - 1)
            sub = rng.sample(list(jobs), size)
            sub_map = oneshot.charge(sub, table, forest)
            ck.expect(
                "oneshot/charge-monotone-under-growth",
                all(sub_map.charges[j.id] >= cmap.charges[j.id] for j in sub),
                f"subset={sorted(j.id for j in sub)}",
            )
    return ck.results


def _child_of(m: int, top: int, forest: CostCapacityForest) -> int:
    for x in forest.children(top):
        if m in set(forest.subtree(x)):
            return x
    raise InvariantViolation(f"type {m} not under {top}")


def check_oneshot_oracle(jobs: Sequence, table: MachineTypeTable,
                         forest: CostCapacityForest, subject: str,
                         node_cap: int = 2_000_000) -> list[CheckResult]:
    ck = Checker(subject)
    if not jobs:
        return ck.results
    sized = oneshot.sized_jobs(jobs, table)
    try:
        opt = oneshot.optimal_oneshot(sized, table, node_cap=node_cap)
    except SearchSpaceExceeded:
        return ck.results
    _, alt = oneshot.alternative_config(sized, table, forest)
    ck.expect(
        "oneshot/opt-bracket",
        Fraction(7, 15) * alt.cost <= opt.cost <= Fraction(8, 7) * alt.cost,
        f"opt={opt.cost} alt={alt.cost}",
    )
    canonical = oneshot.canonicalize(opt, sized, table, forest)
    props = oneshot.canonical_properties(canonical, sized, table, forest)
    ck.expect(
        "oneshot/canonical-form",
        canonical.cost == opt.cost
        and canonical.feasible_for(sized)
        and all(props),
        f"props={props}",
    )
    return ck.results


# ---------------------------------------------------------------------------
# offline checks

def check_offline(instance: Instance, forest: CostCapacityForest,
                  subject: str, *, with_oracle: bool = False,
                  oneshot_node_cap: int = 300_000) -> list[CheckResult]:
    ck = Checker(subject)
    table = instance.types
    schedule, assignment, audit = offline.alg_offline(
        instance, forest,
        oneshot_node_cap=oneshot_node_cap if with_oracle else None,
    )
    try:
        schedule.validate(table)
        ck.expect("offline/machines-within-capacity", True)
    except ValidationError as exc:
        ck.expect("offline/machines-within-capacity", False, str(exc))

    mtype = {job.id: exact_machine_type(job.size, table) for job in instance.jobs}
    assigned_all = [j.id for jobs in assignment.per_type.values() for j in jobs]
    ck.expect(
        "offline/assignment-partitions-jobs",
        sorted(assigned_all) == sorted(j.id for j in instance.jobs),
    )
    ck.expect(
        "offline/assignment-on-ancestor-path",
        all(
            z in forest.ancestors(mtype[j.id])
            for z, jobs in assignment.per_type.items() for j in jobs
        ),
    )

    for a, b in instance.timeline().segments():
        active = [job for job in instance.jobs if job.active_at(a)]
        if not active:
            continue
        k0 = max(mtype[j.id] for j in active)
        active_types = [
            z for z, jobs in assignment.per_type.items()
            if any(j.active_at(a) for j in jobs)
        ]
        k_off = max(active_types)
        ck.expect(
            "offline/head-type-on-ancestor-path",
            k_off in forest.ancestors(k0),
            f"t={a} k_off={k_off} k0={k0}",
        )
        loads = {
            z: sum((j.size for j in assignment.per_type[z] if j.active_at(a)),
                   Fraction(0))
            for z in assignment.per_type
        }
        for z in table.indices:
            below = sum(
                math.ceil(loads[i] / table.capacity(i)) * table.rate(i)
                for i in forest.subtree(z) if i != z
            )
            ck.expect(
                "offline/descendant-cost-capped",
                below <= 2 * table.rate(z),
                f"t={a} z={z} below={below}",
            )
        for z in table.indices:
            ancestors_empty = all(
                loads.get(i, Fraction(0)) == 0
                for i in forest.ancestors(z)[1:]
            )
            z_used = loads.get(z, Fraction(0)) > 0
            exact_here = any(
                j.active_at(a) for j in assignment.residual_exact.get(z, ())
            )
            if ancestors_empty and z_used and not exact_here:
                child_cost = Fraction(0)
                for x in forest.children(z):
                    members = set(forest.subtree(x))
                    sx = sum(
                        (j.size for j in active if mtype[j.id] in members),
                        Fraction(0),
                    )
                    child_cost += sx * table.unit_cost(x)
                ck.expect(
                    "offline/child-load-floor",
                    child_cost >= Fraction(4, 21) * table.rate(z),
                    f"t={a} z={z} child_cost={child_cost}",
                )

    for row in audit:
        if row.alt_config_cost is not None:
            ck.expect(
                "offline/rounded-cost-vs-alt-config",
                row.rounded_cost <= 21 * row.alt_config_cost,
                f"t={row.t0} rounded={row.rounded_cost} alt={row.alt_config_cost}",
            )
        if row.oneshot_opt_cost is not None:
            ck.expect(
                "offline/rounded-cost-vs-oneshot-opt",
                row.rounded_cost <= 45 * row.oneshot_opt_cost,
                f"t={row.t0} rounded={row.rounded_cost} opt={row.oneshot_opt_cost}",
            )
    return ck.results


# ---------------------------------------------------------------------------
# online checks

def check_online(instance: Instance, forest: CostCapacityForest,
                 subject: str, *, with_oracle: bool = False,
                 oneshot_node_cap: int = 300_000) -> list[CheckResult]:
    ck = Checker(subject)
    table = instance.types
    try:
        result = online.simulate(instance, forest, check_invariants=True)
        ck.expect("online/open-cost-invariant", True)
    except InvariantViolation as exc:
        ck.expect("online/open-cost-invariant", False, str(exc))
        return ck.results
    if not instance.jobs:
        return ck.results

    arts = online.artificial_fleet(instance)
    mtype = {job.id: exact_machine_type(job.size, table) for job in instance.jobs}
    art_mtype = {a.id: exact_machine_type(a.size, table) for a in arts}
    per_type = {z: [] for z in table.indices}
    for job, z, _ in result.schedule.entries:
        per_type[z].append(job)

    timeline = online.combined_breakpoints(instance, arts)
    for a, b in timeline.segments():
        counts = result.counts_at(a)
        if not any(counts):
            continue
        k_t = max(z for z in table.indices if counts[z - 1] > 0)
        active_arts = online.active_artificial(arts, a)

        for z in forest.t_set(k_t):
            n_z = counts[z - 1]
            if n_z > 1:
                members = set(forest.subtree(z))
                filled = sum(
                    (j.size for j in per_type[z] if j.active_at(a)),
                    Fraction(0),
                ) + sum(
                    (p.size for p in active_arts if art_mtype[p.id] in members),
                    Fraction(0),
                )
                ck.expect(
                    "online/fill-when-multiple-open",
                    filled > (n_z - 1) * table.capacity(z),
                    f"t={a} z={z} open={n_z} filled={filled}",
                )

        head_jobs = [j for j in per_type[k_t] if j.active_at(a)]
        if counts[k_t - 1] == 1 and head_jobs and all(
            mtype[j.id] < k_t for j in head_jobs
        ):
            for anchor in head_jobs:
                rel = result.release_counts[anchor.id]
                for z in forest.children(k_t):
                    n_rel = rel[z - 1]
                    if n_rel > 1:
                        members = set(forest.subtree(z))
                        filled = sum(
                            (j.size for j in per_type[z] if j.active_at(a)),
                            Fraction(0),
                        ) + sum(
                            (p.size for p in active_arts
                             if art_mtype[p.id] in members),
                            Fraction(0),
                        )
                        ck.expect(
                            "online/fill-at-single-head",
                            filled > (n_rel - 1) * table.capacity(z),
                            f"t={a} z={z} open_at_release={n_rel}",
                        )

        if with_oracle:
            pool = [j for j in instance.jobs if j.active_at(a)] + active_arts
            rate = sum(
                (counts[z - 1] * table.rate(z) for z in table.indices),
                Fraction(0),
            )
            try:
                opt = oneshot.optimal_oneshot(
                    pool, table, node_cap=oneshot_node_cap
                )
            except SearchSpaceExceeded:
                continue
            ck.expect(
                "online/rate-vs-oneshot-opt",
                rate <= 5 * opt.cost,
                f"t={a} rate={rate} opt={opt.cost}",
            )
    return ck.results


def check_stretch_integral(instance: Instance, forest: CostCapacityForest,
                           subject: str,
                           d_values: Optional[Sequence[Fraction]] = None,
                           ) -> list[CheckResult]:
    """Extending every job to the right by d inflates the accumulated
    per-job charges by at most the factor d/min_length + 1.

    With the minimum job length normalized to 1 (as the generator does),
    the default extensions are the length ratio and twice the ratio, and
    the factor is d+1.  For unnormalized instances the extension must
    cover the longest job, so the default scales accordingly.
    """
    ck = Checker(subject)
    if not instance.jobs:
        return ck.results
    table = instance.types
    lengths = [j.length for j in instance.jobs]
    min_len, max_len = min(lengths), max(lengths)
    if d_values is None:
        base_d = max(instance.mu, max_len)
        d_values = (base_d, 2 * base_d)
    base = Fraction(0)
    for a, b in instance.timeline().segments():
        active = [j for j in instance.jobs if j.active_at(a)]
        if active:
            base += (b - a) * oneshot.charge(active, table, forest).total
    for d in d_values:
        arts = online.artificial_jobs(instance, "Fd", d)
        extended = Fraction(0)
        for a, b in online.combined_breakpoints(instance, arts).segments():
            pool = [j for j in instance.jobs if j.active_at(a)]
            pool += online.active_artificial(arts, a)
            if pool:
                extended += (b - a) * oneshot.charge(pool, table, forest).total
        factor = d / min_len + 1
        ck.expect(
            "online/extension-integral",
            extended <= factor * base,
            f"d={d} extended={extended} base={base}",
        )
    return ck.results


# ---------------------------------------------------------------------------
# oracle checks

def check_oracle_suite(instance: Instance, forest: CostCapacityForest,
                       subject: str,
                       budget: Optional[oracle.OracleBudget] = None,
                       ) -> list[CheckResult]:
    ck = Checker(subject)
    table = instance.types
    try:
        cost2, witness = oracle.opt2(instance, budget)
        lb = oracle.opt1_lower_bound(instance, budget)
    except SearchSpaceExceeded:
        return ck.results
    ck.expect(
        "oracle/opt2-above-oneshot-integral",
        cost2 >= lb,
        f"opt2={cost2} integral={lb}",
    )
    try:
        witness.validate(table)
        recomputed = witness.cost(table)
        ck.expect(
            "oracle/witness-consistent",
            recomputed == cost2,
            f"witness cost {recomputed} != reported {cost2}",
        )
    except ValidationError as exc:
        ck.expect("oracle/witness-consistent", False, str(exc))

    schedule, _, _ = offline.alg_offline(instance, forest, oneshot_node_cap=None)
    off_cost = schedule.cost(table)
    ck.expect("offline/cost-at-least-opt2", off_cost >= cost2,
              f"offline={off_cost} opt2={cost2}")
    ck.expect("offline/end-to-end-ratio", off_cost <= 180 * cost2,
              f"offline={off_cost} opt2={cost2}")
    on_cost = online.simulate(instance, forest).total_cost
    ck.expect("online/cost-at-least-opt2", on_cost >= cost2,
              f"online={on_cost} opt2={cost2}")
    return ck.results


# ---------------------------------------------------------------------------
# verify

@dataclass
class VerifyReport:
    results: list[CheckResult]

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]

    def summary(self) -> dict:
        by_check: dict[str, list[CheckResult]] = {}
        for r in self.results:
            by_check.setdefault(r.check, []).append(r)
        return {
            "ok": self.ok,
            "total": len(self.results),
            "failed": len(self.failures()),
            "checks": {
                name: {
                    "runs": len(rs),
                    "failures": [
                        {"subject": r.subject, "detail": r.detail}
                        for r in rs if not r.passed
                    ],
                }
                for name, rs in sorted(by_check.items())
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def verify(instances: Sequence[tuple[str, Instance]], level: str = "fast",
           *, seed: int = 0,
           oneshot_node_cap: int = 300_000,
           opt2_budget: Optional[oracle.OracleBudget] = None,
           opt2_job_limit: int = 6) -> VerifyReport:
    """Run every suite over the given instances.

    "fast" runs all solver-free checks; "full" adds the solver-backed
    brackets everywhere and the exact-optimum ratios on instances small
    enough for the schedule oracle.
    """
    if level not in ("fast", "full"):
        raise ValidationError(f"unknown verification level {level!r}")
    rng = random.Random(seed)
    results: list[CheckResult] = []
    for label, instance in instances:
        forest = build_forest(instance.types)
        results += check_forest(instance.types, forest, label)
        if instance.jobs:
            results += check_oneshot_fast(
                list(instance.jobs), instance.types, forest, label, rng
            )
        results += check_offline(
            instance, forest, label,
            with_oracle=(level == "full"),
            oneshot_node_cap=oneshot_node_cap,
        )
        results += check_online(
            instance, forest, label,
            with_oracle=(level == "full"),
            oneshot_node_cap=oneshot_node_cap,
        )
        results += check_stretch_integral(instance, forest, label)
        if level == "full" and instance.jobs:
            results += check_oneshot_oracle(
                list(instance.jobs), instance.types, forest, label,
                node_cap=oneshot_node_cap,
            )
            if len(instance.jobs) <= opt2_job_limit:
                results += check_oracle_suite(instance, forest, label,
                                              opt2_budget)
    return VerifyReport(results)


# ---------------------------------------------------------------------------
# ratio reports

REPORT_COLUMNS = (
    "instance", "jobs", "types", "mu",
    "offline_cost", "online_cost", "opt1_lower_bound", "opt2",
    "offline_over_opt2", "online_over_opt2",
    "offline_rounded_over_alt_max", "online_rate_over_opt1_max",
)


@dataclass(frozen=True)
class RatioRow:
    instance: str
    jobs: int
    types: int
    mu: Optional[Fraction]
    offline_cost: Fraction
    online_cost: Fraction
    opt1_lower_bound: Optional[Fraction]
    opt2: Optional[Fraction]
    offline_over_opt2: Optional[Fraction]
    online_over_opt2: Optional[Fraction]
    offline_rounded_over_alt_max: Optional[Fraction]
    online_rate_over_opt1_max: Optional[Fraction]

    def as_record(self) -> dict:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, Fraction):
                return format_rational(v)
            return v
        return {col: fmt(getattr(self, col)) for col in REPORT_COLUMNS}


def ratio_report(instances: Sequence[tuple[str, Instance]],
                 level: str = "fast", *,
                 oneshot_node_cap: int = 300_000,
                 opt2_budget: Optional[oracle.OracleBudget] = None,
                 opt2_job_limit: int = 6) -> list[RatioRow]:
    rows = []
    for label, instance in instances:
        table = instance.types
        forest = build_forest(table)
        schedule, _, audit = offline.alg_offline(
            instance, forest, oneshot_node_cap=None
        )
        off_cost = schedule.cost(table)
        sim = online.simulate(instance, forest)
        on_cost = sim.total_cost

        alt_max = None
        for row in audit:
            if row.alt_config_cost:
                r = row.rounded_cost / row.alt_config_cost
                alt_max = r if alt_max is None else max(alt_max, r)

        lb = None
        cost2 = None
        online_max = None
        if level == "full":
            try:
                lb = oracle.opt1_lower_bound(instance, opt2_budget)
            except SearchSpaceExceeded:
                lb = None
            if len(instance.jobs) <= opt2_job_limit:
                try:
                    cost2, _ = oracle.opt2(instance, opt2_budget)
                except SearchSpaceExceeded:
                    cost2 = None
            arts = online.artificial_fleet(instance)
            for a, b in online.combined_breakpoints(instance, arts).segments():
                counts = sim.counts_at(a)
                if not any(counts):
                    continue
                rate = sum(
                    (counts[z - 1] * table.rate(z) for z in table.indices),
                    Fraction(0),
                )
                pool = [j for j in instance.jobs if j.active_at(a)]
                pool += online.active_artificial(arts, a)
                try:
                    opt = oneshot.optimal_oneshot(
                        pool, table, node_cap=oneshot_node_cap
                    )
                except SearchSpaceExceeded:
                    continue
                r = rate / opt.cost
                online_max = r if online_max is None else max(online_max, r)

        rows.append(RatioRow(
            instance=label,
            jobs=len(instance.jobs),
            types=len(table),
            mu=instance.mu if instance.jobs else None,
            offline_cost=off_cost,
            online_cost=on_cost,
            opt1_lower_bound=lb,
            opt2=cost2,
            offline_over_opt2=(off_cost / cost2) if cost2 else None,
            online_over_opt2=(on_cost / cost2) if cost2 else None,
            offline_rounded_over_alt_max=alt_max,
            online_rate_over_opt1_max=online_max,
        ))
    return rows


def report_to_csv(rows: Sequence[RatioRow]) -> str:
    lines = [",".join(REPORT_COLUMNS)]
    for row in rows:
        record = row.as_record()
        lines.append(",".join(str(record[col]) for col in REPORT_COLUMNS))
    return "\n".join(lines) + "\n"


def report_summary(rows: Sequence[RatioRow]) -> dict:
    def stats(values):
        present = [v for v in values if v is not None]
        if not present:
            return None
        return {
            "max": format_rational(max(present)),
            "mean_approx": float(sum(present) / len(present)),
        }

    return {
        "instances": len(rows),
        "offline_over_opt2": stats([r.offline_over_opt2 for r in rows]),
        "online_over_opt2": stats([r.online_over_opt2 for r in rows]),
        "offline_rounded_over_alt_max":
            stats([r.offline_rounded_over_alt_max for r in rows]),
        "online_rate_over_opt1_max":
            stats([r.online_rate_over_opt1_max for r in rows]),
    }


PLOT_SCRIPT = """\
#!/usr/bin/env python3
\"\"\"Plot ratio-report CSVs produced by the bench command.

Usage: python plot_report.py report.csv [out.png]
\"\"\"
import csv
import sys
from fractions import Fraction

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def as_float(text):
    return float(Fraction(text)) if text else None


def main():
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else "report.png"
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    mus = [as_float(r["mu"]) for r in rows]
    off = [as_float(r["offline_over_opt2"]) for r in rows]
    on = [as_float(r["online_over_opt2"]) for r in rows]
    fig, ax = plt.subplots(figsize=(7, 5))
    pts = [(m, v) for m, v in zip(mus, off) if m and v]
    if pts:
        ax.scatter(*zip(*pts), label="offline / exact optimum", alpha=0.6)
    pts = [(m, v) for m, v in zip(mus, on) if m and v]
    if pts:
        ax.scatter(*zip(*pts), label="online / exact optimum", alpha=0.6, marker="x")
    ax.set_xlabel("max/min job length ratio")
    ax.set_ylabel("cost ratio")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
"""
