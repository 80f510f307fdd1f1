"""Scheduling a fixed set of job sizes at a single instant.

Jobs may be divided along the size dimension, but every piece must land on
a machine whose capacity fits the whole original size.  The minimum-cost
machine configuration is an integer program; this module solves it exactly
at desk scale, rewrites optima into a canonical form, builds the cheap
closed-form configuration used by both schedulers, and decomposes its cost
onto individual jobs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .graph import CostCapacityForest
from .model import (
    ContractViolation,
    InvariantViolation,
    MachineTypeTable,
    SearchSpaceExceeded,
    ValidationError,
    exact_machine_type,
    to_rational,
)

log = logging.getLogger(__name__)

Sized = tuple[Fraction, int]  # (size, exact machine type)


def sized_jobs(jobs: Iterable, table: MachineTypeTable) -> tuple[Sized, ...]:
    """Pair each job size with its exact (lowest fitting) machine type."""
    return tuple(
        (job.size, exact_machine_type(job.size, table)) for job in jobs
    )


def _as_sized(jobs_or_sized, table: MachineTypeTable) -> tuple[Sized, ...]:
    items = list(jobs_or_sized)
    if items and isinstance(items[0], tuple):
        return tuple((to_rational(s), int(m)) for s, m in items)
    return sized_jobs(items, table)


def demand_profile(sized: Sequence[Sized], table: MachineTypeTable) -> list[Fraction]:
    """demand[i] = total size of jobs whose exact type is at least i (1-based)."""
    n = len(table)
    demand = [Fraction(0)] * (n + 2)
    for s, m in sized:
        demand[m] += s
    for i in range(n - 1, 0, -1):
        demand[i] += demand[i + 1]
    return demand[: n + 1]


@dataclass(frozen=True)
class MachineConfiguration:
    """Per-type machine counts; fractional counts are allowed for the
    closed-form configuration, integral ones for actual solutions."""

    table: MachineTypeTable
    counts: tuple[Fraction, ...]

    def __post_init__(self):
        coerced = tuple(to_rational(c) for c in self.counts)
        if len(coerced) != len(self.table):
            raise ValidationError("one count per machine type required")
        if any(c < 0 for c in coerced):
            raise ValidationError("machine counts must be non-negative")
        object.__setattr__(self, "counts", coerced)

    def count(self, z: int) -> Fraction:
        return self.counts[z - 1]

    @property
    def cost(self) -> Fraction:
        return sum(
            (c * self.table.rate(z) for z, c in enumerate(self.counts, start=1)),
            Fraction(0),
        )

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.counts)

    def feasible_for(self, jobs_or_sized) -> bool:
        """Check the covering constraints: for every index i, the capacity of
        machines of type >= i covers the sizes of jobs with exact type >= i."""
        sized = _as_sized(jobs_or_sized, self.table)
        demand = demand_profile(sized, self.table)
        suffix_cap = Fraction(0)
        for i in range(len(self.table), 0, -1):
            suffix_cap += self.counts[i - 1] * self.table.capacity(i)
            if suffix_cap < demand[i]:
                return False
        return True


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def optimal_oneshot(jobs_or_sized, table: MachineTypeTable, *,
                    node_cap: int = 10_000_000) -> MachineConfiguration:
    """Exact minimum-cost machine configuration for one instant.

    Depth-first enumeration over per-type counts from the highest type down.
    Once counts for types >= z are fixed, the covering constraint at index z
    is decided, which gives a forced lower bound per level; an upper bound
    follows because counts beyond the total remaining demand are pure waste.
    Branches are cut against the incumbent using the cheapest per-unit rate
    still available.  Counts are tried in ascending order, so the first
    minimum-cost solution found is also the lexicographically smallest count
    vector read from the highest type down; ties never replace it.

    Raises SearchSpaceExceeded after ``node_cap`` visited nodes.
    """
    sized = _as_sized(jobs_or_sized, table)
    if not sized:
        raise ValidationError("one-shot scheduling needs at least one job")
    n = len(table)
    demand = demand_profile(sized, table)

    # Scale to integers: all comparisons below run on plain ints.
    scale = 1
    for i in range(1, n + 1):
        scale = math.lcm(scale, demand[i].denominator, table.capacity(i).denominator)
    dem = [0] + [int(demand[i] * scale) for i in range(1, n + 1)]
    cap = [0] + [int(table.capacity(i) * scale) for i in range(1, n + 1)]
    rate_scale = 1
    for i in range(1, n + 1):
        rate_scale = math.lcm(rate_scale, table.rate(i).denominator)
    rate = [0] + [int(table.rate(i) * rate_scale) for i in range(1, n + 1)]

    # cheapest (rate, capacity) per capacity unit among types 1..z
    min_pair = [None] * (n + 1)
    best_r, best_g = rate[1], cap[1]
    for z in range(1, n + 1):
        if rate[z] * best_g < best_r * cap[z]:
            best_r, best_g = rate[z], cap[z]
        min_pair[z] = (best_r, best_g)

    counts = [0] * (n + 1)
    best_cost: Optional[int] = None
    best_counts: Optional[list[int]] = None
    nodes = 0

    def record(partial_cost: int) -> None:
        nonlocal best_cost, best_counts
        if best_cost is None or partial_cost < best_cost:
            best_cost = partial_cost
            best_counts = counts[1:].copy()

    def search(z: int, cap_above: int, partial_cost: int) -> None:
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            raise SearchSpaceExceeded(
                f"one-shot search exceeded {node_cap} nodes",
                best_cost=None if best_cost is None
                else Fraction(best_cost, rate_scale),
            )
        if cap_above >= dem[1]:
            # all remaining constraints already covered; zeros are optimal here
            saved = counts[1:z + 1].copy()
            for i in range(1, z + 1):
                counts[i] = 0
            record(partial_cost)
            counts[1:z + 1] = saved
            return
        if z == 0:
            return  # cap_above < dem[1]: infeasible leaf
        need = dem[1] - cap_above
        mr, mg = min_pair[z]
        if best_cost is not None and partial_cost * mg + need * mr >= best_cost * mg:
            return
        lb = max(0, _ceil_div(dem[z] - cap_above, cap[z]))
        ub = max(lb, _ceil_div(need, cap[z]))
        for w in range(lb, ub + 1):
            cost_here = partial_cost + w * rate[z]
            if best_cost is not None and cost_here >= best_cost:
                break
            counts[z] = w
            search(z - 1, cap_above + w * cap[z], cost_here)
        counts[z] = 0

    search(n, 0, 0)
    assert best_counts is not None  # the all-lower-bound path is feasible
    config = MachineConfiguration(
        table, tuple(Fraction(w) for w in best_counts)
    )
    if not config.feasible_for(sized):
        raise InvariantViolation("solver produced an infeasible configuration")
    return config


def _integral_counts(config: MachineConfiguration) -> list[int]:
    if not config.is_integral():
        raise ContractViolation("integral machine configuration required")
    return [0] + [int(c) for c in config.counts]


def canonicalize(config: MachineConfiguration, jobs_or_sized,
                 table: MachineTypeTable,
                 forest: CostCapacityForest) -> MachineConfiguration:
    """Rewrite a configuration into the canonical form used by the analysis,
    preserving cost and feasibility exactly.

    Three passes: (1) fold every machine outside the ancestor chain of the
    highest exact type into that chain, trading machines at equal cost for
    at least equal capacity; (2) bottom-up, whenever the machines strictly
    inside a subtree cost at least one machine of its root, exchange that
    cost for root machines; (3) trim surplus top machines into the type just
    below the top subtree.  On an optimal input the result is an optimal
    configuration whose top type lies on the ancestor chain, whose strict
    subtrees each cost less than one machine of their root, and whose top
    count brackets the hosted load.
    """
    sized = _as_sized(jobs_or_sized, table)
    if not sized:
        raise ValidationError("canonicalize needs at least one job")
    if not table.rates_are_powers_of_8():
        raise ContractViolation("canonical form requires power-of-8 rates")
    if not config.feasible_for(sized):
        raise ContractViolation("input configuration is infeasible")
    w = _integral_counts(config)
    n = len(table)
    rate = [Fraction(0)] + [table.rate(z) for z in range(1, n + 1)]
    k0 = max(m for _, m in sized)
    chain = forest.ancestors(k0)

    # pass 1: concentrate everything above k0 onto the ancestor chain
    w1 = [0] * (n + 1)
    for z in range(1, k0):
        w1[z] = w[z]
    for z in chain:
        moved = 0
        for e in forest.elder_siblings(z):
            for i in forest.subtree(e):
                ratio = rate[i] / rate[z]
                assert ratio.denominator == 1
                moved += int(ratio) * w[i]
        w1[z] = w[z] + moved
    w = w1

    # pass 2: consolidate expensive subtrees into their roots, bottom-up
    for z0 in range(1, n + 1):
        low = forest.lowest(z0)
        inside = sum(w[z] * rate[z] for z in range(low, z0))
        if inside >= rate[z0]:
            q = int(inside / rate[z0])
            target = q * rate[z0]
            acc = Fraction(0)
            zs = z0  # sentinel
            for zc in range(z0 - 1, low - 1, -1):
                acc += w[zc] * rate[zc]
                if acc >= target:
                    zs = zc
                    break
            taken = (target - (acc - w[zs] * rate[zs])) / rate[zs]
            assert taken.denominator == 1 and 0 <= taken <= w[zs]
            w[z0] += q
            for zc in range(zs + 1, z0):
                w[zc] = 0
            w[zs] -= int(taken)

    # pass 3: cap the top count by the ceiling of its hosted load
    k_opt = max(z for z in range(1, n + 1) if w[z] > 0)
    in_top_tree = set(forest.subtree(k_opt))
    hosted = sum((s for s, m in sized if m in in_top_tree), Fraction(0))
    top_cap = math.ceil(hosted / table.capacity(k_opt))
    if w[k_opt] > top_cap:
        if forest.lowest(k_opt) == 1:
            raise ContractViolation(
                "input configuration is not optimal: surplus machines of the "
                "top type with no lower types to absorb them"
            )
        s_type = forest.lowest(k_opt) - 1
        ratio = rate[k_opt] / rate[s_type]
        assert ratio.denominator == 1
        w[s_type] += int(ratio) * (w[k_opt] - top_cap)
        w[k_opt] = top_cap

    result = MachineConfiguration(table, tuple(Fraction(c) for c in w[1:]))
    if result.cost != config.cost or not result.feasible_for(sized):
        raise InvariantViolation("canonical rewrite changed cost or feasibility")
    return result


def canonical_properties(config: MachineConfiguration, jobs_or_sized,
                         table: MachineTypeTable,
                         forest: CostCapacityForest) -> tuple[bool, bool, bool]:
    """Check the three canonical-form properties of a configuration."""
    sized = _as_sized(jobs_or_sized, table)
    k0 = max(m for _, m in sized)
    used = [z for z in table.indices if config.count(z) > 0]
    if not used:
        return (False, False, False)
    k_opt = max(used)
    on_chain = k_opt in forest.ancestors(k0)
    subtree_bounded = all(
        sum(
            (config.count(z) * table.rate(z)
             for z in forest.subtree(z0) if z != z0),
            Fraction(0),
        ) < table.rate(z0)
        for z0 in table.indices
    )
    hosted = sum(
        (s for s, m in sized if m in set(forest.subtree(k_opt))), Fraction(0)
    )
    ratio = hosted / table.capacity(k_opt)
    top_bracketed = math.floor(ratio) <= config.count(k_opt) <= math.ceil(ratio)
    return (on_chain, subtree_bounded, top_bracketed)


def cn_config(jobs_or_sized, z_star: int, table: MachineTypeTable,
              forest: CostCapacityForest) -> MachineConfiguration:
    """Closed-form fractional configuration with top type ``z_star``.

    The top type gets just enough whole machines for its own subtree's jobs;
    its spare room absorbs jobs of the lower cover types from the highest
    down, and each cover type below the absorption boundary gets exactly the
    fractional machine count its jobs need.
    """
    sized = _as_sized(jobs_or_sized, table)
    if not sized:
        raise ValidationError("configuration needs at least one job")
    k0 = max(m for _, m in sized)
    if z_star not in forest.ancestors(k0):
        raise ValidationError(
            f"top type {z_star} is not on the ancestor chain of {k0}"
        )
    tset = forest.t_set(z_star)
    load = {}
    for i in tset:
        members = set(forest.subtree(i))
        load[i] = sum((s for s, m in sized if m in members), Fraction(0))

    counts = [Fraction(0)] * (len(table) + 1)
    top = Fraction(math.ceil(load[z_star] / table.capacity(z_star)))
    counts[z_star] = top
    budget = top * table.capacity(z_star)

    below = [i for i in tset if i != z_star]
    suffix = load[z_star]
    boundary = None
    for i in sorted(below, reverse=True):
        suffix += load[i]
        if suffix > budget:
            boundary = i
            counts[i] = (suffix - budget) / table.capacity(i)
            break
    if boundary is not None:
        for i in below:
            if i < boundary:
                counts[i] = load[i] / table.capacity(i)
    return MachineConfiguration(table, tuple(counts[1:]))


def is_decent(config: MachineConfiguration, z_star: int,
              table: MachineTypeTable, forest: CostCapacityForest) -> bool:
    """No strict ancestor could replace its share of the configuration by a
    single machine of its own type at lower cost."""
    tset = set(forest.t_set(z_star))
    for za in forest.ancestors(z_star)[1:]:
        share = tset & set(forest.subtree(za))
        cost = sum((config.count(z) * table.rate(z) for z in share), Fraction(0))
        if cost > table.rate(za):
            return False
    return True


def z_diamond(jobs_or_sized, table: MachineTypeTable,
              forest: CostCapacityForest) -> int:
    """Lowest type on the ancestor chain of the highest exact type whose
    closed-form configuration is decent.  The chain's top is vacuously
    decent, so this always exists."""
    sized = _as_sized(jobs_or_sized, table)
    if not sized:
        raise ValidationError("job set must not be empty")
    k0 = max(m for _, m in sized)
    for z_star in forest.ancestors(k0):
        config = cn_config(sized, z_star, table, forest)
        if is_decent(config, z_star, table, forest):
            return z_star
    raise InvariantViolation("no decent top type found")  # pragma: no cover


def alternative_config(jobs_or_sized, table: MachineTypeTable,
                       forest: CostCapacityForest) -> tuple[int, MachineConfiguration]:
    sized = _as_sized(jobs_or_sized, table)
    zd = z_diamond(sized, table, forest)
    return zd, cn_config(sized, zd, table, forest)


@dataclass(frozen=True)
class ChargeMap:
    """Per-job cost decomposition of the alternative configuration.

    ``case`` records which rule set the head group's totals:
    "saturated" (head subtree fills at least one top machine),
    "over-budget" (proportional costs exceed one top machine; child-tree
    charges are interpolated down), "under-budget" (head jobs are inflated
    up to one top machine), or "headless" (no job has the top type exactly;
    the group simply pays proportional costs).  ``flagged`` marks the
    headless case whose group total falls short of one top machine.
    """

    charges: Mapping[str, Fraction]
    z_diamond: int
    case: str
    flagged: bool = False

    @property
    def total(self) -> Fraction:
        return sum(self.charges.values(), Fraction(0))

    def __getitem__(self, job_id: str) -> Fraction:
        return self.charges[job_id]


def charge(jobs, table: MachineTypeTable,
           forest: CostCapacityForest) -> ChargeMap:
    """Charge the alternative configuration's cost onto individual jobs.

    Jobs in cover types below the top pay proportional cost at their own
    type.  The top subtree's group pays proportional cost when it fills a
    top machine, and otherwise exactly one top machine, split between jobs
    of the top type and jobs of child subtrees as the case dictates.
    """
    items = [(job.id, job.size, exact_machine_type(job.size, table))
             for job in jobs]
    if not items:
        raise ValidationError("job set must not be empty")
    sized = tuple((s, m) for _, s, m in items)
    zd = z_diamond(sized, table, forest)
    g_top, r_top = table.capacity(zd), table.rate(zd)
    unit_top = r_top / g_top

    charges: dict[str, Fraction] = {}
    for i in forest.t_set(zd):
        if i == zd:
            continue
        members = set(forest.subtree(i))
        unit = table.rate(i) / table.capacity(i)
        for jid, s, m in items:
            if m in members:
                charges[jid] = s * unit

    head_members = set(forest.subtree(zd))
    head = [(jid, s, m) for jid, s, m in items if m in head_members]
    head_size = sum((s for _, s, _ in head), Fraction(0))

    flagged = False
    if head_size >= g_top:
        case = "saturated"
        for jid, s, _ in head:
            charges[jid] = s * unit_top
    else:
        exact_top = [(jid, s) for jid, s, m in head if m == zd]
        child_unit = {}
        for x in forest.children(zd):
            child_unit[x] = table.rate(x) / table.capacity(x)
        child_of = {}
        for jid, s, m in head:
            if m == zd:
                continue
            for x in forest.children(zd):
                if m in set(forest.subtree(x)):
                    child_of[jid] = x
                    break
        h = sum((s for _, s in exact_top), Fraction(0)) * unit_top
        c = h + sum(
            (s * child_unit[child_of[jid]] for jid, s, m in head if m != zd),
            Fraction(0),
        )
        if c > r_top:
            case = "over-budget"
            denom = sum(
                (s * (child_unit[child_of[jid]] - unit_top)
                 for jid, s, m in head if m != zd),
                Fraction(0),
            )
            alpha = (c - r_top) / denom
            for jid, s in exact_top:
                charges[jid] = s * unit_top
            for jid, s, m in head:
                if m != zd:
                    u = child_unit[child_of[jid]]
                    charges[jid] = s * (u - (u - unit_top) * alpha)
        elif exact_top:
            case = "under-budget"
            beta = (r_top - c) / h
            for jid, s in exact_top:
                charges[jid] = s * unit_top * (1 + beta)
            for jid, s, m in head:
                if m != zd:
                    charges[jid] = s * child_unit[child_of[jid]]
        else:
            # No job of the top type to inflate: the group pays only its
            # proportional cost, which may fall short of one top machine.
            case = "headless"
            flagged = c < r_top
            if flagged:
                log.debug(
                    "headless top group at type %d pays %s, below one "
                    "machine at %s", zd, c, r_top,
                )
            for jid, s, m in head:
                charges[jid] = s * child_unit[child_of[jid]]

    return ChargeMap(charges=charges, z_diamond=zd, case=case, flagged=flagged)


def r_star(jobs, config: MachineConfiguration,
           table: MachineTypeTable) -> dict[str, Fraction]:
    """Per-job cost of greedily filling a feasible configuration.

    Machines sorted by capacity descending, jobs by size descending; each
    job fills the current machine and spills at most once into the next.
    Every machine a job touches has capacity at least the job's size, and
    the summed per-job costs never exceed the configuration's cost.
    """
    items = list(jobs)
    if not config.feasible_for(items):
        raise ContractViolation("configuration infeasible for these jobs")
    counts = _integral_counts(config)
    machines: list[tuple[Fraction, Fraction]] = []
    for z in range(len(table), 0, -1):
        machines.extend([(table.capacity(z), table.rate(z))] * counts[z])

    order = sorted(items, key=lambda j: j.size, reverse=True)
    costs: dict[str, Fraction] = {}
    idx = 0
    room = machines[0][0] if machines else Fraction(0)
    for job in order:
        left = job.size
        total = Fraction(0)
        while left > 0:
            if room == 0:
                idx += 1
                room = machines[idx][0]
            g, r = machines[idx]
            assert g >= job.size, "greedy fill hit an undersized machine"
            piece = min(left, room)
            total += piece * r / g
            room -= piece
            left -= piece
        costs[job.id] = total
    return costs
