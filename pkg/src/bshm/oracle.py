"""Ground truth at desk scale: the exact scheduling optimum and the
accumulated one-shot lower bound.

The exact optimum enumerates assignments of jobs to (type, machine
instance) pairs.  Within a type, instance k+1 may only be opened once
instances 1..k are in use by earlier jobs, which kills permutation
symmetry among identical machines.  Budgets make exhaustion explicit: an
exceeded budget raises, carrying the best schedule found so far.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .graph import build_forest
from .model import (
    Instance,
    SearchSpaceExceeded,
    ValidationError,
)
from .offline import Schedule
from . import oneshot


@dataclass(frozen=True)
class OracleBudget:
    max_nodes: int = 2_000_000
    max_machines_per_type: int = 8

    def __post_init__(self):
        if self.max_nodes <= 0 or self.max_machines_per_type <= 0:
            raise ValidationError("oracle budgets must be positive")


def _busy_delta(machine_jobs: list, job) -> Fraction:
    """Extra busy time from adding `job` to a machine (interval union growth)."""
    pieces = [(job.start, job.end)]
    for other in machine_jobs:
        next_pieces = []
        for a, b in pieces:
            lo, hi = max(a, other.start), min(b, other.end)
            if lo >= hi:
                next_pieces.append((a, b))
            else:
                if a < lo:
                    next_pieces.append((a, lo))
                if hi < b:
                    next_pieces.append((hi, b))
        pieces = next_pieces
        if not pieces:
            break
    return sum((b - a for a, b in pieces), Fraction(0))


def _fits(machine_jobs: list, job, capacity: Fraction) -> bool:
    points = {job.start}
    points.update(
        other.start for other in machine_jobs
        if job.start <= other.start < job.end
    )
    for p in points:
        load = sum(
            (other.size for other in machine_jobs if other.active_at(p)),
            Fraction(0),
        )
        if load + job.size > capacity:
            return False
    return True


def opt2(instance: Instance,
         budget: Optional[OracleBudget] = None) -> tuple[Fraction, Schedule]:
    """Exact minimum total cost over all feasible schedules, with a witness.

    Exhaustive depth-first assignment in input job order, pruned by the
    partial cost (adding jobs never reduces any machine's busy time).
    """
    budget = budget or OracleBudget()
    table = instance.types
    jobs = instance.jobs
    if not jobs:
        return Fraction(0), Schedule(())

    feasible_types = {
        job.id: [z for z in table.indices if table.capacity(z) >= job.size]
        for job in jobs
    }

    best_cost: Optional[Fraction] = None
    best_assign: Optional[list[tuple[int, int]]] = None
    assign: list[tuple[int, int]] = []
    machines: dict[int, list[list]] = {z: [] for z in table.indices}
    nodes = 0

    def search(i: int, partial_cost: Fraction) -> None:
        nonlocal nodes, best_cost, best_assign
        nodes += 1
        if nodes > budget.max_nodes:
            raise SearchSpaceExceeded(
                f"exact schedule search exceeded {budget.max_nodes} nodes",
                best_cost=best_cost,
                best=_as_schedule(jobs, best_assign) if best_assign else None,
            )
        if best_cost is not None and partial_cost >= best_cost:
            return
        if i == len(jobs):
            best_cost = partial_cost
            best_assign = assign.copy()
            return
        job = jobs[i]
        for z in feasible_types[job.id]:
            used = machines[z]
            limit = min(len(used) + 1, budget.max_machines_per_type)
            for k in range(limit):
                if k == len(used):
                    used.append([])
                machine = used[k]
                if not _fits(machine, job, table.capacity(z)):
                    if k == len(used) - 1 and not machine:
                        used.pop()
                    continue
                delta = _busy_delta(machine, job) * table.rate(z)
                machine.append(job)
                assign.append((z, k + 1))
                search(i + 1, partial_cost + delta)
                assign.pop()
                machine.pop()
                if k == len(used) - 1 and not machine:
                    used.pop()

    search(0, Fraction(0))
    assert best_cost is not None and best_assign is not None
    return best_cost, _as_schedule(jobs, best_assign)


def _as_schedule(jobs, assign) -> Schedule:
    return Schedule(tuple(
        (job, z, k) for job, (z, k) in zip(jobs, assign)
    ))


def opt1_lower_bound(instance: Instance,
                     budget: Optional[OracleBudget] = None) -> Fraction:
    """Accumulated exact one-shot cost over the breakpoint segments.

    Dividing jobs and re-deciding the configuration at every instant can
    only help, so this never exceeds the exact scheduling optimum.
    """
    budget = budget or OracleBudget()
    table = instance.types
    forest = build_forest(table)
    total = Fraction(0)
    for a, b in instance.timeline().segments():
        active = [job for job in instance.jobs if job.active_at(a)]
        if not active:
            continue
        config = oneshot.optimal_oneshot(
            active, table, node_cap=budget.max_nodes
        )
        total += (b - a) * config.cost
    return total
