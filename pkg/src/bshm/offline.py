"""Offline scheduler: partition jobs onto machine types, then pack per type.

Types are visited from the highest index down.  A type always takes the
unassigned jobs whose exact type it is; a job from deeper in the subtree is
pulled up too, but only when its whole interval lies in the region where
running this type is cost-effective (some exact-type job is active, or the
child subtrees' rounded-up machine cost reaches a third of one machine of
this type).  Each per-type job set is then packed onto identical machines
by a pluggable First Fit policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .graph import CostCapacityForest, build_forest
from .model import (
    Instance,
    Job,
    MachineTypeTable,
    SearchSpaceExceeded,
    Timeline,
    ValidationError,
    exact_machine_type,
    total_size,
)
from . import oneshot


@dataclass(frozen=True)
class Schedule:
    """Assignment of each job to a (type, machine instance) pair."""

    entries: tuple[tuple[Job, int, int], ...]  # (job, type index, machine index)

    @property
    def assignments(self) -> dict[str, tuple[int, int]]:
        return {job.id: (z, k) for job, z, k in self.entries}

    def machine_jobs(self) -> dict[tuple[int, int], list[Job]]:
        out: dict[tuple[int, int], list[Job]] = {}
        for job, z, k in self.entries:
            out.setdefault((z, k), []).append(job)
        return out

    def cost(self, table: MachineTypeTable) -> Fraction:
        """Sum over machines of rate times busy time (union of intervals)."""
        from .model import span_measure

        total = Fraction(0)
        for (z, _), jobs in sorted(self.machine_jobs().items()):
            total += table.rate(z) * span_measure(jobs)
        return total

    def cost_rate_at(self, table: MachineTypeTable, t: Fraction) -> Fraction:
        rate = Fraction(0)
        for (z, _), jobs in self.machine_jobs().items():
            if any(job.active_at(t) for job in jobs):
                rate += table.rate(z)
        return rate

    def validate(self, table: MachineTypeTable) -> None:
        """Capacity must hold at every breakpoint of every machine."""
        for (z, _), jobs in self.machine_jobs().items():
            cap = table.capacity(z)
            for point in Timeline.from_jobs(jobs).breakpoints:
                if total_size(jobs, point) > cap:
                    raise ValidationError(
                        f"machine of type {z} overloaded at t={point}"
                    )


@dataclass(frozen=True)
class TypeAssignment:
    """Per-type job sets, with the residual sets kept for audit."""

    per_type: Mapping[int, tuple[Job, ...]]          # K_z
    residual: Mapping[int, tuple[Job, ...]]          # unassigned jobs seen at z
    residual_exact: Mapping[int, tuple[Job, ...]]    # those with exact type z

    def assigned_type(self, job_id: str) -> int:
        for z, jobs in self.per_type.items():
            if any(job.id == job_id for job in jobs):
                return z
        raise KeyError(job_id)


def assign_types(instance: Instance, forest: CostCapacityForest) -> TypeAssignment:
    """Decide which machine type runs each job (highest types first)."""
    table = instance.types
    segments = instance.timeline().segments()
    mtype = {job.id: exact_machine_type(job.size, table) for job in instance.jobs}

    assigned: set[str] = set()
    per_type: dict[int, tuple[Job, ...]] = {}
    residual: dict[int, tuple[Job, ...]] = {}
    residual_exact: dict[int, tuple[Job, ...]] = {}

    for z in range(len(table), 0, -1):
        members = set(forest.subtree(z))
        pool = tuple(
            job for job in instance.jobs
            if mtype[job.id] in members and job.id not in assigned
        )
        exact = tuple(job for job in pool if mtype[job.id] == z)
        residual[z] = pool
        residual_exact[z] = exact

        chosen = list(exact)
        rest = [job for job in pool if mtype[job.id] != z]
        if rest:
            children = forest.children(z)
            kids = {x: set(forest.subtree(x)) for x in children}
            third = table.rate(z) / 3
            covered = []
            for a, b in segments:
                if any(job.active_at(a) for job in exact):
                    covered.append((a, b))
                    continue
                cost = Fraction(0)
                for x in children:
                    sx = sum(
                        (job.size for job in pool
                         if job.active_at(a) and mtype[job.id] in kids[x]),
                        Fraction(0),
                    )
                    cost += math.ceil(sx / table.capacity(x)) * table.rate(x)
                if cost >= third:
                    covered.append((a, b))
            covered_set = set(covered)
            for job in rest:
                inside = all(
                    (a, b) in covered_set
                    for a, b in segments
                    if job.start <= a and b <= job.end
                )
                if inside:
                    chosen.append(job)
        per_type[z] = tuple(chosen)
        assigned.update(job.id for job in chosen)

    return TypeAssignment(
        per_type=per_type, residual=residual, residual_exact=residual_exact
    )


def machines_in_use(machines: Sequence[Sequence[Job]], t) -> int:
    """Number of packed machines hosting at least one active job at t."""
    return sum(
        1 for machine in machines if any(job.active_at(t) for job in machine)
    )


def _first_fit(jobs: Sequence[Job], capacity: Fraction) -> list[list[Job]]:
    machines: list[list[Job]] = []
    for job in jobs:
        placed = False
        for machine in machines:
            overlap = [j for j in machine if j.start < job.end and job.start < j.end]
            points = {job.start}
            points.update(j.start for j in overlap if j.start >= job.start)
            ok = all(
                sum((j.size for j in overlap if j.active_at(p)), Fraction(0))
                + job.size <= capacity
                for p in points
            )
            if ok:
                machine.append(job)
                placed = True
                break
        if not placed:
            machines.append([job])
    return machines


def pack_homogeneous(jobs: Iterable[Job], capacity,
                     policy: str = "longest_first") -> list[list[Job]]:
    """Pack jobs onto identical machines of the given capacity.

    Policies: "longest_first" sorts by descending interval length before
    First Fit; "arrival" runs First Fit in start-time order.  Both return
    machine job lists in machine creation order.
    """
    capacity = Fraction(capacity)
    items = list(jobs)
    for job in items:
        if job.size > capacity:
            raise ValidationError(
                f"job {job.id!r} (size {job.size}) exceeds capacity {capacity}"
            )
    if policy == "longest_first":
        items.sort(key=lambda j: j.length, reverse=True)
    elif policy == "arrival":
        items.sort(key=lambda j: j.start)
    else:
        raise ValidationError(f"unknown packing policy {policy!r}")
    return _first_fit(items, capacity)


@dataclass(frozen=True)
class AuditRow:
    """Per-segment quantities used by the cost-bound checks."""

    t0: Fraction
    t1: Fraction
    rounded_cost: Fraction        # sum over types of ceil(load/cap) * rate
    alt_config_cost: Optional[Fraction]
    oneshot_opt_cost: Optional[Fraction]
    realized_rate: Fraction


def alg_offline(instance: Instance, forest: Optional[CostCapacityForest] = None,
                *, policy: str = "longest_first",
                oneshot_node_cap: Optional[int] = 200_000,
                ) -> tuple[Schedule, TypeAssignment, list[AuditRow]]:
    """Full offline pipeline: type assignment, per-type packing, audit.

    The audit carries, per breakpoint segment, the rounded-up per-type cost
    of the assignment, the closed-form configuration cost for the active
    jobs, the exact one-shot optimum when the solver finishes within
    ``oneshot_node_cap`` nodes (None otherwise or when disabled), and the
    cost rate of the machines actually used.
    """
    table = instance.types
    if forest is None:
        forest = build_forest(table)
    assignment = assign_types(instance, forest)

    entries: list[tuple[Job, int, int]] = []
    for z in sorted(assignment.per_type):
        packed = pack_homogeneous(
            assignment.per_type[z], table.capacity(z), policy=policy
        )
        for idx, machine in enumerate(packed, start=1):
            for job in machine:
                entries.append((job, z, idx))
    order = {job.id: i for i, job in enumerate(instance.jobs)}
    entries.sort(key=lambda e: order[e[0].id])
    schedule = Schedule(tuple(entries))

    audit: list[AuditRow] = []
    for a, b in instance.timeline().segments():
        active = [job for job in instance.jobs if job.active_at(a)]
        rounded = Fraction(0)
        for z, jobs_z in assignment.per_type.items():
            load = sum((j.size for j in jobs_z if j.active_at(a)), Fraction(0))
            rounded += math.ceil(load / table.capacity(z)) * table.rate(z)
        alt_cost = None
        opt_cost = None
        if active:
            _, alt = oneshot.alternative_config(active, table, forest)
            alt_cost = alt.cost
            if oneshot_node_cap:
                try:
                    opt_cost = oneshot.optimal_oneshot(
                        active, table, node_cap=oneshot_node_cap
                    ).cost
                except SearchSpaceExceeded:
                    opt_cost = None
        audit.append(AuditRow(
            t0=a, t1=b,
            rounded_cost=rounded,
            alt_config_cost=alt_cost,
            oneshot_opt_cost=opt_cost,
            realized_rate=schedule.cost_rate_at(table, a),
        ))
    return schedule, assignment, audit
