"""Event-driven online scheduler and the derived artificial job sets.

Jobs are revealed at their start times.  Placement walks up from the job's
exact machine type: reuse the earliest-opened machine with room (First
Fit), otherwise open a new machine unless that would push the open-machine
cost strictly inside some ancestor's subtree to the ancestor's own rate,
in which case the search climbs to the parent type.  A machine opens with
its first job and closes when its last active job ends; closed machines
are never reused.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .graph import CostCapacityForest, build_forest
from .model import (
    Instance,
    InvariantViolation,
    Job,
    MachineTypeTable,
    Timeline,
    ValidationError,
    exact_machine_type,
    mu,
    span,
    to_rational,
)
from .offline import Schedule


@dataclass
class _Machine:
    seq: int
    index_in_type: int
    mtype: int
    capacity: Fraction
    jobs: list[Job] = field(default_factory=list)

    @property
    def load(self) -> Fraction:
        return sum((job.size for job in self.jobs), Fraction(0))

    @property
    def residual(self) -> Fraction:
        return self.capacity - self.load


class SimulatorState:
    """Open machines and counters; mutated by :func:`place`."""

    def __init__(self, table: MachineTypeTable, forest: CostCapacityForest):
        self.table = table
        self.forest = forest
        self.open: list[_Machine] = []
        self.next_seq = 0
        self.opened_per_type = [0] * (len(table) + 1)

    def open_counts(self) -> tuple[int, ...]:
        counts = [0] * (len(self.table) + 1)
        for machine in self.open:
            counts[machine.mtype] += 1
        return tuple(counts[1:])

    def _open_machine(self, z: int) -> _Machine:
        self.next_seq += 1
        self.opened_per_type[z] += 1
        machine = _Machine(
            seq=self.next_seq,
            index_in_type=self.opened_per_type[z],
            mtype=z,
            capacity=self.table.capacity(z),
        )
        self.open.append(machine)
        return machine

    def finish(self, job: Job) -> None:
        for machine in self.open:
            if any(j.id == job.id for j in machine.jobs):
                machine.jobs = [j for j in machine.jobs if j.id != job.id]
                if not machine.jobs:
                    self.open.remove(machine)
                return
        raise InvariantViolation(f"job {job.id!r} ended but is on no machine")


def place(job: Job, state: SimulatorState) -> _Machine:
    """Choose a machine for a newly released job (mutating the state)."""
    table, forest = state.table, state.forest
    counts = [0] * (len(table) + 1)
    for machine in state.open:
        counts[machine.mtype] += 1

    z = exact_machine_type(job.size, table)
    while True:
        fitting = [
            m for m in state.open
            if m.mtype == z and m.residual >= job.size
        ]
        if fitting:
            target = min(fitting, key=lambda m: m.seq)
            target.jobs.append(job)
            return target
        may_open = True
        for za in forest.ancestors(z)[1:]:
            inside = sum(
                counts[x] * table.rate(x)
                for x in forest.subtree(za) if x != za
            )
            if not inside < table.rate(za) - table.rate(z):
                may_open = False
                break
        if may_open:
            machine = state._open_machine(z)
            machine.jobs.append(job)
            return machine
        parent = forest.parent(z)
        assert parent is not None  # roots always pass the guard
        z = parent


@dataclass(frozen=True)
class SeriesRow:
    t0: Fraction
    t1: Fraction
    open_counts: tuple[int, ...]
    cost_rate: Fraction


@dataclass(frozen=True)
class SimulationResult:
    schedule: Schedule
    series: tuple[SeriesRow, ...]
    release_counts: dict[str, tuple[int, ...]]  # open counts seen at release
    total_cost: Fraction

    def counts_at(self, t) -> tuple[int, ...]:
        t = to_rational(t)
        for row in self.series:
            if row.t0 <= t < row.t1:
                return row.open_counts
        return tuple(0 for _ in self.series[0].open_counts) if self.series else ()


def _check_open_cost_invariant(state: SimulatorState) -> None:
    counts = [0] * (len(state.table) + 1)
    for machine in state.open:
        counts[machine.mtype] += 1
    for z in state.table.indices:
        inside = sum(
            counts[x] * state.table.rate(x)
            for x in state.forest.subtree(z) if x != z
        )
        if not inside < state.table.rate(z):
            raise InvariantViolation(
                f"open machines strictly inside the subtree of {z} cost "
                f"{inside}, at least one type-{z} machine"
            )


def simulate(instance: Instance, forest: Optional[CostCapacityForest] = None,
             *, check_invariants: bool = True) -> SimulationResult:
    """Run the online scheduler over the whole instance.

    Only information available before each start is consulted: the placer
    sees the open machines as of the release instant.  Ends are processed
    before starts at equal times (intervals are half-open); simultaneous
    starts are released in input order.  With ``check_invariants`` the
    open-cost invariant is asserted after every single event.
    """
    table = instance.types
    if forest is None:
        forest = build_forest(table)
    state = SimulatorState(table, forest)

    starts: dict[Fraction, list[Job]] = {}
    ends: dict[Fraction, list[Job]] = {}
    for job in instance.jobs:
        starts.setdefault(job.start, []).append(job)
        ends.setdefault(job.end, []).append(job)

    entries: list[tuple[Job, int, int]] = []
    release_counts: dict[str, tuple[int, ...]] = {}
    series: list[SeriesRow] = []
    points = instance.timeline().breakpoints
    for i, t in enumerate(points):
        for job in ends.get(t, []):
            state.finish(job)
            if check_invariants:
                _check_open_cost_invariant(state)
        for job in starts.get(t, []):
            release_counts[job.id] = state.open_counts()
            machine = place(job, state)
            entries.append((job, machine.mtype, machine.index_in_type))
            if check_invariants:
                _check_open_cost_invariant(state)
        if i + 1 < len(points):
            counts = state.open_counts()
            rate = sum(
                (counts[z - 1] * table.rate(z) for z in table.indices),
                Fraction(0),
            )
            series.append(SeriesRow(t, points[i + 1], counts, rate))

    order = {job.id: i for i, job in enumerate(instance.jobs)}
    entries.sort(key=lambda e: order[e[0].id])
    schedule = Schedule(tuple(entries))
    total = sum(
        ((row.t1 - row.t0) * row.cost_rate for row in series), Fraction(0)
    )
    return SimulationResult(
        schedule=schedule,
        series=tuple(series),
        release_counts=release_counts,
        total_cost=total,
    )


@dataclass(frozen=True)
class ArtificialJob:
    """A derived job used by the analysis: same size as its source, active
    on the source's interval shifted/extended and clipped to the span of
    the original job set.  Clipping can split the interval or empty it;
    empty artifacts are kept but are never active."""

    id: str
    size: Fraction
    pieces: tuple[tuple[Fraction, Fraction], ...]
    kind: str
    source_id: str

    def active_at(self, t) -> bool:
        return any(a <= t < b for a, b in self.pieces)

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    @property
    def start(self) -> Fraction:  # for breakpoint collection on non-empty pieces
        return self.pieces[0][0]

    @property
    def end(self) -> Fraction:
        return self.pieces[-1][1]


def _clip(a: Fraction, b: Fraction,
          cover: tuple[tuple[Fraction, Fraction], ...]) -> tuple[tuple[Fraction, Fraction], ...]:
    out = []
    for lo, hi in cover:
        p, q = max(a, lo), min(b, hi)
        if p < q:
            out.append((p, q))
    return tuple(out)


def artificial_jobs(instance: Instance, kind: str,
                    d=None) -> tuple[ArtificialJob, ...]:
    """Build one derived job per original job.

    Kinds: "F1" copies the interval; "F2" and "F3" start at the source's
    end and extend it by the max/min length ratio and twice that ratio;
    "Fd" extends by an explicit amount d, required to be at least the
    ratio.  All extensions are clipped to the span of the instance's jobs.
    """
    jobs = instance.jobs
    if not jobs:
        return ()
    cover = span(jobs)
    ratio = mu(jobs)
    if kind == "F1":
        shift = None
    elif kind == "F2":
        shift = ratio
    elif kind == "F3":
        shift = 2 * ratio
    elif kind == "Fd":
        if d is None:
            raise ValidationError("kind 'Fd' needs an extension amount d")
        shift = to_rational(d)
        if shift < ratio:
            raise ValidationError(
                f"extension {shift} is below the max/min length ratio {ratio}"
            )
    else:
        raise ValidationError(f"unknown artificial job kind {kind!r}")

    out = []
    for job in jobs:
        if shift is None:
            pieces = ((job.start, job.end),)
        else:
            pieces = _clip(job.end, job.end + shift, cover)
        out.append(ArtificialJob(
            id=f"{kind.lower()}:{job.id}",
            size=job.size,
            pieces=pieces,
            kind=kind,
            source_id=job.id,
        ))
    return tuple(out)


def artificial_fleet(instance: Instance) -> tuple[ArtificialJob, ...]:
    """The full derived set: copies plus both extensions, for every job."""
    return (
        artificial_jobs(instance, "F1")
        + artificial_jobs(instance, "F2")
        + artificial_jobs(instance, "F3")
    )


@dataclass(frozen=True)
class _ActivePiece:
    """One active artificial job at a fixed instant, viewed as a plain job."""

    id: str
    size: Fraction


def active_artificial(arts: Iterable[ArtificialJob], t) -> list[_ActivePiece]:
    t = to_rational(t)
    return [
        _ActivePiece(id=a.id, size=a.size)
        for a in arts if a.active_at(t)
    ]


def combined_breakpoints(instance: Instance,
                         arts: Iterable[ArtificialJob]) -> Timeline:
    intervals = [(job.start, job.end) for job in instance.jobs]
    for art in arts:
        intervals.extend(art.pieces)
    return Timeline.from_intervals(intervals)
