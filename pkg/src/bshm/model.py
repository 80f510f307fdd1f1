"""Core domain types for busy-time scheduling on heterogeneous machines.

Jobs occupy half-open time intervals and carry a rational size.  Machine
types have strictly increasing capacities and cost rates, with rates kept
as integer powers of 8 after rounding.  Everything downstream (forest
construction, one-shot solving, schedulers, oracles) works with exact
rationals so that every bound can be checked as a sharp inequality with
no floating-point tolerance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


class BshmError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(BshmError):
    """Malformed input: bad rationals, broken invariants, bad indices."""


class InfeasibleJobError(ValidationError):
    """A job is larger than the largest machine capacity."""


class ContractViolation(BshmError):
    """A precondition of an operation does not hold (e.g. infeasible config)."""


class InvariantViolation(BshmError):
    """A runtime invariant that should always hold was observed broken."""


class SearchSpaceExceeded(BshmError):
    """An exact search hit its node budget.

    Carries the best solution found so far (never to be mistaken for the
    optimum).
    """

    def __init__(self, message: str, best_cost=None, best=None):
        super().__init__(message)
        self.best_cost = best_cost
        self.best = best


def to_rational(value) -> Fraction:
    """Coerce an int, Fraction, or "p/q" / decimal string to a Fraction.

    Floats are rejected: they have no exact decimal meaning once parsed,
    and this package promises exact arithmetic end to end.  Instance files
    may still contain decimal literals; the JSON loader parses those
    exactly (see :func:`load_instance`).
    """
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"cannot parse rational from {value!r}") from exc
    if isinstance(value, float):
        raise ValidationError(
            f"refusing float {value!r}; use an int or a 'p/q' string"
        )
    raise ValidationError(f"cannot parse rational from {value!r}")


def format_rational(x: Fraction):
    """Canonical JSON form: plain int when integral, reduced "p/q" otherwise."""
    if x.denominator == 1:
        return int(x)
    return f"{x.numerator}/{x.denominator}"


def is_power_of_8(x: Fraction) -> bool:
    num, den = x.numerator, x.denominator
    if num == 1:
        num, den = den, num
    if den != 1 or num <= 0:
        return False
    while num % 8 == 0:
        num //= 8
    return num == 1


@dataclass(frozen=True)
class Job:
    """An interval job: positive rational size, active on [start, end)."""

    id: str
    size: Fraction
    start: Fraction
    end: Fraction

    def __post_init__(self):
        object.__setattr__(self, "size", to_rational(self.size))
        object.__setattr__(self, "start", to_rational(self.start))
        object.__setattr__(self, "end", to_rational(self.end))
        if self.size <= 0:
            raise ValidationError(f"job {self.id!r}: size must be positive")
        if not self.start < self.end:
            raise ValidationError(
                f"job {self.id!r}: empty or inverted interval "
                f"[{self.start}, {self.end})"
            )

    @property
    def length(self) -> Fraction:
        return self.end - self.start

    def active_at(self, t) -> bool:
        return self.start <= t < self.end


@dataclass(frozen=True)
class MachineTypeTable:
    """Machine types indexed 1..n with strictly increasing capacity and rate."""

    entries: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        coerced = tuple(
            (to_rational(g), to_rational(r)) for g, r in self.entries
        )
        object.__setattr__(self, "entries", coerced)
        if not coerced:
            raise ValidationError("machine type table must not be empty")
        for g, r in coerced:
            if g <= 0 or r <= 0:
                raise ValidationError("capacities and rates must be positive")
        for (g0, r0), (g1, r1) in zip(coerced, coerced[1:]):
            if not (g0 < g1 and r0 < r1):
                raise ValidationError(
                    "capacities and rates must be strictly increasing with index"
                )

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def indices(self) -> range:
        return range(1, len(self.entries) + 1)

    def _check_index(self, z: int) -> None:
        if not 1 <= z <= len(self.entries):
            raise ValidationError(f"type index {z} out of range 1..{len(self)}")

    def capacity(self, z: int) -> Fraction:
        self._check_index(z)
        return self.entries[z - 1][0]

    def rate(self, z: int) -> Fraction:
        self._check_index(z)
        return self.entries[z - 1][1]

    def unit_cost(self, z: int) -> Fraction:
        """Cost rate per unit of capacity."""
        self._check_index(z)
        g, r = self.entries[z - 1]
        return r / g

    @property
    def max_capacity(self) -> Fraction:
        return self.entries[-1][0]

    def rates_are_powers_of_8(self) -> bool:
        return all(is_power_of_8(r) for _, r in self.entries)


@dataclass(frozen=True)
class Instance:
    """A scheduling instance: jobs in release order plus a type table."""

    jobs: tuple[Job, ...]
    types: MachineTypeTable

    def __post_init__(self):
        object.__setattr__(self, "jobs", tuple(self.jobs))
        seen = set()
        for job in self.jobs:
            if job.id in seen:
                raise ValidationError(f"duplicate job id {job.id!r}")
            seen.add(job.id)
            if job.size > self.types.max_capacity:
                raise InfeasibleJobError(
                    f"job {job.id!r} (size {job.size}) exceeds the largest "
                    f"capacity {self.types.max_capacity}"
                )

    @property
    def mu(self) -> Fraction:
        return mu(self.jobs)

    def timeline(self) -> "Timeline":
        return Timeline.from_jobs(self.jobs)


@dataclass(frozen=True)
class Timeline:
    """Sorted, deduplicated job starts/ends.

    Between two consecutive breakpoints the set of active jobs is constant,
    so exact integration reduces to a finite sum over segments.
    """

    breakpoints: tuple[Fraction, ...]

    @classmethod
    def from_jobs(cls, jobs: Iterable[Job]) -> "Timeline":
        points = set()
        for job in jobs:
            points.add(job.start)
            points.add(job.end)
        return cls(tuple(sorted(points)))

    @classmethod
    def from_intervals(cls, intervals: Iterable[tuple[Fraction, Fraction]]) -> "Timeline":
        points = set()
        for a, b in intervals:
            points.add(a)
            points.add(b)
        return cls(tuple(sorted(points)))

    def segments(self) -> tuple[tuple[Fraction, Fraction], ...]:
        bp = self.breakpoints
        return tuple((bp[i], bp[i + 1]) for i in range(len(bp) - 1))


def round_rates(raw_rates: Iterable) -> list[Fraction]:
    """Round each positive rate c up to the power of 8 with r/8 < c <= r."""
    out = []
    for raw in raw_rates:
        c = to_rational(raw)
        if c <= 0:
            raise ValidationError(f"rate must be positive, got {c}")
        r = Fraction(1)
        while r < c:
            r *= 8
        while r >= 8 * c:
            r /= 8
        out.append(r)
    return out


def prune_dominated(raw_types: Iterable) -> MachineTypeTable:
    """Keep only Pareto-optimal types, re-indexed by increasing capacity.

    A type is dropped when another offers at least its capacity at most its
    rate.  The survivors are strictly increasing in both coordinates.
    """
    pairs = [(to_rational(g), to_rational(r)) for g, r in raw_types]
    if not pairs:
        raise ValidationError("machine type list must not be empty")
    # scan from the largest capacity down, cheapest first on capacity ties,
    # keeping an entry only when it beats every larger machine on rate
    pairs.sort(key=lambda e: (-e[0], e[1]))
    kept: list[tuple[Fraction, Fraction]] = []
    best_rate = None
    for g, r in pairs:
        if best_rate is None or r < best_rate:
            kept.append((g, r))
            best_rate = r
    kept.reverse()
    return MachineTypeTable(tuple(kept))


def exact_machine_type(size, table: MachineTypeTable) -> int:
    """Lowest-indexed type whose capacity fits the given size."""
    s = to_rational(size)
    if s <= 0:
        raise ValidationError(f"size must be positive, got {s}")
    if s > table.max_capacity:
        raise InfeasibleJobError(
            f"size {s} exceeds the largest capacity {table.max_capacity}"
        )
    lo, hi = 0, len(table) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if table.entries[mid][0] >= s:
            hi = mid
        else:
            lo = mid + 1
    return lo + 1


def active_set(jobs: Iterable[Job], t) -> tuple[Job, ...]:
    t = to_rational(t)
    return tuple(job for job in jobs if job.start <= t < job.end)


def total_size(jobs: Iterable[Job], t=None) -> Fraction:
    """Total size of the jobs, restricted to those active at t when given."""
    if t is None:
        return sum((job.size for job in jobs), Fraction(0))
    return sum((job.size for job in active_set(jobs, t)), Fraction(0))


def span(jobs: Iterable[Job]) -> tuple[tuple[Fraction, Fraction], ...]:
    """Union of the active intervals, as maximal disjoint [a, b) pieces."""
    intervals = sorted((job.start, job.end) for job in jobs)
    merged: list[list[Fraction]] = []
    for a, b in intervals:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)


def span_measure(jobs: Iterable[Job]) -> Fraction:
    return sum((b - a for a, b in span(jobs)), Fraction(0))


def mu(jobs: Sequence[Job]) -> Fraction:
    """Max/min job length ratio; undefined (an error) on an empty set."""
    lengths = [job.length for job in jobs]
    if not lengths:
        raise ValidationError("max/min length ratio undefined for an empty job set")
    return max(lengths) / min(lengths)


def _parse_type_entry(entry) -> tuple[Fraction, Fraction]:
    try:
        return to_rational(entry["capacity"]), to_rational(entry["rate"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad type entry: {entry!r}") from exc


def _parse_job_entry(entry) -> Job:
    try:
        return Job(
            id=str(entry["id"]),
            size=to_rational(entry["size"]),
            start=to_rational(entry["start"]),
            end=to_rational(entry["end"]),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"bad job entry: {entry!r}") from exc


def instance_from_dict(data: dict, *, round_to_power_of_8: bool = True,
                       strict_release: bool = False) -> Instance:
    """Build an Instance from parsed JSON data.

    Rates are rounded up to powers of 8 and dominated types removed unless
    rounding is disabled.  With ``strict_release`` the loader additionally
    requires pairwise distinct start times, the setting under which releases
    are unambiguous one-at-a-time events.
    """
    raw_types = [_parse_type_entry(e) for e in data.get("types", [])]
    if round_to_power_of_8:
        rates = round_rates([r for _, r in raw_types])
        raw_types = [(g, r) for (g, _), r in zip(raw_types, rates)]
    table = prune_dominated(raw_types)
    jobs = tuple(_parse_job_entry(e) for e in data.get("jobs", []))
    if strict_release:
        starts: dict[Fraction, str] = {}
        for job in jobs:
            if job.start in starts:
                raise ValidationError(
                    f"strict release order needs distinct start times: jobs "
                    f"{starts[job.start]!r} and {job.id!r} both start at {job.start}"
                )
            starts[job.start] = job.id
    return Instance(jobs=jobs, types=table)


def instance_to_dict(instance: Instance) -> dict:
    return {
        "types": [
            {"capacity": format_rational(g), "rate": format_rational(r)}
            for g, r in instance.types.entries
        ],
        "jobs": [
            {
                "id": job.id,
                "size": format_rational(job.size),
                "start": format_rational(job.start),
                "end": format_rational(job.end),
            }
            for job in instance.jobs
        ],
    }


def load_instance(source, *, round_to_power_of_8: bool = True,
                  strict_release: bool = False) -> Instance:
    """Load an instance from a path or file object.

    Decimal literals in the file (e.g. 12.5) are parsed exactly as
    rationals, never through binary floating point.
    """
    if hasattr(source, "read"):
        data = json.load(source, parse_float=Fraction)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh, parse_float=Fraction)
    return instance_from_dict(
        data,
        round_to_power_of_8=round_to_power_of_8,
        strict_release=strict_release,
    )


def dump_instance(instance: Instance, target) -> None:
    payload = json.dumps(instance_to_dict(instance), indent=2, sort_keys=True)
    if hasattr(target, "write"):
        target.write(payload + "\n")
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
