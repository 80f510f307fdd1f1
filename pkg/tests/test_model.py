import io
import json
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from bshm.model import (
    InfeasibleJobError,
    Instance,
    Job,
    MachineTypeTable,
    Timeline,
    ValidationError,
    active_set,
    dump_instance,
    exact_machine_type,
    instance_from_dict,
    is_power_of_8,
    load_instance,
    mu,
    prune_dominated,
    round_rates,
    span,
    to_rational,
    total_size,
)

rationals = st.fractions(min_value=F(1, 1000), max_value=F(1000))


class TestRoundRates:
    @pytest.mark.parametrize("raw, expected", [
        (8, 8), (3, 8), (9, 64), (F(1, 10), F(1, 8)), (1, 1), (F(65), 512),
    ])
    def test_examples(self, raw, expected):
        assert round_rates([raw]) == [F(expected)]

    def test_rejects_non_positive(self):
        with pytest.raises(ValidationError):
            round_rates([0])
        with pytest.raises(ValidationError):
            round_rates([F(-1, 2)])

    @given(rationals)
    def test_bracket(self, c):
        (r,) = round_rates([c])
        assert r / 8 < c <= r
        assert is_power_of_8(r)

    @given(rationals)
    def test_idempotent(self, c):
        once = round_rates([c])
        assert round_rates(once) == once


class TestPruneDominated:
    def test_equal_capacity_keeps_cheaper(self):
        table = prune_dominated([(1, 8), (1, 4)])
        assert table.entries == ((F(1), F(4)),)

    def test_smaller_pricier_dropped(self):
        table = prune_dominated([(1, 2), (5, 1)])
        assert table.entries == ((F(5), F(1)),)

    def test_thirteen_type_table_unchanged(self, table13):
        assert prune_dominated(table13.entries).entries == table13.entries

    @given(st.lists(st.tuples(rationals, rationals), min_size=1, max_size=12))
    def test_output_is_pareto_frontier(self, raw):
        table = prune_dominated(raw)
        entries = table.entries
        for i, (gi, ri) in enumerate(entries):
            for j, (gj, rj) in enumerate(entries):
                if i != j:
                    assert not (gi <= gj and ri >= rj)
        # strictly increasing in both coordinates, and nothing from the
        # input dominates a survivor
        for (g0, r0), (g1, r1) in zip(entries, entries[1:]):
            assert g0 < g1 and r0 < r1
        for g, r in raw:
            g, r = to_rational(g), to_rational(r)
            assert any(ge >= g and re <= r for ge, re in entries)


class TestExactMachineType:
    def test_boundary_hits_lowest_type(self, two_types):
        assert exact_machine_type(1, two_types) == 1

    def test_thirteen_type_examples(self, table13):
        assert exact_machine_type(12, table13) == 9
        assert exact_machine_type(F(25, 2), table13) == 10

    def test_oversize_rejected(self, two_types):
        with pytest.raises(InfeasibleJobError):
            exact_machine_type(17, two_types)

    @given(rationals, rationals)
    def test_monotone_in_size(self, table13, a, b):
        lo, hi = min(a, b), max(a, b)
        if hi > table13.max_capacity:
            return
        assert exact_machine_type(lo, table13) <= exact_machine_type(hi, table13)


class TestActiveSetsAndSpan:
    def test_half_open_boundary(self):
        jobs = [Job("a", 1, 0, 2), Job("b", 1, 1, 3)]
        assert active_set(jobs, 2) == (jobs[1],)
        assert total_size(jobs, 2) == 1
        assert total_size(jobs, 1) == 2

    def test_span_and_mu_contiguous(self):
        jobs = [Job("a", 1, 0, 2), Job("b", 1, 1, 3)]
        assert span(jobs) == ((F(0), F(3)),)
        assert mu(jobs) == 1

    def test_span_and_mu_with_gap(self):
        jobs = [Job("a", 1, 0, 1), Job("b", 1, 5, 7)]
        assert span(jobs) == ((F(0), F(1)), (F(5), F(7)))
        assert mu(jobs) == 2

    def test_mu_empty_undefined(self):
        with pytest.raises(ValidationError):
            mu([])

    @given(st.lists(
        st.tuples(rationals, rationals, st.fractions(min_value=F(1, 4), max_value=F(4))),
        min_size=1, max_size=8,
    ))
    def test_piecewise_constant_between_breakpoints(self, raw):
        jobs = [
            Job(f"j{i}", size, start, start + length)
            for i, (size, start, length) in enumerate(raw)
        ]
        points = Timeline.from_jobs(jobs).breakpoints
        for a, b in zip(points, points[1:]):
            mid = (a + b) / 2
            assert set(active_set(jobs, mid)) == set(active_set(jobs, a))


class TestJobAndTableValidation:
    def test_zero_length_job_rejected(self):
        with pytest.raises(ValidationError):
            Job("a", 1, 3, 3)

    def test_non_positive_size_rejected(self):
        with pytest.raises(ValidationError):
            Job("a", 0, 0, 1)

    def test_floats_rejected(self):
        with pytest.raises(ValidationError):
            Job("a", 0.5, 0, 1)

    def test_table_requires_strict_increase(self):
        with pytest.raises(ValidationError):
            MachineTypeTable(((1, 1), (1, 8)))
        with pytest.raises(ValidationError):
            MachineTypeTable(((1, 8), (2, 8)))

    def test_instance_rejects_duplicate_ids(self, two_types):
        with pytest.raises(ValidationError):
            Instance((Job("a", 1, 0, 1), Job("a", 1, 2, 3)), two_types)

    def test_instance_rejects_oversize_job(self, two_types):
        with pytest.raises(InfeasibleJobError):
            Instance((Job("a", 17, 0, 1),), two_types)


class TestInstanceIO:
    def test_round_trip(self, tmp_path):
        data = {
            "types": [
                {"capacity": 1, "rate": "1/8"},
                {"capacity": "5/2", "rate": 3},
            ],
            "jobs": [
                {"id": "a", "size": "3/2", "start": 0, "end": "7/2"},
            ],
        }
        path = tmp_path / "inst.json"
        path.write_text(json.dumps(data))
        inst = load_instance(path)
        # 3 rounds up to 8, 1/8 stays (already a power of 8)
        assert inst.types.entries == ((F(1), F(1, 8)), (F(5, 2), F(8)))
        assert inst.jobs[0].size == F(3, 2)

        out = tmp_path / "out.json"
        dump_instance(inst, out)
        again = load_instance(out)
        assert again == inst

    def test_decimal_literals_parsed_exactly(self):
        raw = '{"types": [{"capacity": 1, "rate": 1}], "jobs": ' \
              '[{"id": "a", "size": 0.1, "start": 0, "end": 12.5}]}'
        inst = load_instance(io.StringIO(raw))
        assert inst.jobs[0].size == F(1, 10)
        assert inst.jobs[0].end == F(25, 2)

    def test_rounding_can_be_disabled(self):
        data = {"types": [{"capacity": 1, "rate": 3}], "jobs": []}
        inst = instance_from_dict(data, round_to_power_of_8=False)
        assert inst.types.rate(1) == 3
        inst = instance_from_dict(data)
        assert inst.types.rate(1) == 8

    def test_rounding_then_pruning_restores_strict_increase(self):
        # both rates round to 8; the smaller machine becomes redundant
        data = {
            "types": [
                {"capacity": 1, "rate": 3},
                {"capacity": 2, "rate": 5},
            ],
            "jobs": [],
        }
        inst = instance_from_dict(data)
        assert inst.types.entries == ((F(2), F(8)),)

    def test_strict_release_rejects_tied_starts(self):
        data = {
            "types": [{"capacity": 2, "rate": 1}],
            "jobs": [
                {"id": "a", "size": 1, "start": 0, "end": 1},
                {"id": "b", "size": 1, "start": 0, "end": 2},
            ],
        }
        with pytest.raises(ValidationError):
            instance_from_dict(data, strict_release=True)
        assert len(instance_from_dict(data).jobs) == 2
