from fractions import Fraction as F

import pytest

from bshm.graph import CostCapacityForest
from bshm.harness import (
    GeneratorSpec,
    check_forest,
    generate,
    generate_with_intent,
    ratio_report,
    report_summary,
    report_to_csv,
    verify,
)
from bshm.model import Instance, ValidationError, exact_machine_type


class TestGenerator:
    def test_same_seed_same_instance(self):
        spec = GeneratorSpec(seed=1, n_jobs=7, n_types=4)
        assert generate(spec) == generate(spec)

    def test_different_seeds_differ(self):
        a = generate(GeneratorSpec(seed=1, n_jobs=7, n_types=4))
        b = generate(GeneratorSpec(seed=2, n_jobs=7, n_types=4))
        assert a != b

    def test_ratio_target_one_means_equal_lengths(self):
        inst = generate(GeneratorSpec(seed=3, n_jobs=6, n_types=2, mu=F(1)))
        lengths = {j.length for j in inst.jobs}
        assert lengths == {F(1)}

    def test_ratio_target_is_hit_exactly(self):
        inst = generate(GeneratorSpec(seed=4, n_jobs=6, n_types=2, mu=F(3)))
        assert inst.mu == 3
        assert min(j.length for j in inst.jobs) == 1

    def test_clustered_sizes_land_on_their_intended_type(self):
        spec = GeneratorSpec(
            seed=5, n_jobs=40, n_types=5, size_dist="clustered"
        )
        inst, intents = generate_with_intent(spec)
        for job, intent in zip(inst.jobs, intents):
            assert exact_machine_type(job.size, inst.types) == intent

    def test_rates_are_rounded_by_construction(self):
        inst = generate(GeneratorSpec(seed=6, n_jobs=3, n_types=6))
        assert inst.types.rates_are_powers_of_8()

    def test_inconsistent_specs_rejected(self):
        with pytest.raises(ValidationError):
            GeneratorSpec(mu=F(1, 2))
        with pytest.raises(ValidationError):
            GeneratorSpec(n_types=0)
        with pytest.raises(ValidationError):
            GeneratorSpec(size_dist="gaussian")
        with pytest.raises(ValidationError):
            GeneratorSpec(mu=F(20), horizon=F(10))


class TestVerify:
    def test_empty_job_set_passes_vacuously(self, table13):
        inst = Instance((), table13)
        report = verify([("empty13", inst)], level="fast")
        assert report.ok
        # the forest checks ran; the scheduling ones had nothing to do
        assert any(r.check.startswith("forest/") for r in report.results)
        assert not any(r.check.startswith("oneshot/") for r in report.results)

    def test_corrupted_forest_fails_structural_checks(self, table13, forest13):
        parents = list(forest13.parents)
        parents[9] = 12  # off by one: the tenth type points past its parent
        broken = CostCapacityForest(tuple(parents))
        results = check_forest(table13, broken, "broken")
        failed = {r.check for r in results if not r.passed}
        assert failed & {
            "forest/subtree-consecutive",
            "forest/cover-partitions-prefix",
            "forest/cover-members-adjacent",
        }

    def test_full_level_adds_solver_backed_checks(self):
        insts = [
            (f"s{seed}", generate(GeneratorSpec(
                seed=seed, n_jobs=1 + seed % 5, n_types=1 + seed % 3,
            )))
            for seed in range(6)
        ]
        fast = verify(insts, level="fast")
        full = verify(insts, level="full")
        assert fast.ok and full.ok
        fast_checks = {r.check for r in fast.results}
        full_checks = {r.check for r in full.results}
        assert "oneshot/opt-bracket" in full_checks - fast_checks
        assert "oracle/opt2-above-oneshot-integral" in full_checks - fast_checks

    def test_unknown_level_rejected(self):
        with pytest.raises(ValidationError):
            verify([], level="medium")

    def test_regression_gate_thousand_small_instances(self):
        insts = []
        for seed in range(1000):
            spec = GeneratorSpec(
                seed=seed,
                n_jobs=1 + seed % 6,
                n_types=1 + seed % 4,
                mu=F(1 + seed % 4),
                horizon=F(12),
                size_dist="clustered" if seed % 3 == 0 else "uniform",
                time_dist="pileup" if seed % 7 == 0 else "spread",
            )
            insts.append((f"r{seed}", generate(spec)))
        report = verify(insts, level="fast", seed=99)
        assert report.ok, report.failures()[:5]


class TestReports:
    def test_csv_has_fixed_columns_and_is_deterministic(self):
        insts = [
            (f"b{seed}", generate(GeneratorSpec(
                seed=seed, n_jobs=1 + seed % 4, n_types=1 + seed % 3,
            )))
            for seed in range(5)
        ]
        rows = ratio_report(insts, level="full")
        text = report_to_csv(rows)
        again = report_to_csv(ratio_report(insts, level="full"))
        assert text == again
        header = text.splitlines()[0]
        assert header.split(",")[:4] == ["instance", "jobs", "types", "mu"]
        assert len(text.splitlines()) == 6

    def test_summary_reports_ratio_extremes(self):
        insts = [
            (f"b{seed}", generate(GeneratorSpec(
                seed=seed + 40, n_jobs=2 + seed % 3, n_types=1 + seed % 2,
            )))
            for seed in range(4)
        ]
        rows = ratio_report(insts, level="full")
        summary = report_summary(rows)
        assert summary["instances"] == 4
        assert summary["offline_over_opt2"] is not None
        # both schedulers are at least the optimum, so ratios are >= 1
        assert all(
            r.offline_over_opt2 is None or r.offline_over_opt2 >= 1
            for r in rows
        )

    def test_missing_oracle_values_are_empty_not_faked(self):
        insts = [("big", generate(GeneratorSpec(seed=9, n_jobs=9, n_types=3)))]
        rows = ratio_report(insts, level="full", opt2_job_limit=4)
        assert rows[0].opt2 is None
        assert rows[0].offline_over_opt2 is None
        record = rows[0].as_record()
        assert record["opt2"] == ""
