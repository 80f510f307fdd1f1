import random
from fractions import Fraction as F

import pytest

from brute_force import brute_opt2
from bshm.harness import GeneratorSpec, generate
from bshm.model import Instance, Job, MachineTypeTable, SearchSpaceExceeded, ValidationError
from bshm.oracle import OracleBudget, opt1_lower_bound, opt2


def tiny_instances(count, max_jobs=4, max_types=3, start_seed=0):
    out = []
    for seed in range(start_seed, start_seed + count):
        spec = GeneratorSpec(
            seed=seed,
            n_jobs=1 + seed % max_jobs,
            n_types=1 + seed % max_types,
            mu=F(1 + seed % 3),
            horizon=F(8),
            size_dist="clustered" if seed % 2 else "uniform",
        )
        out.append(generate(spec))
    return out


class TestOpt2Examples:
    def test_single_job(self, two_types):
        inst = Instance((Job("a", 1, 0, 3),), two_types)
        cost, witness = opt2(inst)
        assert cost == 3
        assert witness.assignments == {"a": (1, 1)}

    def test_disjoint_jobs_cost_adds_up(self, two_types):
        inst = Instance((Job("a", 1, 0, 1), Job("b", 1, 5, 7)), two_types)
        cost, _ = opt2(inst)
        assert cost == 3

    def test_oversized_overlap_forces_two_machines(self):
        table = MachineTypeTable(((2, 1),))
        inst = Instance(
            (Job("a", F(3, 2), 0, 2), Job("b", F(3, 2), 0, 2)), table
        )
        cost, witness = opt2(inst)
        assert cost == 4
        (za, ka), (zb, kb) = witness.assignments["a"], witness.assignments["b"]
        assert (za, zb) == (1, 1) and ka != kb

    def test_empty_instance(self, two_types):
        cost, witness = opt2(Instance((), two_types))
        assert cost == 0 and witness.entries == ()


class TestOpt2Consistency:
    def test_witness_is_feasible_and_priced_correctly(self):
        for inst in tiny_instances(30):
            if not inst.jobs:
                continue
            cost, witness = opt2(inst)
            witness.validate(inst.types)
            assert witness.cost(inst.types) == cost

    def test_symmetry_reduction_matches_unreduced_enumeration(self):
        rng = random.Random(5)
        for inst in tiny_instances(12, max_jobs=3, max_types=2):
            if not inst.jobs:
                continue
            cost, _ = opt2(inst)
            unreduced = brute_opt2(inst, max_machines=len(inst.jobs))
            assert cost == unreduced

    def test_budget_carries_best_found(self, two_types):
        jobs = tuple(Job(f"j{i}", 1, 0, 2) for i in range(5))
        inst = Instance(jobs, two_types)
        with pytest.raises(SearchSpaceExceeded) as info:
            opt2(inst, OracleBudget(max_nodes=8, max_machines_per_type=4))
        # never silently optimal: the partial result rides on the error
        assert info.value.best_cost is None or info.value.best_cost > 0

    def test_budget_validation(self):
        with pytest.raises(ValidationError):
            OracleBudget(max_nodes=0)


class TestOneshotIntegralLowerBound:
    def test_single_job_matches_exact_cost(self, two_types):
        inst = Instance((Job("a", 1, 0, 3),), two_types)
        assert opt1_lower_bound(inst) == 3
        assert opt1_lower_bound(inst) == opt2(inst)[0]

    def test_disjoint_jobs_decompose(self, two_types):
        inst = Instance((Job("a", 1, 0, 1), Job("b", 2, 5, 7)), two_types)
        # one cheap machine for a, one big machine for b
        assert opt1_lower_bound(inst) == 1 * 1 + 2 * 8

    def test_never_exceeds_the_exact_optimum(self):
        for inst in tiny_instances(40, start_seed=100):
            cost, _ = opt2(inst)
            assert opt1_lower_bound(inst) <= cost
