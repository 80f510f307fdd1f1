from fractions import Fraction as F

import pytest
from hypothesis import HealthCheck, settings

from bshm import MachineTypeTable, build_forest

settings.register_profile(
    "bshm",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("bshm")


# The 13-type table used for the worked-example checks: rates are the
# thirteen powers of 8 from 8^-6 to 8^6, capacities chosen so the per-unit
# costs rise and fall and the forest has three trees.
TABLE13_CAPACITIES = (
    F(1, 300000), F(1, 100000), F(1, 4096), F(1, 1024), F(1, 65),
    F(1, 40), F(1, 3), F(1), F(12), F(50), F(1000), F(3000), F(100000),
)


@pytest.fixture(scope="session")
def table13() -> MachineTypeTable:
    rates = tuple(F(8) ** e for e in range(-6, 7))
    return MachineTypeTable(tuple(zip(TABLE13_CAPACITIES, rates)))


@pytest.fixture(scope="session")
def forest13(table13):
    return build_forest(table13)


@pytest.fixture
def two_types() -> MachineTypeTable:
    # one tree: per-unit costs 1 then 1/2, so type 2 is type 1's parent
    return MachineTypeTable(((1, 1), (16, 8)))


@pytest.fixture
def two_roots() -> MachineTypeTable:
    # per-unit costs 1 then 4: no parent links, two roots
    return MachineTypeTable(((1, 1), (2, 8)))
