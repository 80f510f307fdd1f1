"""Busy-time scheduling on heterogeneous machines.

Exact-rational implementations of the offline and online schedulers, the
one-shot machine-configuration machinery they rest on, brute-force oracles
for ground truth at desk scale, and property suites that check every
claimed bound as a sharp inequality.
"""

from .model import (
    BshmError,
    ContractViolation,
    InfeasibleJobError,
    Instance,
    InvariantViolation,
    Job,
    MachineTypeTable,
    SearchSpaceExceeded,
    Timeline,
    ValidationError,
    active_set,
    dump_instance,
    exact_machine_type,
    load_instance,
    mu,
    prune_dominated,
    round_rates,
    span,
    total_size,
)
from .graph import CostCapacityForest, build_forest, to_dot
from .oneshot import (
    ChargeMap,
    MachineConfiguration,
    alternative_config,
    canonicalize,
    charge,
    cn_config,
    optimal_oneshot,
    r_star,
    z_diamond,
)
from .offline import Schedule, TypeAssignment, alg_offline, assign_types, pack_homogeneous
from .online import artificial_jobs, place, simulate
from .oracle import OracleBudget, opt1_lower_bound, opt2
from .harness import GeneratorSpec, generate, random_table, ratio_report, verify

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
