"""coverplan: sequential facility coverage planning.

Plan where to open facilities, a budgeted batch per year, to maximise
population served within a travel-time threshold while holding every
yearly prefix of the plan to per-district proportionality targets.
Includes learning-augmented refinement of expert advice, an exhaustive
reference oracle, scenario file I/O, a CLI and an HTTP service.
"""

from .algorithms import (GreedyResult, PartitionMatroid, PlanResult, RefineResult,
                         RetroReport, greedy_cardinality, la_many_types,
                         la_single_step, local_greedy, multistep_planning,
                         multistep_planning_with_advice, retrospective_compare)
from .coverage import (CoverageModel, CoverageObjective, FrictionGrid,
                       PopulationSeries, build_coverage_model, compute_covered,
                       marginal_gain)
from .kernels import backend
from .model import (CallableObjective, Element, Instance, InvalidSelectionError,
                    PlanningError, Policy, Selection, SetObjective, ShortfallError,
                    TableObjective, snap_proportion, type_counts, validate_instance)
from .proportion import (QuotaTable, TypeSequence, alpha_min, availability_shortfall,
                         beta, is_sigma_type_feasible, min_ratio_sequence,
                         quota_table, satisfaction_ratio)
from .scenario import (BuiltScenario, ScenarioFile, ScenarioFormatError,
                       advice_ids, build_instance, derive_policy_proportions,
                       dumps_scenario, generate_synthetic_region, load_scenario,
                       loads_scenario, save_scenario)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
