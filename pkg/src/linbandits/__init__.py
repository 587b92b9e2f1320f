"""Combinatorial bandits with linear rewards: index policies, exact oracles, simulation."""

__version__ = "0.1.0"

from .bounds import BoundParams, theorem1_bound, theorem2_bound, theorem3_bound
from .core import (TIE_TOL, ActionSet, ActionVector, BipartiteMatching, EstimatorState,
                   ExplicitArms, GroundTruth, RegretTrace, SourceDestPaths, SpanningTrees,
                   reward_of, update_estimates)
from .environments import (Bernoulli, Environment, EnvironmentSpec, Fixed, Uniform,
                           paper_instance, random_path_instance)
from .errors import (BanditError, ConfigurationError, ContractViolation, InfeasibleError,
                     InitializationIncomplete, SimulationError, SizeLimitError,
                     UnsupportedVariantError)
from .oracles import (OracleSolution, certify_ground_truth, enumerate_brute_force, solve_max,
                      solve_min, solve_top_k)
from .policies import (LLC, LLR, LLRK, NaiveState, NaiveUCB1, PolicyConfig, initialization_schedule,
                       llc_index, llr_index, make_policy, naive_update)
from .simulation import (ExperimentPlan, bound_params, derive_seed, geometric_checkpoints,
                         mean_trace, run_experiment, run_single, summarize)
