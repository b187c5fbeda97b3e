"""Cost-optimal constraint partitioning for scenario programs."""
from .bounds import (
    RiskSpec,
    SampleSizeResult,
    allocate_beta,
    binomial_tail_log,
    explicit_sample_size,
    implicit_sample_size,
    sample_size,
)
from .model import ProblemSpec, gen_block_example, gen_formation, gen_production, gen_prop3, load_problem, save_problem
from .partition import AllocatedPlan, CostMetric, Partition, efficient_partition, optimal_epsilon, sigma, total_cost
from .rank import RankOracle, RowStructure, sampled_linear_rank, support_proxy_rank
from .setfn import GroundSet, IndexSet, SetFunctionOracle, check_monotone_submodular, estimate_submodularity_ratio
from .scenario import ScenarioProgram, Solution, build_scenario_program, solve_lp, solve_mixed
from .simplex import LPResult, solve_inequality_lp
from .submod import gsa, min_split, queyranne_minimize
from .validate import ViolationEstimate, empirical_violation, wilson_upper

__version__ = "0.1.0"
