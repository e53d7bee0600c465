"""Maximum-weight stable sets by theta-guided limited discrepancy search."""

from .cp import CpModel, CpResult, CpStatus, branch_and_bound, cp_only_solve, propagate, solve_subproblem
from .graph import WeightedGraph, coding_graph, gen_random_graph, parse_dimacs, read_dimacs, write_dimacs
from .hybrid import HybridConfig, RunReport, hybrid_solve, run_bench
from .lds import Subproblem, subproblems_at, total_subproblems
from .rounding import DomainPartition, RoundedSolution, greedy_partition, greedy_round
from .sdp import SdpProblem, SdpSolution, SdpStatus, solve_sdp
from .theta import ThetaForm, ThetaModel, ThetaResult, add_discrepancy_cut, build_theta_x, build_theta_y, extract_scores, solve_theta

__version__ = "0.1.0"
