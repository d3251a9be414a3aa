from .hashing import KWiseFamily, family_for, kwise_eval, kwise_eval_many, verify_independence
from .prg import NotFound, PrgSearchSpec, PrgTable, nano_prg_search
from .problems import ProblemDescriptor, Verdict, get_problem, validate
from .costs import LubyEstimatorCost, LubyJoinCost, NodeSumCost, SparsifyCost
from .derandomize import SeedChoice, amplification_failure_rates, amplify, derand_luby_step, derand_sparsify, find_universal_seed, fix_seed_cond_exp
from .exponentiation import collect_balls, reduce_id_space
from .independent_set import amplified_large_is, deterministic_large_is, randomized_large_is
from .mis import UndecidedCost, extendable_mis, maximal_matching, mis_algorithm
from .lll import LllInstance, derand_lll_single_shot, moser_tardos, sinkless_orientation
from .replication import ReplicationSpec, build_replication, check_replication_implication
from .stconn import StConnInstance, build_stconn_simulation, classify_case, stconn_sweep
from .stability import estimate_sensitivity, test_component_stability
