"""Discord maximization in the Friedkin-Johnsen model.

Graph ingestion and generators, disagreement/polarization indices,
balanced max-cut over PSD matrices with mixed-sign entries, attack
algorithms with full or topology-only information, and brute-force
oracles for the theoretical guarantees.
"""

from .graphs import (Graph, CommunityLabels, LaplacianView, GraphFormatError,
                     bfs_subsample, generate_sbm, laplacian, load_communities,
                     load_edge_list, save_communities, save_edge_list)
from .dynamics import (DISAGREEMENT, POLARIZATION, DiscordMatrix, DiscordOperator,
                       Opinions, OpinionRangeError, UndefinedScoreError,
                       discord_matrix, discord_operator, equilibrium, fj_step,
                       flip_opinions, index_value, iterate_to_equilibrium,
                       load_opinions, normalized_index, relative_increase,
                       rescale_opinions, sample_opinions, save_opinions)
from .maxcut import (CutSolution, LocalMoveBoundError, SdpConvergenceError,
                     SdpPreconditionError, SdpSolution, SolverConfig, TrialStats,
                     balance_constraint_target, beta_for_alpha, cut_value,
                     greedy_rebalance, hyperplane_round, solve_alpha_balanced_maxcut,
                     solve_sdp, trials_for_failure_prob)
from .attacks import (AttackResult, AttackSpec, adaptive_greedy_select,
                      influence_max_nodes, nonadaptive_greedy_select, radicalize,
                      random_nodes, run_attack, sdp_limited_info_select,
                      select_full_info, select_limited_info, top_degree_nodes)
from .oracles import (ConditionReport, EnumerationGuardError, brute_force_opt,
                      check_theorem_conditions, random_psd_zero_rowsum, ratio_bound,
                      rebalance_value_bound, run_check_suite, limited_to_full_ratio,
                      verify_extreme_optimum, verify_local_move_bound)
from .experiments import (ExperimentConfig, ExperimentRecord, read_records_csv,
                          regression_analysis, run_experiment, stability_run,
                          write_records_csv)

__version__ = "0.1.0"
