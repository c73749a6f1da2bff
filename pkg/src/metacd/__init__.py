"""Human-centric community detection in hybrid human/AI social networks."""
from ._accel import NUMBA_ENABLED, backend_name
from .cusa import AnnealConfig, CoolingPolicy, accept_rule, cusa_run, retained_ai_set
from .graph import (GraphError, HasnGraph, NodeKind, Partition, aggregate, build_graph,
                    community_stats, remove_node)
from .louvain import delta_hq, delta_q, louvain
from .metrics import (MetricReport, adm, align_partitions, evaluate, hmr, human_modularity_hq,
                      modularity_q, reward_penalty_w)
from .objective import ObjectiveKind
from .scoring import (EdgeWeightPolicy, HumanoidScore, ScoringMode, betweenness_centrality,
                      clustering_coefficient, eigenvector_centrality, humanoid_scores,
                      lowest_humanoid_ai, reweight_edges)
from .synthesis import (EvolutionConfig, GenStrategyConfig, GroupAssignment, Strategy,
                        evolve_jaccard, gen_er_graph, insert_ai, insert_ai_dual,
                        insert_ai_intro_extro, insert_ai_inverse_degree, insert_ai_random)

__version__ = "0.1.0"
