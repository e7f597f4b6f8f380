"""Evolutionary optimisers (WSGA, NSGA-II, MOEA/D) for fog service placement."""
from .algorithms import (ALGORITHMS, AlgorithmConfig, RunResult, crowding_distance,
                         fast_nondominated_sort, generate_weight_vectors, run, run_moead,
                         run_nsga2, run_wsga)
from .experiment import PRESETS, ExperimentConfig, generate_instance
from .model import (ApplicationModel, Device, Infrastructure, Instance, Link, Service,
                    betweenness_centrality, compute_distances, is_feasible)
from .objectives import ObjectiveVector, WeightConfig, evaluate, weighted_sum

__version__ = "0.1.0"
