"""FrogWild: approximate top-k PageRank with partially synchronized random
walks, simulated on a single-process vertex-cut graph engine."""

from .cluster import (Engine, Partition, SyncPolicy, TrafficLedger, baseline_ledger,
                      check_partition, partition_graph, sync_messages_expectation)
from .config import RunConfig
from .estimators import FrogWild, PowerIterationPageRank
from .exact import (ConvergenceError, chi2_contrast, dense_oracle, evolve_distribution,
                    exact_pagerank, power_iteration, top_k)
from .graph import (DirectedGraph, EdgeListError, load_edge_list, sample_step,
                    step_distribution)
from .metrics import (AccuracyReport, accuracy_report, epsilon_bound, estimator,
                      exact_identification, intersection_bound, intersection_probability_mc,
                      mass_captured, sample_size_hint)
from .program import FrogRun, run_frogwild, scatter_binomial, scatter_ceil
from .suite import SUITE, suite_graph
from .walks import (ErasureModel, apply_erasures, walk_fixed_step, walk_truncated_geometric,
                    walk_with_erasures)

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport", "ConvergenceError", "DirectedGraph", "EdgeListError", "Engine",
    "ErasureModel", "FrogRun", "FrogWild", "Partition", "PowerIterationPageRank", "RunConfig",
    "SUITE", "SyncPolicy", "TrafficLedger", "accuracy_report", "apply_erasures",
    "baseline_ledger", "check_partition", "chi2_contrast", "dense_oracle", "epsilon_bound",
    "estimator", "evolve_distribution", "exact_identification", "exact_pagerank",
    "intersection_bound", "intersection_probability_mc", "load_edge_list", "mass_captured",
    "partition_graph", "power_iteration", "run_frogwild", "sample_size_hint", "sample_step",
    "scatter_binomial", "scatter_ceil", "step_distribution", "suite_graph",
    "sync_messages_expectation", "top_k", "walk_fixed_step", "walk_truncated_geometric",
    "walk_with_erasures",
]
