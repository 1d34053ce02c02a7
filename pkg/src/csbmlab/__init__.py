"""Recoverability experiments for node classification on contextual block models."""

from .generators import (CsbmParams, DegreeWeightSpec, ParameterError, apply_triadic_closure,
                         lambda_to_probs, sample_csbm, sample_dcsbm, sample_enn_sbm,
                         sample_features, sample_hsbm, sample_model, sample_sbm)
from .graph import (Graph, GraphStats, LabeledGraph, block_edge_counts, degree_sequence,
                    graph_stats, triangle_count)
from .io import DatasetFormatError, read_dataset, write_dataset
from .restructure import (DegenerateClassError, RewireConfig, null_triangle_expectation,
                          nullify_dataset, resample_features_per_class, rewire_preserving_blocks)
from .rng import RngStream
from .theory import (TheoryResult, TruncationError, conditional_accuracy, erf,
                     expected_accuracy_one_layer, normal_cdf, optimal_theta, two_layer_accuracy)

__version__ = "0.1.0"

__all__ = [
    "CsbmParams", "DegreeWeightSpec", "ParameterError", "apply_triadic_closure",
    "lambda_to_probs", "sample_csbm", "sample_dcsbm", "sample_enn_sbm", "sample_features",
    "sample_hsbm", "sample_model", "sample_sbm", "Graph", "GraphStats", "LabeledGraph",
    "block_edge_counts", "degree_sequence", "graph_stats", "triangle_count",
    "DatasetFormatError", "read_dataset", "write_dataset", "DegenerateClassError",
    "RewireConfig", "null_triangle_expectation", "nullify_dataset",
    "resample_features_per_class", "rewire_preserving_blocks", "RngStream", "TheoryResult",
    "TruncationError", "conditional_accuracy", "erf", "expected_accuracy_one_layer",
    "normal_cdf", "optimal_theta", "two_layer_accuracy",
]
