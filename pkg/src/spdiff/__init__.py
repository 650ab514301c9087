"""Similarity-preferential diffusion recommenders on user-item bipartite networks."""

from .data import (IdMap, RatingRecord, SplitSpec, parse_ratings, read_ratings, split_sparsity,
                   split_three, split_two, synth_dataset, threshold_filter)
from .diffusion import (DiffusionParams, RecommendationList, RecommendationSet, params_for,
                        recommend, recommend_all, score_items, score_matrix, similarity)
from .errors import (ColdUserError, DimensionError, DuplicateLinkError,
                     InsufficientPopulationError, ParseError, RatingRangeError, SpdiffError,
                     SpecError)
from .graph import BipartiteGraph, LinkSet, build_graph, degree_of_item, degree_of_user
from .harness import (GridSpec, SparsityCurve, SweepResult, run_grid, sparsity_study,
                      sweep_theta, tune_and_test, tune_compare)
from .metrics import (MetricsReport, evaluate, hamming_mean, novelty_mean, precision_at,
                      ranking_score)

__version__ = "0.1.0"

__all__ = [
    'IdMap', 'RatingRecord', 'SplitSpec', 'parse_ratings',
    'read_ratings', 'split_sparsity', 'split_three', 'split_two',
    'synth_dataset', 'threshold_filter', 'DiffusionParams', 'RecommendationList',
    'RecommendationSet', 'params_for', 'recommend', 'recommend_all',
    'score_items', 'score_matrix', 'similarity', 'ColdUserError',
    'DimensionError', 'DuplicateLinkError', 'InsufficientPopulationError', 'ParseError',
    'RatingRangeError', 'SpdiffError', 'SpecError', 'GridSpec',
    'SparsityCurve', 'SweepResult', 'run_grid', 'sparsity_study',
    'sweep_theta', 'tune_and_test', 'tune_compare', 'MetricsReport',
    'evaluate', 'hamming_mean', 'novelty_mean', 'precision_at',
    'ranking_score', 'BipartiteGraph', 'LinkSet', 'build_graph',
    'degree_of_item', 'degree_of_user',
]
