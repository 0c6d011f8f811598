"""
Loss, Bernoulli sampling, histogram trees and the additive forest model.
"""

from .forest import Forest, forest_from_text, forest_to_text, init_forest, load_forest, save_forest, score_vector
from .loss import (
    GradientFlavor,
    GradientVector,
    ScoreVector,
    gradient_vector,
    logistic_gradient,
    logistic_loss,
    mean_loss,
    total_loss,
)
from .metrics import Metrics, evaluate, evaluate_scores
from .sampler import (
    DiversityStats,
    SampleDraw,
    SamplingPlan,
    analytic_delta,
    draw,
    estimate_diversity,
    weighted_target,
)
from .tree import (
    LeafPartition,
    RegressionTree,
    TreeParams,
    fit,
    leaf_diameter,
    leaf_partition,
    predict,
    project,
    zeta_estimate,
)

__all__ = [
    "DiversityStats",
    "Forest",
    "GradientFlavor",
    "GradientVector",
    "LeafPartition",
    "Metrics",
    "RegressionTree",
    "SampleDraw",
    "SamplingPlan",
    "ScoreVector",
    "TreeParams",
    "analytic_delta",
    "draw",
    "estimate_diversity",
    "evaluate",
    "evaluate_scores",
    "fit",
    "forest_from_text",
    "forest_to_text",
    "gradient_vector",
    "init_forest",
    "leaf_diameter",
    "leaf_partition",
    "load_forest",
    "logistic_gradient",
    "logistic_loss",
    "mean_loss",
    "predict",
    "project",
    "save_forest",
    "score_vector",
    "total_loss",
    "weighted_target",
    "zeta_estimate",
]
