"""
Empirical estimates of the theory constants from a dataset, a sampling plan
and a trained forest.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from core.errors import TheoryError
from boosting.forest import Forest, score_vector
from boosting.sampler import DiversityStats, SamplingPlan, estimate_diversity, support_draws, weighted_target
from boosting.tree import leaf_diameter, leaf_partition, project, zeta_estimate
from dataset.models import SparseDataset
from .models import TheoryConstants


logger = logging.getLogger(__name__)

LOGISTIC_PHI = 2.0
DEFAULT_C = 1.0
DEFAULT_LAM = 1.0


@dataclass(frozen=True)
class ConstantEstimate:
    constants: TheoryConstants
    diversity: DiversityStats
    projected_rho: float
    trees_used: int


def _resolve(value: Optional[float], default: float, name: str) -> float:
    if value is None:
        logger.warning("%s not supplied; using %s", name, default)
        return default
    return value


def estimate_constants(
    ds: SparseDataset,
    plan: SamplingPlan,
    forest: Forest,
    trials: int = 100,
    seed: int = 0,
    c: Optional[float] = None,
    lam: Optional[float] = None,
    tau: float = 0.0,
    tol: float = 1e-12,
) -> ConstantEstimate:
    """
    Estimate omega, delta, rho, M, zeta, delta_leaf and m_max.

    Draw t is paired with tree ``t mod n_trees`` of the forest. M and zeta use
    the unweighted leaf average of the sampled target over the drawn samples,
    taken at the forest's scores. rho is floored at 1 / (trials - 1) when no
    pair of draws intersected. c and lam are not estimated.
    """
    if not forest.trees:
        raise TheoryError("constant estimation needs a forest with at least one tree")

    diversity = estimate_diversity(plan, ds, trials=trials, seed=seed)
    F = score_vector(forest, ds)
    trees = [tree for tree, _ in forest.trees]

    m_bound = 0.0
    zeta = 0
    m_max = float(ds.frequencies.max())
    previous = None
    shared = 0
    used = set()

    for t, sample_draw in enumerate(support_draws(plan, ds, trials, seed)):
        if sample_draw.support_size:
            m_max = max(m_max, float(sample_draw.weights.max()))
        tree_index = t % len(trees)
        used.add(tree_index)

        partition = leaf_partition(trees[tree_index], ds, members=sample_draw.included)
        g = weighted_target(sample_draw, ds, F).values
        unit = sample_draw.included.astype(np.float64)
        projected = project(partition, g, unit)

        m_bound = max(m_bound, float(np.linalg.norm(projected)))
        zeta = max(zeta, zeta_estimate(partition, g, unit, tol))
        if previous is not None and abs(float(np.dot(previous, projected))) > tol:
            shared += 1
        previous = projected

    if m_bound <= 0:
        raise TheoryError("every projected target vanished; M cannot be estimated")

    delta_leaf = max(leaf_diameter(leaf_partition(trees[i], ds), ds) for i in sorted(used))
    constants = TheoryConstants(
        c=_resolve(c, DEFAULT_C, "strong-convexity modulus c"),
        lam=_resolve(lam, DEFAULT_LAM, "Lipschitz constant lambda"),
        M=m_bound,
        omega=float(max(diversity.omega, 1)),
        delta_cap=diversity.delta,
        rho=max(diversity.rho, 1.0 / (trials - 1)),
        zeta=float(zeta),
        tau=float(tau),
        delta_leaf=delta_leaf,
        m_max=m_max,
        phi=LOGISTIC_PHI,
    )
    if not constants.gradient_bound_holds():
        raise TheoryError("estimated M violates M^2 <= omega * m_max^2 * phi^2")

    estimate = ConstantEstimate(
        constants=constants,
        diversity=diversity,
        projected_rho=shared / (trials - 1),
        trees_used=len(used),
    )
    logger.info(
        "Estimated constants: M=%.4g omega=%d rho=%.4f zeta=%d delta_leaf=%.4g",
        constants.M, int(constants.omega), constants.rho, zeta, delta_leaf,
    )
    return estimate
