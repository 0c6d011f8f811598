"""
Theory constants and report models.
"""

import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict

from core.errors import TheoryError


@dataclass(frozen=True)
class TheoryConstants:
    """
    Constants of the convergence analysis.

    c: strong-convexity modulus of the objective
    lam: Lipschitz constant of the loss
    M: bound on the norm of the leaf-projected sampled target
    omega: largest number of distinct samples in one draw
    delta_cap: largest per-sample inclusion probability
    rho: probability that two draws share a sample
    zeta: number of components a tree changes when projecting the target
    tau: staleness bound
    delta_leaf: largest distance between two samples sharing a leaf
    m_max: largest sample weight
    phi: bound on |loss derivative| (2 for this loss)
    """
    c: float = 1.0
    lam: float = 1.0
    M: float = 1.0
    omega: float = 1.0
    delta_cap: float = 1.0
    rho: float = 1.0
    zeta: float = 0.0
    tau: float = 0.0
    delta_leaf: float = 0.0
    m_max: float = 1.0
    phi: float = 2.0

    def __post_init__(self):
        for name in ("c", "lam", "M", "omega", "m_max", "phi"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise TheoryError(f"{name} must be positive and finite, got {value}")
        for name in ("delta_cap", "rho"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise TheoryError(f"{name} must be in (0, 1], got {value}")
        for name in ("zeta", "tau", "delta_leaf"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise TheoryError(f"{name} must be >= 0, got {value}")

    def gradient_bound_holds(self, rel_tol: float = 1e-12) -> bool:
        """M^2 <= omega * m_max^2 * phi^2."""
        bound = self.omega * self.m_max ** 2 * self.phi ** 2
        return self.M ** 2 <= bound * (1.0 + rel_tol)

    def with_changes(self, **changes: float) -> "TheoryConstants":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class StepPlan:
    """Step length and iteration bound for a target suboptimality."""
    epsilon: float
    theta: float
    D0: float
    log_numerator: float
    v: float
    t: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ContractionReport:
    """
    Per-update contraction of the expected squared distance to the optimum.

    ``diameter`` is the squared distance the iteration settles at.
    """
    v: float
    C1: float
    C2: float
    r: float
    diameter: float

    @property
    def contracting(self) -> bool:
        return self.r < 1.0

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["contracting"] = self.contracting
        return data
