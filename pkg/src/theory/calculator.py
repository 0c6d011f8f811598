"""
Closed-form convergence quantities.

The tau^2 term has coefficient 4 in the step length and 6 in the iteration
bound, and the log factor multiplies only the tau^2 term.
"""

import logging
import math
from typing import Optional

import numpy as np

from core.errors import TheoryError
from .models import ContractionReport, StepPlan, TheoryConstants


logger = logging.getLogger(__name__)

CEIL_RTOL = 1e-12


def _check_target(epsilon: float, theta: float) -> None:
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise TheoryError(f"epsilon must be positive, got {epsilon}")
    if not 0.0 < theta < 1.0:
        raise TheoryError(f"theta must be in (0, 1), got {theta}")


def step_length(k: TheoryConstants, epsilon: float, theta: float) -> float:
    """v = c theta eps / (2 lam M^2 omega (1 + 6 rho tau + 4 rho tau^2 omega sqrt(delta_cap)))."""
    _check_target(epsilon, theta)
    delay = 1.0 + 6.0 * k.rho * k.tau + 4.0 * k.rho * k.tau ** 2 * k.omega * math.sqrt(k.delta_cap)
    return k.c * theta * epsilon / (2.0 * k.lam * k.M ** 2 * k.omega * delay)


def iteration_requirement(
    k: TheoryConstants,
    epsilon: float,
    theta: float,
    D0: float,
    log_numerator: Optional[float] = None,
) -> float:
    """
    Real-valued right-hand side of the iteration bound.

    ``log_numerator`` is the constant L in log(L * D0 / eps); it defaults to lam.
    """
    _check_target(epsilon, theta)
    if not (math.isfinite(D0) and D0 > 0):
        raise TheoryError(f"D0 must be positive, got {D0}")
    L = k.lam if log_numerator is None else log_numerator
    if not L > 0:
        raise TheoryError(f"log numerator must be positive, got {L}")

    log_term = math.log(L * D0 / epsilon)
    delay = 1.0 + 6.0 * k.rho * k.tau + 6.0 * k.rho * k.tau ** 2 * k.omega * math.sqrt(k.delta_cap) * log_term
    return 2.0 * k.lam * k.M ** 2 * k.omega * delay / (k.c ** 2 * theta * epsilon)


def iteration_bound(
    k: TheoryConstants,
    epsilon: float,
    theta: float,
    D0: float,
    log_numerator: Optional[float] = None,
) -> int:
    """Smallest integer t >= 1 satisfying the iteration bound."""
    requirement = iteration_requirement(k, epsilon, theta, D0, log_numerator)
    # absorb rounding noise before taking the ceiling
    return max(1, math.ceil(requirement * (1.0 - CEIL_RTOL)))


def plan_steps(
    k: TheoryConstants,
    epsilon: float,
    theta: float,
    D0: float,
    log_numerator: Optional[float] = None,
) -> StepPlan:
    L = k.lam if log_numerator is None else log_numerator
    return StepPlan(
        epsilon=epsilon,
        theta=theta,
        D0=D0,
        log_numerator=L,
        v=step_length(k, epsilon, theta),
        t=iteration_bound(k, epsilon, theta, D0, L),
    )


def contraction(k: TheoryConstants, v: float) -> ContractionReport:
    """
    Contraction rate r and fixed-point squared distance for step length v.

    C1 = 2 delta lam m_max sqrt(zeta) + c v tau M
    C2 = (4 delta lam m_max sqrt(zeta) + c v tau M) tau M + 2 M^2 (3 rho tau + 1/2)
    """
    if not (math.isfinite(v) and v > 0):
        raise TheoryError(f"v must be positive, got {v}")

    leaf_term = k.delta_leaf * k.lam * k.m_max * math.sqrt(k.zeta)
    delay_term = k.c * v * k.tau * k.M
    C1 = 2.0 * leaf_term + delay_term
    C2 = (4.0 * leaf_term + delay_term) * k.tau * k.M + 2.0 * k.M ** 2 * (3.0 * k.rho * k.tau + 0.5)
    s = C1 + math.sqrt(C1 ** 2 + 4.0 * k.c * v * C2)
    r = 1.0 - v * k.c * (1.0 - C1 / s)
    diameter = (s / (2.0 * k.c)) ** 2

    report = ContractionReport(v=v, C1=C1, C2=C2, r=r, diameter=diameter)
    if not report.contracting:
        logger.warning("Contraction rate r=%.6g >= 1 for v=%g; the bound does not contract", r, v)
    return report


def fixed_point_residual(k: TheoryConstants, report: ContractionReport) -> float:
    """c D - C1 sqrt(D) - v C2 at D = diameter; zero at the fixed point."""
    D = report.diameter
    return k.c * D - report.C1 * math.sqrt(D) - report.v * report.C2


def recurrence(k: TheoryConstants, v: float, D0: float, steps: int) -> np.ndarray:
    """
    Iterate D_{j+1} = (1 - v c) D_j + v C1 sqrt(D_j) + v^2 C2 from D0.

    Returns the ``steps + 1`` values D_0 .. D_steps.
    """
    if D0 < 0:
        raise TheoryError(f"D0 must be >= 0, got {D0}")
    report = contraction(k, v)
    values = np.empty(steps + 1)
    values[0] = D0
    for j in range(steps):
        D = values[j]
        values[j + 1] = (1.0 - v * k.c) * D + v * report.C1 * math.sqrt(D) + v ** 2 * report.C2
    return values


def max_workers(t_build: float, t_comm_plus_target: float) -> float:
    """Worker count beyond which the server becomes the bottleneck."""
    if not t_comm_plus_target > 0:
        raise TheoryError("communication plus target time must be positive")
    if not t_build > 0:
        raise TheoryError("tree build time must be positive")
    return t_build / t_comm_plus_target
