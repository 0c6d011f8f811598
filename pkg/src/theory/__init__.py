"""
Convergence-theory calculator: step length, iteration bound, contraction
rate and the worker-count bound, plus empirical constant estimation.
"""

from .calculator import (
    contraction,
    fixed_point_residual,
    iteration_bound,
    iteration_requirement,
    max_workers,
    plan_steps,
    recurrence,
    step_length,
)
from .estimation import ConstantEstimate, estimate_constants
from .models import ContractionReport, StepPlan, TheoryConstants

__all__ = [
    "ConstantEstimate",
    "ContractionReport",
    "StepPlan",
    "TheoryConstants",
    "contraction",
    "estimate_constants",
    "fixed_point_residual",
    "iteration_bound",
    "iteration_requirement",
    "max_workers",
    "plan_steps",
    "recurrence",
    "step_length",
]
