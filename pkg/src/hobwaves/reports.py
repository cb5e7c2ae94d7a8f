"""Solver report types shared by the fixed-point and Newton routes."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import List, Optional

from .functionals import FunctionalReport


class Termination(enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    DIVERGED = "diverged"
    COLLAPSED_TO_ZERO = "collapsed_to_zero"


@dataclass
class IterationRecord:
    """One stabilized fixed-point sweep."""
    iteration: int
    rel_change: float
    m_s: float
    n_s: float
    residual_inf: float  # relative traveling-wave residual, max-norm

    def as_row(self):
        return (self.iteration, self.rel_change, self.m_s, self.n_s, self.residual_inf)


@dataclass
class NewtonRecord:
    """One damped Newton step."""
    iteration: int
    rel_step: float
    residual_inf: float  # collocation residual max-norm after the step
    step_inf: float
    halvings: int

    def as_row(self):
        return (self.iteration, self.rel_step, self.residual_inf, self.step_inf, self.halvings)


@dataclass
class SolveReport:
    iterations: int
    converged: bool
    termination: Termination
    history: list = field(default_factory=list)
    functionals: Optional[FunctionalReport] = None
    residual_inf_rel: Optional[float] = None
    final_m_s: Optional[float] = None
    final_n_s: Optional[float] = None
    sign_degenerate: bool = False
    in_regime: Optional[bool] = None
    warnings: List[str] = field(default_factory=list)
    quadratic_constant: Optional[float] = None  # Newton: max ||dc_{k+1}||/||dc_k||^1.5

    def summary_dict(self) -> dict:
        out = {
            "iterations": self.iterations,
            "converged": self.converged,
            "termination": self.termination.value,
            "residual_inf_rel": self.residual_inf_rel,
            "in_regime": self.in_regime,
            "sign_degenerate": self.sign_degenerate,
            "warnings": list(self.warnings),
        }
        if self.final_m_s is not None:
            out["final_m_s"] = self.final_m_s
            out["final_n_s"] = self.final_n_s
        if self.quadratic_constant is not None:
            out["quadratic_constant"] = self.quadratic_constant
        if self.functionals is not None:
            out["functionals"] = self.functionals.to_json_dict()
        return out
