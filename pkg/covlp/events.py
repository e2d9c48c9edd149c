from abc import ABC
from typing import Callable, Optional

from pydantic import BaseModel


class SolverEvent(BaseModel, ABC):
    """Abstract base event."""

    class Config:
        frozen = True


class ImproveCoverStep(SolverEvent):
    """One pass through the improve-cover loop.

    potential is b^T y on the scaled dual weights and log_potential is
    ln(b^T y) for the true weights. drop and required_drop are only set when
    the iteration moved the iterate.
    """

    iteration: int
    rows: int
    lam: float
    lambda0: float
    alpha: float
    sigma: float
    potential: float
    log_potential: float
    c1_premise: bool
    c1: bool
    stepped: bool
    drop: Optional[float] = None
    required_drop: Optional[float] = None


class ImproveCoverExit(SolverEvent):
    success: bool
    lam: float
    lambda0: float
    steps: int
    step_bound: Optional[int] = None
    residual: Optional[float] = None


class ProbeCompleted(SolverEvent):
    r: float
    satisfiable: bool
    alpha: float
    beta: float
    point_find_calls: int
    improve_cover_calls: int
    support: int


Monitor = Callable[[SolverEvent], None]
