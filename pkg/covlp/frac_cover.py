"""
Fractional covering: find x in P with Ax >= (eta / (1 + eps)) b, or report that no
x in P has Ax >= b.

The iterate is never materialized between steps. It is kept as gamma * base
where every convex step x <- (1 - sigma) x + sigma x_tilde rescales gamma and
adds sigma x_tilde / gamma to base, and its product Ax is updated
incrementally from the product of x_tilde.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np
from loguru import logger

from covlp.config import config_from_env
from covlp.events import ImproveCoverExit, ImproveCoverStep, Monitor, SolverEvent
from covlp.exceptions import (
    DomainViolation,
    InvariantViolation,
    IterationCapExceeded,
    OracleContractViolation,
    WidthBoundViolated,
)
from covlp.oracles import FcovOracleSuite
from covlp.params import (
    DerivedParams,
    bound_U,
    derived_params,
    improve_cover_step_bound,
)
from covlp.vectors import DenseVec, SparseVec, dense_vec, unit_vec

GAMMA_FLOOR = 1e-150
RESIDUAL_TOL = 1e-9
RESIDUAL_FLOOR = np.finfo(np.float64).tiny


def check_positive_rhs(b: DenseVec):
    if np.any(b <= 0):
        raise DomainViolation(f"Every entry must satisfy b > 0, received {b.tolist()}")


def lambda_of(ax: DenseVec, b: DenseVec) -> float:
    """Coverage level min_i (Ax)_i / b_i."""
    b = np.asarray(b, dtype=np.float64)
    check_positive_rhs(b)
    return float(np.min(np.asarray(ax, dtype=np.float64) / b))


class DualWeights(NamedTuple):
    """Exponential row penalties with exp(-alpha * lambda) factored out.

    The true weights are scaled * exp(log_scale).
    """

    scaled: DenseVec
    log_scale: float

    def potential(self, b: DenseVec) -> float:
        """b^T y on the scaled weights."""
        return float(self.scaled @ b)

    def log_potential(self, b: DenseVec) -> float:
        """ln(b^T y) on the true weights."""
        return math.log(self.potential(b)) + self.log_scale


def dual_weights(ax: DenseVec, b: DenseVec, alpha: float) -> DualWeights:
    if alpha <= 0:
        raise DomainViolation(f"alpha must be positive, received {alpha}")
    ratios = np.asarray(ax, dtype=np.float64) / b
    lam = float(np.min(ratios))
    scaled = np.exp(-alpha * (ratios - lam)) / b
    return DualWeights(scaled=scaled, log_scale=-alpha * lam)


def check_c1(lam: float, yTb: float, yTAx: float, eps1: float) -> bool:
    """(1 + eps1) lambda y^T b >= y^T A x."""
    return (1 + eps1) * lam * yTb >= yTAx


def check_c2_surrogate(
    yTAx: float,
    yTAxt: float,
    lam: float,
    yTb: float,
    eps2: float,
    eps3: float,
    eta: float,
) -> bool:
    """Computable stand-in for the second optimality condition.

    x_tilde is the point-find answer for y, so the best value C(y) over P is at
    most y^T A x_tilde / eta. A true result therefore implies
    C(y) - y^T A x <= eps2 C(y) + eps3 lambda y^T b. A false result means
    y^T A x_tilde > eta / (1 - eps2) * (y^T A x + eps3 lambda y^T b), which is
    the premise the potential-decrease bound needs for the next step.
    """
    return yTAx >= (1 - eps2) * yTAxt / eta - eps3 * lam * yTb


class Seed(NamedTuple):
    x: SparseVec
    ax: DenseVec


@dataclass
class FcovStats:
    point_find_calls: int = 0
    product_calls: int = 0
    product_support: int = 0
    improve_cover_calls: int = 0
    steps: int = 0
    max_residual: Optional[float] = None


@dataclass
class FcovContext:
    """Everything one frac-cover run shares with its improve-cover calls.

    point_find and product go through here so calls are counted, capped and
    checked against the declared width.
    """

    oracles: FcovOracleSuite
    b: DenseVec
    rho: float
    eps: float
    eta: float
    derived: DerivedParams
    max_calls: int
    feas_tol: float = config_from_env.COVLP_FEAS_TOL
    debug: bool = False
    monitor: Optional[Monitor] = None
    stats: FcovStats = field(default_factory=FcovStats)

    @classmethod
    def create(
        cls,
        oracles: FcovOracleSuite,
        b: DenseVec,
        rho: float,
        eps: float,
        eta: float,
        feas_tol: Optional[float] = None,
        max_calls: Optional[int] = None,
        debug: bool = False,
        monitor: Optional[Monitor] = None,
    ) -> "FcovContext":
        if rho < 0:
            raise DomainViolation(f"rho must be nonnegative, received {rho}")
        derived = derived_params(eps, eta)
        b = dense_vec(b, oracles.rows)
        check_positive_rhs(b)
        if max_calls is None:
            max_calls = config_from_env.COVLP_MAX_CALLS or (
                config_from_env.COVLP_CALL_CAP_FACTOR
                * bound_U(oracles.rows, rho, eps, eta)
            )
        return cls(
            oracles=oracles,
            b=b,
            rho=rho,
            eps=eps,
            eta=eta,
            derived=derived,
            max_calls=max_calls,
            feas_tol=config_from_env.COVLP_FEAS_TOL if feas_tol is None else feas_tol,
            debug=debug,
            monitor=monitor,
        )

    @property
    def rows(self) -> int:
        return self.oracles.rows

    def emit(self, event: SolverEvent):
        if self.monitor is not None:
            self.monitor(event)

    def point_find(self, y: DenseVec) -> SparseVec:
        if self.stats.point_find_calls >= self.max_calls:
            raise IterationCapExceeded(
                f"Point-find budget of {self.max_calls} calls exhausted; the oracle"
                f" is weaker than its declared eta={self.eta}."
            )
        self.stats.point_find_calls += 1
        x = self.oracles.point_find(y)
        if len(x) > self.oracles.tau:
            raise OracleContractViolation(
                f"Point-find support {len(x)} exceeds tau={self.oracles.tau}."
            )
        if self.debug and self.oracles.contains and not self.oracles.contains(x):
            raise InvariantViolation(f"Point-find output {x!r} is outside P.")
        return x

    def product(self, x: SparseVec) -> DenseVec:
        self.stats.product_calls += 1
        self.stats.product_support += len(x)
        ax = np.asarray(self.oracles.product(x), dtype=np.float64)
        if ax.shape != (self.rows,) or not np.all(np.isfinite(ax)) or np.any(ax < 0):
            raise OracleContractViolation(f"Product oracle returned {ax.tolist()}")
        return ax

    def check_width(self, ax: DenseVec):
        ratio = float(np.max(ax / self.b))
        if ratio > self.rho * (1 + self.feas_tol):
            raise WidthBoundViolated(
                f"Observed row ratio {ratio} exceeds the width bound rho={self.rho}."
            )

    def residual(self, state: "FcovState") -> float:
        """Largest relative gap between cached Ax and a fresh uncounted product."""
        product = self.oracles.audit_product or self.oracles.product
        fresh = np.asarray(product(state.x()), dtype=np.float64)
        # Entries are sums of nonnegative terms, so each keeps its own relative error.
        scale = np.maximum(np.abs(fresh), RESIDUAL_FLOOR)
        return float(np.max(np.abs(state.ax - fresh) / scale))


@dataclass
class FcovState:
    """Current iterate x = gamma * base with its cached product Ax."""

    gamma: float
    base: SparseVec
    ax: DenseVec
    lam: float
    lambda0: float = 0.0
    alpha: float = 0.0
    sigma: float = 0.0

    @classmethod
    def from_seed(cls, seed: Seed, b: DenseVec) -> "FcovState":
        ax = np.array(seed.ax, dtype=np.float64)
        return cls(gamma=1.0, base=seed.x.copy(), ax=ax, lam=lambda_of(ax, b))

    def x(self) -> SparseVec:
        return self.base.scaled(self.gamma)

    def step(self, x_tilde: SparseVec, ax_tilde: DenseVec, sigma: float, b: DenseVec):
        """x <- (1 - sigma) x + sigma x_tilde."""
        self.ax = (1 - sigma) * self.ax + sigma * ax_tilde
        self.gamma *= 1 - sigma
        for column, weight in x_tilde.items():
            self.base.accumulate(column, sigma * weight / self.gamma)
        if self.gamma < GAMMA_FLOOR:
            self.base = self.base.scaled(self.gamma)
            self.gamma = 1.0
        self.lam = float(np.min(self.ax / b))


@dataclass
class FcovSolution:
    x: SparseVec
    ax: DenseVec
    lam: float


@dataclass
class FcovResult:
    solution: Optional[FcovSolution]
    stats: FcovStats

    @property
    def satisfiable(self) -> bool:
        return self.solution is not None


def get_seed(context: FcovContext) -> Optional[Seed]:
    """Average of the point-find answers for every unit row weight.

    Returns None when some row i cannot reach eta * b_i, which proves that
    no point of P covers b.
    """
    m = context.rows
    b = context.b
    x = SparseVec()
    ax = np.zeros(m)
    for i in range(m):
        x_i = context.point_find(unit_vec(i, m))
        ax_i = context.product(x_i)
        context.check_width(ax_i)
        if ax_i[i] < context.eta * b[i] * (1 - context.feas_tol):
            logger.debug(f"Row {i} reaches only {ax_i[i]} of b_i={b[i]}")
            return None
        for column, weight in x_i.items():
            x.accumulate(column, weight / m)
        ax += ax_i / m
    return Seed(x=x, ax=ax)


def improve_cover(
    state: FcovState, context: FcovContext
) -> Tuple[FcovState, bool]:
    """Step toward the point-find answers until the iterate is near-optimal.

    Returns success when the iterate is eps'-optimal. A failure means lambda
    more than doubled since entry. The state is updated in place.
    """
    m = context.rows
    b = context.b
    eps_sigma, eps1, eps2, eps3, _, _ = context.derived
    lambda0 = state.lam
    if lambda0 <= 0:
        raise DomainViolation(f"improve_cover needs lambda > 0, received {lambda0}")
    if context.rho <= 0:
        raise DomainViolation(f"improve_cover needs rho > 0, received {context.rho}")

    alpha = (4 / (lambda0 * eps1)) * math.log(4 * m / eps1)
    sigma = eps_sigma / (alpha * context.rho)
    state.lambda0, state.alpha, state.sigma = lambda0, alpha, sigma
    c1_threshold = (2 / eps1) * math.log(4 * m / eps1)
    drop_factor = alpha * sigma * eps3 * (1 - eps_sigma) * context.eta / (1 - eps2)

    weights = dual_weights(state.ax, b, alpha)
    steps = 0
    while True:
        y = weights.scaled
        x_tilde = context.point_find(y)
        ax_tilde = context.product(x_tilde)
        context.check_width(ax_tilde)
        yTb = float(y @ b)
        yTAx = float(y @ state.ax)
        success = check_c2_surrogate(
            yTAx, float(y @ ax_tilde), state.lam, yTb, eps2, eps3, context.eta
        )
        if success or state.lam > 2 * lambda0:
            if context.monitor is not None:
                context.emit(
                    ImproveCoverStep(
                        iteration=steps,
                        rows=m,
                        lam=state.lam,
                        lambda0=lambda0,
                        alpha=alpha,
                        sigma=sigma,
                        potential=yTb,
                        log_potential=weights.log_potential(b),
                        c1_premise=alpha * state.lam >= c1_threshold,
                        c1=check_c1(state.lam, yTb, yTAx, eps1),
                        stepped=False,
                    )
                )
            break

        lam = state.lam
        state.step(x_tilde, ax_tilde, sigma, b)
        steps += 1
        stepped_weights = dual_weights(state.ax, b, alpha)
        if context.monitor is not None:
            drop = -math.expm1(
                stepped_weights.log_potential(b) - weights.log_potential(b)
            )
            context.emit(
                ImproveCoverStep(
                    iteration=steps - 1,
                    rows=m,
                    lam=lam,
                    lambda0=lambda0,
                    alpha=alpha,
                    sigma=sigma,
                    potential=yTb,
                    log_potential=weights.log_potential(b),
                    c1_premise=alpha * lam >= c1_threshold,
                    c1=check_c1(lam, yTb, yTAx, eps1),
                    stepped=True,
                    drop=drop,
                    required_drop=drop_factor * lam,
                )
            )
        weights = stepped_weights

    context.stats.steps += steps
    residual = None
    if context.debug:
        residual = context.residual(state)
        previous = context.stats.max_residual or 0.0
        context.stats.max_residual = max(previous, residual)
        if residual > max(RESIDUAL_TOL, context.feas_tol):
            raise InvariantViolation(
                f"Cached Ax drifted from the product oracle by {residual:.3e}."
            )
    context.emit(
        ImproveCoverExit(
            success=success,
            lam=state.lam,
            lambda0=lambda0,
            steps=steps,
            step_bound=improve_cover_step_bound(
                m, context.rho, lambda0, context.eps
            ),
            residual=residual,
        )
    )
    return state, success


def _solved(state: FcovState, stats: FcovStats) -> FcovResult:
    solution = FcovSolution(x=state.x(), ax=dense_vec(state.ax), lam=state.lam)
    return FcovResult(solution=solution, stats=stats)


def frac_cover(
    oracles: FcovOracleSuite,
    b: DenseVec,
    rho: float,
    eps: float,
    eta: float,
    feas_tol: Optional[float] = None,
    max_calls: Optional[int] = None,
    debug: bool = False,
    monitor: Optional[Monitor] = None,
) -> FcovResult:
    """eta / (1 + eps)-weakly solve fcov(A, b, P).

    Requires rho >= width(A, b, P). An unsatisfiable result proves that no x in
    P has Ax >= b.
    """
    context = FcovContext.create(
        oracles,
        b,
        rho,
        eps,
        eta,
        feas_tol=feas_tol,
        max_calls=max_calls,
        debug=debug,
        monitor=monitor,
    )
    stats = context.stats
    if rho == 0:
        logger.debug("Width bound is zero, so no point of P covers b")
        return FcovResult(solution=None, stats=stats)

    seed = get_seed(context)
    if seed is None:
        return FcovResult(solution=None, stats=stats)

    tol = context.feas_tol
    near_optimal = (1 - context.derived.eps_prime) * (1 - tol)
    state = FcovState.from_seed(seed, context.b)
    while True:
        if state.lam >= 1 - tol:
            return _solved(state, stats)
        stats.improve_cover_calls += 1
        state, success = improve_cover(state, context)
        if success:
            if state.lam >= near_optimal:
                return _solved(state, stats)
            return FcovResult(solution=None, stats=stats)
