"""
Approximately solve covLP(A, b, c) by binary search over the cost level r.

Each probe asks frac-cover whether P_r = {x >= 0 : c^T x = r} contains a point
covering b. The point-find oracle over P_r is synthesized from the
index-finding oracle, since the extreme points of P_r are the scaled unit
columns (r / c_j) e_j.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from loguru import logger

from covlp.events import Monitor, ProbeCompleted
from covlp.exceptions import DomainViolation, InvalidUpperBound, OracleContractViolation
from covlp.frac_cover import FcovResult, FcovStats, check_positive_rhs, frac_cover
from covlp.oracles import (
    CountingCoveringOracles,
    CoveringOracleSuite,
    FcovOracleSuite,
    OracleCounters,
    PointFindOracle,
    ProductOracle,
)
from covlp.params import SolveParams, derived_params
from covlp.vectors import DenseVec, SparseVec, dense_vec


def width_bound_check(q: float, rho: float, r: float) -> float:
    """Validate rho as a width bound for P_r.

    width(A, b, P_r) = r * max A[i, j] / (b_i c_j) grows with r, so a bound
    valid at r = q stays valid for every 0 <= r <= q.
    """
    if rho < 0:
        raise DomainViolation(f"rho must be nonnegative, received {rho}")
    if not 0 <= r <= q:
        raise DomainViolation(f"Probe level r={r} must lie in [0, q={q}]")
    return rho


def make_point_find(covering: CoveringOracleSuite, r: float) -> PointFindOracle:
    """point_find(y) = (r / c_k) e_k for k = index_find(y)."""
    if r <= 0:
        raise DomainViolation(f"r must be positive, received {r}")

    def point_find(y: DenseVec) -> SparseVec:
        column = covering.index_find(y)
        cost = covering.cost(column)
        if not cost > 0:
            raise OracleContractViolation(
                f"Cost oracle returned {cost} for column {column!r}"
            )
        return SparseVec.unit(column, r / cost)

    return point_find


def make_product(covering: CoveringOracleSuite) -> ProductOracle:
    """Ax as the weighted sum of the columns in support(x)."""

    def product(x: SparseVec) -> DenseVec:
        total = np.zeros(covering.rows)
        for column, weight in x.items():
            values = np.asarray(covering.column(column), dtype=np.float64)
            if values.shape != (covering.rows,) or np.any(values < 0):
                raise OracleContractViolation(
                    f"Column oracle returned {values.tolist()} for {column!r}"
                )
            total += weight * values
        return total

    return product


def level_contains(covering: CoveringOracleSuite, r: float, feas_tol: float):
    """Membership test for P_r within a relative tolerance."""

    def contains(x: SparseVec) -> bool:
        return abs(x.dot(covering.cost) - r) <= max(feas_tol, 1e-9) * r

    return contains


def frac_cov_2(
    covering: CoveringOracleSuite,
    b: DenseVec,
    r: float,
    rho: float,
    eps: float,
    eta: float,
    feas_tol: Optional[float] = None,
    max_calls: Optional[int] = None,
    debug: bool = False,
    monitor: Optional[Monitor] = None,
    audit: Optional[CoveringOracleSuite] = None,
) -> FcovResult:
    """eta / (1 + eps)-weakly solve fcov(A, b, P_r).

    audit is an uncounted copy of covering used only by debug checks.
    """
    audit = audit or covering
    oracles = FcovOracleSuite(
        rows=covering.rows,
        product=make_product(covering),
        point_find=make_point_find(covering, r),
        eta=eta,
        tau=1,
        contains=level_contains(audit, r, feas_tol or 0.0),
        audit_product=make_product(audit),
    )
    return frac_cover(
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


@dataclass
class ProbeRecord:
    r: float
    satisfiable: bool
    stats: FcovStats
    support: int


@dataclass
class CovLpStats:
    probes: List[ProbeRecord] = field(default_factory=list)
    binary_search_iterations: int = 0

    @property
    def frac_cover_calls(self) -> int:
        return len(self.probes)

    @property
    def point_find_calls(self) -> int:
        return sum(p.stats.point_find_calls for p in self.probes)

    @property
    def max_point_find_calls(self) -> int:
        return max((p.stats.point_find_calls for p in self.probes), default=0)

    @property
    def improve_cover_calls(self) -> int:
        return sum(p.stats.improve_cover_calls for p in self.probes)

    @property
    def max_improve_cover_calls(self) -> int:
        return max((p.stats.improve_cover_calls for p in self.probes), default=0)

    @property
    def product_calls(self) -> int:
        return sum(p.stats.product_calls for p in self.probes)

    @property
    def product_support(self) -> int:
        return sum(p.stats.product_support for p in self.probes)

    @property
    def steps(self) -> int:
        return sum(p.stats.steps for p in self.probes)


@dataclass
class CovLpResult:
    """Bracket [alpha, beta] around the optimum plus the scaled solution.

    x_hat is the last probe solution at level beta; x_feasible = x_hat / mu
    covers b and costs objective = beta / mu.
    """

    alpha: float
    beta: float
    mu: float
    x_hat: SparseVec
    x_feasible: SparseVec
    ax_feasible: DenseVec
    objective: float
    stats: CovLpStats
    counters: OracleCounters

    @property
    def support(self) -> int:
        return len(self.x_feasible)


def cov_lp_solve(
    covering: CoveringOracleSuite,
    b: DenseVec,
    params: SolveParams,
    monitor: Optional[Monitor] = None,
) -> CovLpResult:
    """(1 + eps + eps^2) / eta-approximately solve covLP(A, b, c).

    Requires params.q >= OPT and params.rho >= q * max A[i, j] / (b_i c_j).
    """
    b = dense_vec(b, covering.rows)
    check_positive_rhs(b)
    delta = derived_params(params.eps, params.eta).delta
    mu = params.eta / (1 + params.eps)
    max_calls = params.call_cap(covering.rows)

    counting = CountingCoveringOracles(covering)
    suite = counting.suite
    stats = CovLpStats()
    alpha, beta = 0.0, params.q

    def probe(r: float) -> FcovResult:
        rho = width_bound_check(params.q, params.rho, r)
        result = frac_cov_2(
            suite,
            b,
            r,
            rho,
            params.eps,
            params.eta,
            feas_tol=params.feas_tol,
            max_calls=max_calls,
            debug=params.debug,
            monitor=monitor,
            audit=covering,
        )
        support = len(result.solution.x) if result.solution else 0
        stats.probes.append(
            ProbeRecord(
                r=r,
                satisfiable=result.satisfiable,
                stats=result.stats,
                support=support,
            )
        )
        logger.debug(
            f"Probe r={r:.6g} satisfiable={result.satisfiable}"
            f" point_find_calls={result.stats.point_find_calls}"
        )
        return result

    first = probe(params.q)
    if first.solution is None:
        raise InvalidUpperBound(
            f"No point of P_q covers b at q={params.q}, so q is below the optimum."
        )
    x_hat, ax_hat = first.solution.x, first.solution.ax
    if monitor is not None:
        monitor(_probe_event(stats.probes[-1], alpha, beta))

    while beta > (1 + delta) * alpha:
        r = (alpha + beta) / 2
        result = probe(r)
        if result.solution is not None:
            beta = r
            x_hat, ax_hat = result.solution.x, result.solution.ax
        else:
            alpha = r
        stats.binary_search_iterations += 1
        if monitor is not None:
            monitor(_probe_event(stats.probes[-1], alpha, beta))

    x_feasible = x_hat.scaled(1 / mu)
    logger.info(
        f"Bracket [{alpha:.6g}, {beta:.6g}] after {stats.frac_cover_calls} probes"
        f" and {stats.point_find_calls} point-find calls"
    )
    return CovLpResult(
        alpha=alpha,
        beta=beta,
        mu=mu,
        x_hat=x_hat,
        x_feasible=x_feasible,
        ax_feasible=dense_vec(np.asarray(ax_hat) / mu),
        objective=beta / mu,
        stats=stats,
        counters=counting.counters,
    )


def _probe_event(record: ProbeRecord, alpha: float, beta: float) -> ProbeCompleted:
    return ProbeCompleted(
        r=record.r,
        satisfiable=record.satisfiable,
        alpha=alpha,
        beta=beta,
        point_find_calls=record.stats.point_find_calls,
        improve_cover_calls=record.stats.improve_cover_calls,
        support=record.support,
    )
