"""
Oracle contracts that implicitly define covering problems.

A CoveringOracleSuite defines covLP(A, b, c) through column, cost, and
index-finding callbacks. A FcovOracleSuite defines fcov(A, b, P) through
product and point-finding callbacks. Callbacks must be pure functions of their
arguments.
"""
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from covlp.exceptions import DomainViolation
from covlp.vectors import ColumnId, DenseVec, SparseVec

ColumnOracle = Callable[[ColumnId], DenseVec]
CostOracle = Callable[[ColumnId], float]
IndexFindOracle = Callable[[DenseVec], ColumnId]
ProductOracle = Callable[[SparseVec], DenseVec]
PointFindOracle = Callable[[DenseVec], SparseVec]


def _check_eta(eta: float):
    if not 0 < eta <= 1:
        raise DomainViolation(f"eta must lie in (0, 1], received {eta}")


@dataclass(frozen=True)
class CoveringOracleSuite:
    """Column, cost and eta-weak index-finding oracles for covLP(A, b, c).

    index_find(y) must return k with D_k(y) >= eta * max_j D_j(y), where
    D_j(y) = (1 / c_j) * sum_i y_i A[i, j].
    """

    rows: int
    column: ColumnOracle
    cost: CostOracle
    index_find: IndexFindOracle
    eta: float

    def __post_init__(self):
        _check_eta(self.eta)
        if self.rows < 1:
            raise DomainViolation(f"rows must be positive, received {self.rows}")


@dataclass(frozen=True)
class FcovOracleSuite:
    """Product and eta-weak point-finding oracles for fcov(A, b, P).

    point_find outputs have support at most tau. contains and audit_product,
    when provided, are the membership test for P and an uncounted product used
    by debug runs.
    """

    rows: int
    product: ProductOracle
    point_find: PointFindOracle
    eta: float
    tau: int
    contains: Optional[Callable[[SparseVec], bool]] = None
    audit_product: Optional[ProductOracle] = None

    def __post_init__(self):
        _check_eta(self.eta)
        if self.tau < 1:
            raise DomainViolation(f"tau must be positive, received {self.tau}")


@dataclass
class OracleCounters:
    index_find: int = 0
    column: int = 0
    cost: int = 0


@dataclass
class CountingCoveringOracles:
    """Wraps a CoveringOracleSuite so every call is tallied."""

    inner: CoveringOracleSuite
    counters: OracleCounters = field(default_factory=OracleCounters)

    def _column(self, column: ColumnId) -> DenseVec:
        self.counters.column += 1
        return self.inner.column(column)

    def _cost(self, column: ColumnId) -> float:
        self.counters.cost += 1
        return self.inner.cost(column)

    def _index_find(self, y: DenseVec) -> ColumnId:
        self.counters.index_find += 1
        return self.inner.index_find(y)

    @property
    def suite(self) -> CoveringOracleSuite:
        return replace(
            self.inner,
            column=self._column,
            cost=self._cost,
            index_find=self._index_find,
        )
