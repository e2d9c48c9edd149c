"""
Bin packing configuration LP and its knapsack index-finding oracles.

Rows are item types, columns are configurations (multisets of item types that
fit one unit bin) and every column costs one bin. For row weights y the best
column maximizes sum_i y_i counts_i, a bounded knapsack problem, so any
eta-approximate knapsack algorithm is an eta-weak index-finding oracle.
"""
import math
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger
from pydantic import BaseModel, PositiveInt, confloat, validator

from covlp.config import config_from_env
from covlp.cov_lp import CovLpResult, cov_lp_solve
from covlp.events import Monitor
from covlp.exceptions import CapExceeded, DomainViolation, OracleContractViolation
from covlp.oracles import CoveringOracleSuite
from covlp.params import SolveParams
from covlp.vectors import ColumnId, DenseVec, dense_vec

if TYPE_CHECKING:
    size_type = float
else:
    size_type = confloat(gt=0, le=1)


class BinPackInstance(BaseModel):
    """Distinct item sizes in strictly ascending order with their multiplicities."""

    sizes: Tuple[size_type, ...]
    multiplicities: Tuple[PositiveInt, ...]

    class Config:
        frozen = True

    @validator("sizes")
    def sizes_ascending(cls, sizes: Tuple[float, ...]) -> Tuple[float, ...]:
        if not sizes:
            raise ValueError("At least one item type is required.")
        if any(a >= b for a, b in zip(sizes, sizes[1:])):
            raise ValueError(f"Sizes must be strictly ascending: {list(sizes)}")
        return sizes

    @validator("multiplicities")
    def one_per_size(cls, multiplicities, values):
        sizes = values.get("sizes")
        if sizes is not None and len(sizes) != len(multiplicities):
            raise ValueError(
                f"{len(multiplicities)} multiplicities given for {len(sizes)} sizes."
            )
        return multiplicities

    @classmethod
    def from_items(cls, items: Sequence[float]) -> "BinPackInstance":
        """Group a flat list of item sizes into distinct types."""
        grouped = sorted(Counter(float(s) for s in items).items())
        return cls(
            sizes=tuple(size for size, _ in grouped),
            multiplicities=tuple(count for _, count in grouped),
        )

    @property
    def m(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return sum(self.multiplicities)

    @property
    def s_min(self) -> float:
        return self.sizes[0]

    @property
    def b(self) -> DenseVec:
        return dense_vec(self.multiplicities)


@dataclass(frozen=True)
class Configuration:
    """Count vector over item types; equality is structural."""

    counts: Tuple[int, ...]

    @classmethod
    def single(cls, index: int, m: int) -> "Configuration":
        counts = [0] * m
        counts[index] = 1
        return cls(tuple(counts))

    @property
    def items(self) -> int:
        return sum(self.counts)

    @property
    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        """Fewer items first, then larger counts of earlier types first."""
        return self.items, tuple(-c for c in self.counts)

    @cached_property
    def _column(self) -> DenseVec:
        return dense_vec(self.counts)

    def column(self) -> DenseVec:
        """Read-only count vector, built once per configuration."""
        return self._column

    def profit(self, y: DenseVec) -> float:
        return float(np.dot(y, self.counts))

    def size(self, instance: BinPackInstance) -> float:
        return float(sum(c * s for c, s in zip(self.counts, instance.sizes)))

    def fits(self, instance: BinPackInstance, feas_tol: float) -> bool:
        return (
            len(self.counts) == instance.m
            and all(0 <= c <= b for c, b in zip(self.counts, instance.multiplicities))
            and self.size(instance) <= 1 + feas_tol
        )


def _profits(y: DenseVec, instance: BinPackInstance) -> np.ndarray:
    profits = np.asarray(y, dtype=np.float64).reshape(-1)
    if profits.shape[0] != instance.m:
        raise DomainViolation(
            f"Expected {instance.m} row weights, received {profits.shape[0]}"
        )
    return profits


def _density_order(profits: np.ndarray, instance: BinPackInstance) -> List[int]:
    """Profitable types by density descending, lower type index on ties."""
    candidates = [i for i in range(instance.m) if profits[i] > 0]
    return sorted(candidates, key=lambda i: (-profits[i] / instance.sizes[i], i))


def _max_copies(size: float, limit: int, used: float, capacity: float) -> int:
    copies = min(limit, max(int(math.floor((capacity - used) / size)), 0))
    while copies > 0 and used + copies * size > capacity:
        copies -= 1
    while copies < limit and used + (copies + 1) * size <= capacity:
        copies += 1
    return copies


def _feas_tol(feas_tol: Optional[float]) -> float:
    return config_from_env.COVLP_FEAS_TOL if feas_tol is None else feas_tol


def exact_knapsack_bnb(
    y: DenseVec,
    instance: BinPackInstance,
    feas_tol: Optional[float] = None,
    max_items: Optional[int] = None,
) -> Configuration:
    """Most profitable configuration by depth-first branch-and-bound.

    Types are branched in density order with larger counts first and pruned by
    the fractional bounded-knapsack relaxation. Only strict improvements replace
    the incumbent, so the first optimum found is returned.
    """
    max_items = max_items or config_from_env.COVLP_BNB_MAX_ITEMS
    if instance.n > max_items:
        raise CapExceeded(
            f"Exact knapsack supports at most {max_items} items, instance has"
            f" {instance.n}"
        )
    profits = _profits(y, instance)
    capacity = 1 + _feas_tol(feas_tol)
    order = _density_order(profits, instance)
    sizes = instance.sizes
    limits = instance.multiplicities

    counts = [0] * instance.m
    best_counts = list(counts)
    best_profit = 0.0

    def bound(level: int, used: float, profit: float) -> float:
        for t in order[level:]:
            room = capacity - used
            if limits[t] * sizes[t] <= room:
                used += limits[t] * sizes[t]
                profit += limits[t] * profits[t]
            else:
                return profit + max(room, 0.0) * profits[t] / sizes[t]
        return profit

    def search(level: int, used: float, profit: float):
        nonlocal best_profit, best_counts
        if profit > best_profit:
            best_profit = profit
            best_counts = list(counts)
        if level == len(order):
            return
        if bound(level, used, profit) <= best_profit * (1 + 1e-12):
            return
        t = order[level]
        for copies in range(_max_copies(sizes[t], limits[t], used, capacity), -1, -1):
            counts[t] = copies
            search(level + 1, used + copies * sizes[t], profit + copies * profits[t])
        counts[t] = 0

    search(0, 0.0, 0.0)
    return Configuration(tuple(best_counts))


def greedy_knapsack(
    y: DenseVec, instance: BinPackInstance, feas_tol: Optional[float] = None
) -> Configuration:
    """Better of the density-greedy fill and the most profitable single item."""
    profits = _profits(y, instance)
    capacity = 1 + _feas_tol(feas_tol)
    counts = [0] * instance.m
    used = profit = 0.0
    for t in _density_order(profits, instance):
        copies = _max_copies(
            instance.sizes[t], instance.multiplicities[t], used, capacity
        )
        counts[t] = copies
        used += copies * instance.sizes[t]
        profit += copies * profits[t]

    single = int(np.argmax(profits))
    if profits[single] > profit:
        return Configuration.single(single, instance.m)
    return Configuration(tuple(counts))


def singleton_knapsack(y: DenseVec, instance: BinPackInstance) -> Configuration:
    """One copy of the most profitable item type."""
    return Configuration.single(int(np.argmax(_profits(y, instance))), instance.m)


class KnapsackKind(str, Enum):
    """Available knapsack index-finding oracles."""

    EXACT = "exact"
    GREEDY = "greedy"
    SINGLETON = "singleton"


class AbstractKnapsackOracle(ABC):
    """Index-finding oracle for the configuration LP of one instance.

    Subclasses implement solve(); calling the oracle verifies that every
    returned configuration fits a bin.
    """

    kind: KnapsackKind

    def __init__(self, instance: BinPackInstance, feas_tol: Optional[float] = None):
        self.instance = instance
        self.feas_tol = _feas_tol(feas_tol)

    @property
    @abstractmethod
    def eta(self) -> float:
        """Guaranteed fraction of the optimal profit."""

    @abstractmethod
    def solve(self, y: DenseVec) -> Configuration:
        """Find a profitable configuration for row weights y."""

    def __call__(self, y: DenseVec) -> Configuration:
        configuration = self.solve(y)
        if not configuration.fits(self.instance, self.feas_tol):
            raise OracleContractViolation(
                f"{self.kind.value} oracle returned infeasible {configuration}"
            )
        return configuration


class ExactKnapsackOracle(AbstractKnapsackOracle):
    kind = KnapsackKind.EXACT

    def __init__(
        self,
        instance: BinPackInstance,
        feas_tol: Optional[float] = None,
        max_items: Optional[int] = None,
    ):
        super().__init__(instance, feas_tol)
        self.max_items = max_items or config_from_env.COVLP_BNB_MAX_ITEMS
        if instance.n > self.max_items:
            raise CapExceeded(
                f"Exact knapsack supports at most {self.max_items} items, instance"
                f" has {instance.n}"
            )

    @property
    def eta(self) -> float:
        return 1.0

    def solve(self, y: DenseVec) -> Configuration:
        return exact_knapsack_bnb(y, self.instance, self.feas_tol, self.max_items)


class GreedyKnapsackOracle(AbstractKnapsackOracle):
    kind = KnapsackKind.GREEDY

    @property
    def eta(self) -> float:
        return 0.5

    def solve(self, y: DenseVec) -> Configuration:
        return greedy_knapsack(y, self.instance, self.feas_tol)


class SingletonKnapsackOracle(AbstractKnapsackOracle):
    kind = KnapsackKind.SINGLETON

    @property
    def eta(self) -> float:
        # No configuration holds more than this many items.
        per_bin = math.floor((1 + self.feas_tol) / self.instance.s_min)
        return 1 / per_bin

    def solve(self, y: DenseVec) -> Configuration:
        return singleton_knapsack(y, self.instance)


def knapsack_oracle_factory(
    kind: KnapsackKind, instance: BinPackInstance, feas_tol: Optional[float] = None
) -> AbstractKnapsackOracle:
    """Get a concrete knapsack oracle by name."""
    knapsack_kind_mapper = {
        KnapsackKind.EXACT: ExactKnapsackOracle,
        KnapsackKind.GREEDY: GreedyKnapsackOracle,
        KnapsackKind.SINGLETON: SingletonKnapsackOracle,
    }
    return knapsack_kind_mapper[KnapsackKind(kind)](instance, feas_tol)


def config_lp_oracles(
    instance: BinPackInstance, knapsack: AbstractKnapsackOracle
) -> CoveringOracleSuite:
    def column(configuration: ColumnId) -> DenseVec:
        if not isinstance(configuration, Configuration):
            raise DomainViolation(f"Not a configuration: {configuration!r}")
        return configuration.column()

    def cost(configuration: ColumnId) -> float:
        return 1.0

    return CoveringOracleSuite(
        rows=instance.m,
        column=column,
        cost=cost,
        index_find=knapsack,
        eta=knapsack.eta,
    )


def default_bounds(instance: BinPackInstance) -> Tuple[float, float]:
    """q = n bins always suffice and no configuration count exceeds b_i <= n."""
    n = float(instance.n)
    return n, n


def solve_binpack_lp(
    instance: BinPackInstance,
    knapsack: AbstractKnapsackOracle,
    eps: float,
    feas_tol: Optional[float] = None,
    max_calls: Optional[int] = None,
    debug: bool = False,
    monitor: Optional[Monitor] = None,
) -> CovLpResult:
    """(1 + eps + eps^2) / eta-approximately solve the configuration LP."""
    q, rho = default_bounds(instance)
    params = SolveParams(
        eps=eps,
        eta=knapsack.eta,
        q=q,
        rho=rho,
        max_oracle_calls=max_calls,
        feas_tol=_feas_tol(feas_tol),
        debug=debug,
    )
    logger.info(
        f"Solving configuration LP with m={instance.m} n={instance.n}"
        f" oracle={knapsack.kind.value} eta={knapsack.eta:.4g} eps={eps}"
    )
    return cov_lp_solve(
        config_lp_oracles(instance, knapsack), instance.b, params, monitor=monitor
    )
