"""
Exact ground truth for small instances.

Everything here runs in rational arithmetic: configuration enumeration,
an exact covering LP solve with a verified duality certificate, and the exact
best coverage level over a cost slice.
"""
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from numbers import Rational as RationalNumber
from typing import List, Optional, Sequence, Tuple, Union

from loguru import logger

from covlp.binpack import BinPackInstance, Configuration
from covlp.config import config_from_env
from covlp.exceptions import CapExceeded, CertificateError, DomainViolation, InfeasibleLp

Rational = Fraction
RationalLike = Union[Fraction, int, float, str, Decimal]
RationalVector = Tuple[Fraction, ...]


def to_rational(value: RationalLike) -> Fraction:
    """Exact rational value of a number.

    Floats convert through their binary representation, decimal strings through
    their decimal digits.
    """
    if isinstance(value, bool):
        raise DomainViolation(f"Not a number: {value!r}")
    if isinstance(value, (RationalNumber, float, Decimal)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError:
            raise DomainViolation(f"Not a number: {value!r}")
    raise DomainViolation(f"Not a number: {value!r}")


@dataclass(frozen=True)
class ExplicitLp:
    """covLP(A, b, c) over exact rationals."""

    A: Tuple[RationalVector, ...]
    b: RationalVector
    c: RationalVector

    @classmethod
    def create(
        cls,
        A: Sequence[Sequence[RationalLike]],
        b: Sequence[RationalLike],
        c: Sequence[RationalLike],
    ) -> "ExplicitLp":
        matrix = tuple(tuple(to_rational(v) for v in row) for row in A)
        lp = cls(
            A=matrix,
            b=tuple(to_rational(v) for v in b),
            c=tuple(to_rational(v) for v in c),
        )
        lp.validate()
        return lp

    @property
    def rows(self) -> int:
        return len(self.A)

    @property
    def columns(self) -> int:
        return len(self.c)

    def validate(self):
        if not self.A or any(len(row) != self.columns for row in self.A):
            raise DomainViolation("A must be a non-empty rectangular matrix")
        if len(self.b) != self.rows:
            raise DomainViolation(f"b has {len(self.b)} entries for {self.rows} rows")
        if any(v < 0 for row in self.A for v in row):
            raise DomainViolation("A >= 0 is required")
        if any(v <= 0 for v in self.b):
            raise DomainViolation("b > 0 is required")
        if any(v <= 0 for v in self.c):
            raise DomainViolation("c > 0 is required")

    def zero_rows(self) -> List[int]:
        return [i for i, row in enumerate(self.A) if not any(row)]


@dataclass(frozen=True)
class ExactLpSolution:
    x: RationalVector
    r_star: Fraction
    y: RationalVector


def _check_caps(lp: ExplicitLp):
    if lp.columns > config_from_env.COVLP_MAX_COLUMNS:
        raise CapExceeded(
            f"Exact LP supports {config_from_env.COVLP_MAX_COLUMNS} columns,"
            f" received {lp.columns}"
        )
    if lp.rows > config_from_env.COVLP_MAX_ROWS:
        raise CapExceeded(
            f"Exact LP supports {config_from_env.COVLP_MAX_ROWS} rows,"
            f" received {lp.rows}"
        )


def verify_certificate(lp: ExplicitLp, solution: ExactLpSolution):
    """Raise CertificateError unless (x, y) are optimal primal and dual points."""
    x, y = solution.x, solution.y
    if any(v < 0 for v in x) or any(v < 0 for v in y):
        raise CertificateError("Negative entry in the primal or dual solution")
    for i, row in enumerate(lp.A):
        if sum(a * v for a, v in zip(row, x)) < lp.b[i]:
            raise CertificateError(f"Primal solution leaves row {i} uncovered")
    for j in range(lp.columns):
        if sum(lp.A[i][j] * y[i] for i in range(lp.rows)) > lp.c[j]:
            raise CertificateError(f"Dual solution violates column {j}")
    primal = sum(c * v for c, v in zip(lp.c, x))
    dual = sum(b * v for b, v in zip(lp.b, y))
    if primal != dual or primal != solution.r_star:
        raise CertificateError(f"Duality gap: primal {primal} != dual {dual}")


def exact_lp_solve(lp: ExplicitLp) -> ExactLpSolution:
    """Optimal primal and dual points of covLP(A, b, c).

    Runs Bland's-rule simplex on the dual max b^T y s.t. A^T y <= c, y >= 0,
    whose slack basis is feasible because c > 0. The primal optimum is read off
    the reduced costs of the slack variables.
    """
    _check_caps(lp)
    zero_rows = lp.zero_rows()
    if zero_rows:
        raise InfeasibleLp(f"Rows {zero_rows} of A are zero")

    m, n = lp.rows, lp.columns
    # Row j reads basic[j] = rhs[j] - sum_k table[j][k] * nonbasic[k].
    # Labels 0..m-1 are dual variables y_i, m..m+n-1 are the slacks s_j.
    table = [[lp.A[i][j] for i in range(m)] for j in range(n)]
    rhs = list(lp.c)
    basic = [m + j for j in range(n)]
    nonbasic = list(range(m))
    # z = value + sum_k objective[k] * nonbasic[k]
    objective = list(lp.b)
    value = Fraction(0)

    pivots = 0
    while True:
        entering = [k for k in range(m) if objective[k] > 0]
        if not entering:
            break
        e = min(entering, key=lambda k: nonbasic[k])
        candidates = [r for r in range(n) if table[r][e] > 0]
        if not candidates:
            raise InfeasibleLp("Dual is unbounded, so the covering LP is infeasible")
        r = min(candidates, key=lambda r: (rhs[r] / table[r][e], basic[r]))

        pivot = table[r][e]
        row = [v / pivot for v in table[r]]
        row[e] = 1 / pivot
        rhs[r] = rhs[r] / pivot
        table[r] = row
        for s in range(n):
            factor = table[s][e]
            if s == r or not factor:
                continue
            table[s] = [v - factor * w for v, w in zip(table[s], row)]
            table[s][e] = -factor * row[e]
            rhs[s] -= factor * rhs[r]
        factor = objective[e]
        value += factor * rhs[r]
        objective = [v - factor * w for v, w in zip(objective, row)]
        objective[e] = -factor * row[e]
        basic[r], nonbasic[e] = nonbasic[e], basic[r]
        pivots += 1

    y = [Fraction(0)] * m
    for r, label in enumerate(basic):
        if label < m:
            y[label] = rhs[r]
    x = [Fraction(0)] * n
    for k, label in enumerate(nonbasic):
        if label >= m:
            x[label - m] = -objective[k]

    solution = ExactLpSolution(x=tuple(x), r_star=value, y=tuple(y))
    verify_certificate(lp, solution)
    logger.debug(f"Exact LP {m}x{n} solved in {pivots} pivots, r*={value}")
    return solution


def exact_lambda_star(
    lp: ExplicitLp, r: RationalLike, r_star: Optional[Fraction] = None
) -> Fraction:
    """Largest min_i (Ax)_i / b_i over P_r = {x >= 0 : c^T x = r}.

    Coverage scales linearly along P_r, so the optimum is r / r* with r* the
    covering LP optimum, or zero when A has a zero row.
    """
    level = to_rational(r)
    if level < 0:
        raise DomainViolation(f"r must be nonnegative, received {r}")
    if lp.zero_rows():
        return Fraction(0)
    if r_star is None:
        r_star = exact_lp_solve(lp).r_star
    return level / r_star


def enumerate_configurations(
    instance: BinPackInstance,
    feas_tol: Optional[float] = None,
    max_configurations: Optional[int] = None,
) -> List[Configuration]:
    """Every nonempty configuration of the instance in canonical order."""
    cap = max_configurations or config_from_env.COVLP_MAX_CONFIGURATIONS
    tol = config_from_env.COVLP_FEAS_TOL if feas_tol is None else feas_tol
    capacity = 1 + tol
    sizes, limits = instance.sizes, instance.multiplicities
    found: List[Configuration] = []
    counts = [0] * instance.m

    def extend(t: int, used: float):
        if t == instance.m:
            if any(counts):
                if len(found) >= cap:
                    raise CapExceeded(f"More than {cap} configurations")
                found.append(Configuration(tuple(counts)))
            return
        for copies in range(limits[t] + 1):
            if used + copies * sizes[t] > capacity:
                break
            counts[t] = copies
            extend(t + 1, used + copies * sizes[t])
        counts[t] = 0

    extend(0, 0.0)
    configurations = [c for c in found if c.fits(instance, tol)]
    return sorted(configurations, key=lambda c: c.sort_key)


def configuration_lp(
    instance: BinPackInstance,
    feas_tol: Optional[float] = None,
    max_configurations: Optional[int] = None,
) -> Tuple[List[Configuration], ExplicitLp]:
    """Explicit configuration LP with one column per enumerated configuration."""
    configurations = enumerate_configurations(
        instance, feas_tol=feas_tol, max_configurations=max_configurations
    )
    lp = ExplicitLp.create(
        A=[[c.counts[i] for c in configurations] for i in range(instance.m)],
        b=list(instance.multiplicities),
        c=[1] * len(configurations),
    )
    return configurations, lp
