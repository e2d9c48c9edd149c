"""Solver parameters, derived constants and oracle-call bounds."""
import math
from fractions import Fraction
from typing import TYPE_CHECKING, NamedTuple, Optional

from pydantic import BaseModel, PositiveInt, confloat

from covlp.config import config_from_env
from covlp.exceptions import DomainViolation

if TYPE_CHECKING:
    unit_interval_type = float
    positive_type = float
    nonnegative_type = float
    tolerance_type = float
else:
    # Constrained types in pydantic currently raise an invalid type error from MyPy,
    # likely related to this issue:
    #   https://github.com/samuelcolvin/pydantic/issues/3080
    unit_interval_type = confloat(gt=0, le=1)
    positive_type = confloat(gt=0)
    nonnegative_type = confloat(ge=0)
    tolerance_type = confloat(ge=0, lt=1)


class SolveParams(BaseModel):
    """Inputs of a covering LP solve.

    Args:
        eps (float): accuracy in (0, 1].
        eta (float): weakness of the index-finding oracle in (0, 1].
        q (float): upper bound on the optimal objective.
        rho (float): upper bound on q * max A[i, j] / (b_i c_j).
        max_oracle_calls (int, optional): point-find cap per frac-cover run;
            defaults to COVLP_MAX_CALLS or a multiple of bound_U.
        feas_tol (float): relative feasibility tolerance.
        debug (bool): run extra invariant checks inside the solver.
    """

    eps: unit_interval_type
    eta: unit_interval_type
    q: positive_type
    rho: nonnegative_type
    max_oracle_calls: Optional[PositiveInt] = None
    feas_tol: tolerance_type = config_from_env.COVLP_FEAS_TOL
    debug: bool = False

    class Config:
        frozen = True

    def call_cap(self, m: int) -> int:
        """Point-find budget for one frac-cover run over m rows."""
        if self.max_oracle_calls:
            return self.max_oracle_calls
        if config_from_env.COVLP_MAX_CALLS:
            return config_from_env.COVLP_MAX_CALLS
        return config_from_env.COVLP_CALL_CAP_FACTOR * bound_U(
            m, self.rho, self.eps, self.eta
        )


class DerivedParams(NamedTuple):
    eps_sigma: float
    eps1: float
    eps2: float
    eps3: float
    eps_prime: float
    delta: float


def _check_unit_interval(name: str, value: float):
    if not 0 < value <= 1:
        raise DomainViolation(f"{name} must lie in (0, 1], received {value}")


def derived_params(eps: float, eta: float) -> DerivedParams:
    """Constants used by frac-cover and the binary search.

    The choice of eps2 makes eta = (1 - eps2)(1 + eps_sigma)/(1 - eps_sigma)
    hold with equality, and 1 - eps_prime = eta / (1 + eps).
    """
    _check_unit_interval("eps", eps)
    _check_unit_interval("eta", eta)
    eps_sigma = eps / (6 + 5 * eps)
    eps1 = eps3 = eps / 3
    eps2 = 1 - eta * (1 - eps_sigma) / (1 + eps_sigma)
    eps_prime = (eps1 + eps2 + eps3) / (1 + eps1 + eps3)
    delta = eps**2 / (1 + eps)
    return DerivedParams(eps_sigma, eps1, eps2, eps3, eps_prime, delta)


def ceil_log2(value: Fraction) -> int:
    """Smallest k >= 0 with 2**k >= value, computed exactly."""
    if value <= 1:
        return 0
    k = max(value.numerator.bit_length() - value.denominator.bit_length() - 1, 0)
    while Fraction(2) ** k < value:
        k += 1
    return k


def improve_cover_invocation_bound(m: int, eta: float) -> int:
    """At most ceil(lg(m / eta)) improve-cover calls per frac-cover run."""
    return ceil_log2(Fraction(m) / Fraction(eta))


def improve_cover_step_bound(
    m: int, rho: float, lambda0: float, eps: float
) -> int:
    """Bound on steps in one improve-cover call entered at lambda0."""
    eps_sigma, eps1, _, eps3, _, _ = derived_params(eps, 1.0)
    log_term = math.log(m) + (4 / eps1) * math.log(4 * m / eps1)
    return math.ceil(4 * rho / (3 * eps_sigma * eps3 * lambda0) * log_term)


def bound_U(m: int, rho: float, eps: float, eta: float) -> int:
    """Point-find calls allowed in one frac-cover run.

    U = m + ceil(lg(m/eta)) * ceil(312 m rho (1+eps) / (eta eps^3) * ln(12m/eps)).
    """
    if m < 1:
        raise DomainViolation(f"m must be positive, received {m}")
    if rho < 0:
        raise DomainViolation(f"rho must be nonnegative, received {rho}")
    _check_unit_interval("eps", eps)
    _check_unit_interval("eta", eta)
    invocations = improve_cover_invocation_bound(m, eta)
    if invocations == 0:
        return m
    per_invocation = math.ceil(
        312 * m * rho * (1 + eps) / (eta * eps**3) * math.log(12 * m / eps)
    )
    return m + invocations * per_invocation


def bound_M(eps: float, eta: float, q: float, r_star: float) -> float:
    """Frac-cover invocations allowed in one covering LP solve.

    M = 3 + 2 lg(1/eps + 1) + lg(1/eta) + lg(q / r_star).
    """
    _check_unit_interval("eps", eps)
    _check_unit_interval("eta", eta)
    if r_star <= 0:
        raise DomainViolation(f"r_star must be positive, received {r_star}")
    if q < r_star:
        raise DomainViolation(f"q={q} is below the optimum {r_star}")
    return (
        3
        + 2 * math.log2(1 / eps + 1)
        + math.log2(1 / eta)
        + math.log2(q / r_star)
    )
