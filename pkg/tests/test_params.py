import itertools
from decimal import Decimal, getcontext
from fractions import Fraction

import pytest  # type: ignore
from pydantic import ValidationError

from covlp.exceptions import DomainViolation
from covlp.params import (
    SolveParams,
    bound_M,
    bound_U,
    ceil_log2,
    derived_params,
    improve_cover_invocation_bound,
)

GRID = [k / 10 for k in range(1, 11)]


def test_derived_params_at_one():
    eps_sigma, eps1, eps2, eps3, eps_prime, delta = derived_params(1.0, 1.0)
    assert eps_sigma == pytest.approx(1 / 11)
    assert eps1 == eps3 == pytest.approx(1 / 3)
    assert eps2 == pytest.approx(1 / 6)
    assert delta == pytest.approx(1 / 2)
    assert 1 - eps_prime == pytest.approx(1 / 2)


def test_derived_params_examples():
    derived = derived_params(1 / 3, 1.0)
    assert derived.delta == pytest.approx(1 / 12)
    assert 1 - derived.eps_prime == pytest.approx(3 / 4)
    assert 1 - derived_params(0.5, 0.5).eps_prime == pytest.approx(1 / 3)


@pytest.mark.parametrize("eps,eta", list(itertools.product(GRID, GRID)))
def test_eps_prime_matches_eta_over_one_plus_eps(eps, eta):
    derived = derived_params(eps, eta)
    expected = eta / (1 + eps)
    assert abs((1 - derived.eps_prime) - expected) <= 1e-12 * expected


@pytest.mark.parametrize("eps,eta", list(itertools.product(GRID, GRID)))
def test_eta_identity_is_exact_in_rationals(eps, eta):
    eps, eta = Fraction(eps), Fraction(eta)
    eps_sigma = eps / (6 + 5 * eps)
    eps2 = 1 - eta * (1 - eps_sigma) / (1 + eps_sigma)
    assert (1 - eps2) * (1 + eps_sigma) / (1 - eps_sigma) == eta
    eps1 = eps3 = eps / 3
    eps_prime = (eps1 + eps2 + eps3) / (1 + eps1 + eps3)
    assert 1 - eps_prime == eta / (1 + eps)


@pytest.mark.parametrize("eps,eta", [(0, 1), (1, 0), (1.5, 1), (1, -0.1)])
def test_derived_params_domain(eps, eta):
    with pytest.raises(DomainViolation):
        derived_params(eps, eta)


def test_ceil_log2_is_exact():
    assert ceil_log2(Fraction(1)) == 0
    assert ceil_log2(Fraction(4)) == 2
    assert ceil_log2(Fraction(5)) == 3
    assert ceil_log2(Fraction(1, 3)) == 0
    assert ceil_log2(Fraction(2**60 + 1)) == 61
    assert improve_cover_invocation_bound(4, 0.5) == 3


def test_bound_U_examples():
    assert bound_U(1, 7.0, 0.3, 1.0) == 1
    assert bound_U(1, 0.0, 1.0, 1.0) == 1
    assert bound_U(2, 1.0, 1.0, 1.0) == 3969


def test_bound_U_is_monotone():
    values = [bound_U(m, 2.0, 0.5, 0.5) for m in range(1, 8)]
    assert values == sorted(values)
    values = [bound_U(4, rho, 0.5, 0.5) for rho in (0.0, 0.5, 1.0, 4.0, 16.0)]
    assert values == sorted(values)


def _decimal_bound_U(m, rho, eps, eta) -> int:
    getcontext().prec = 60
    invocations = 0
    while Fraction(2) ** invocations * Fraction(eta) < m:
        invocations += 1
    if invocations == 0:
        return m
    eps_d, eta_d, rho_d = Decimal(eps), Decimal(eta), Decimal(rho)
    log_term = (Decimal(12 * m) / eps_d).ln()
    value = 312 * m * rho_d * (1 + eps_d) / (eta_d * eps_d**3) * log_term
    per_invocation = int(value.to_integral_value(rounding="ROUND_CEILING"))
    return m + invocations * per_invocation


def _decimal_bound_M(eps, eta, q, r_star) -> Decimal:
    getcontext().prec = 60
    ln2 = Decimal(2).ln()
    eps_d, eta_d = Decimal(eps), Decimal(eta)
    return (
        3
        + 2 * (1 / eps_d + 1).ln() / ln2
        + (1 / eta_d).ln() / ln2
        + (Decimal(q) / Decimal(r_star)).ln() / ln2
    )


BOUND_GRID = list(
    itertools.product(
        [1, 2, 5, 8, 13],
        [0.5, 3.0],
        [(1.0, 1.0), (0.5, 0.5), (0.25, 1.0), (0.1, 0.2), (0.05, 0.9)],
    )
)


@pytest.mark.parametrize("m,rho,eps_eta", BOUND_GRID)
def test_bound_U_matches_arbitrary_precision(m, rho, eps_eta):
    eps, eta = eps_eta
    assert bound_U(m, rho, eps, eta) == _decimal_bound_U(m, rho, eps, eta)


def test_bound_U_reference_point():
    assert bound_U(4, 4.0, 0.5, 0.5) == _decimal_bound_U(4, 4.0, 0.5, 0.5)


@pytest.mark.parametrize("m,rho,eps_eta", BOUND_GRID)
def test_bound_M_matches_arbitrary_precision(m, rho, eps_eta):
    eps, eta = eps_eta
    q, r_star = float(m) * rho, rho
    expected = _decimal_bound_M(eps, eta, q, r_star)
    assert bound_M(eps, eta, q, r_star) == pytest.approx(float(expected), rel=1e-12)


def test_bound_M_examples():
    assert bound_M(1.0, 1.0, 2.0, 2.0) == pytest.approx(5)
    assert bound_M(1.0, 0.5, 2.0, 1.0) == pytest.approx(7)
    assert bound_M(1 / 3, 1.0, 1.0, 1.0) == pytest.approx(7)


def test_bound_M_rejects_q_below_optimum():
    with pytest.raises(DomainViolation):
        bound_M(1.0, 1.0, 1.0, 2.0)


def test_solve_params_validation():
    params = SolveParams(eps=0.5, eta=1.0, q=3.0, rho=6.0)
    assert params.feas_tol == 1e-9
    assert params.call_cap(2) == 10 * bound_U(2, 6.0, 0.5, 1.0)
    capped = SolveParams(eps=0.5, eta=1.0, q=3.0, rho=6.0, max_oracle_calls=7)
    assert capped.call_cap(2) == 7
    with pytest.raises(ValidationError):
        SolveParams(eps=0.0, eta=1.0, q=1.0, rho=1.0)
    with pytest.raises(ValidationError):
        SolveParams(eps=0.5, eta=1.0, q=-1.0, rho=1.0)
