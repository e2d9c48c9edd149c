import numpy as np
import pytest  # type: ignore

from covlp.cov_lp import (
    cov_lp_solve,
    frac_cov_2,
    level_contains,
    make_point_find,
    make_product,
    width_bound_check,
)
from covlp.events import ProbeCompleted
from covlp.exceptions import (
    DomainViolation,
    InvalidUpperBound,
    IterationCapExceeded,
    OracleContractViolation,
)
from covlp.explicit import ExplicitCoveringLp
from covlp.oracles import CoveringOracleSuite
from covlp.params import SolveParams, bound_M
from covlp.vectors import SparseVec

SKEWED_R_STAR = 10 / 7


def _params(lp: ExplicitCoveringLp, eps: float, eta: float = 1.0, **kw) -> SolveParams:
    q, rho = lp.default_bounds()
    return SolveParams(eps=eps, eta=eta, q=q, rho=rho, **kw)


def test_width_bound_check():
    assert width_bound_check(2.0, 3.0, 1.0) == 3.0
    assert width_bound_check(2.0, 3.0, 2.0) == 3.0
    with pytest.raises(DomainViolation):
        width_bound_check(2.0, -1.0, 1.0)
    with pytest.raises(DomainViolation):
        width_bound_check(2.0, 3.0, 2.5)


def test_point_find_scales_chosen_column(skewed_lp):
    point_find = make_point_find(skewed_lp.suite(), 2.0)
    assert point_find(np.array([0.0, 1.0])) == SparseVec({1: 2.0})
    assert point_find(np.array([1.0, 0.0])) == SparseVec({0: 2.0})
    with pytest.raises(DomainViolation):
        make_point_find(skewed_lp.suite(), 0.0)


def test_point_find_rejects_nonpositive_cost(skewed_lp):
    suite = CoveringOracleSuite(
        rows=2,
        column=skewed_lp.column,
        cost=lambda j: 0.0,
        index_find=skewed_lp.index_find_exact,
        eta=1.0,
    )
    with pytest.raises(OracleContractViolation):
        make_point_find(suite, 1.0)(np.ones(2))


def test_product_sums_weighted_columns(skewed_lp):
    product = make_product(skewed_lp.suite())
    ax = product(SparseVec({0: 4 / 7, 1: 6 / 7}))
    assert ax == pytest.approx([1.0, 1.0])
    assert product(SparseVec()).tolist() == [0.0, 0.0]


def test_product_rejects_negative_column(skewed_lp):
    suite = CoveringOracleSuite(
        rows=2,
        column=lambda j: np.array([-1.0, 1.0]),
        cost=skewed_lp.cost,
        index_find=skewed_lp.index_find_exact,
        eta=1.0,
    )
    with pytest.raises(OracleContractViolation):
        make_product(suite)(SparseVec({0: 1.0}))


def test_level_contains(skewed_lp):
    contains = level_contains(skewed_lp.suite(), 1.5, 1e-9)
    assert contains(SparseVec({0: 1.0, 1: 0.5}))
    assert not contains(SparseVec({0: 1.0}))


def test_frac_cov_2_debug_run(skewed_lp):
    result = frac_cov_2(
        skewed_lp.suite(), skewed_lp.b, 1.5, 1.5, 1.0, 1.0, feas_tol=1e-9, debug=True
    )
    assert result.solution is not None
    assert result.solution.x.dot(skewed_lp.cost) == pytest.approx(1.5)
    assert np.all(result.solution.ax >= 0.5 * skewed_lp.b * (1 - 1e-9))


def test_cov_lp_solve_skewed(skewed_lp, recorder):
    eps = 1.0
    params = _params(skewed_lp, eps)
    assert params.q == pytest.approx(2.0)
    result = cov_lp_solve(skewed_lp.suite(), skewed_lp.b, params, monitor=recorder)

    assert result.mu == 0.5
    assert 0 < result.alpha < SKEWED_R_STAR <= result.objective * (1 + 1e-9)
    assert result.objective <= 3 * SKEWED_R_STAR * (1 + 1e-9)
    assert result.beta <= 1.5 * result.alpha
    assert result.objective == pytest.approx(result.beta / result.mu)
    assert np.all(result.ax_feasible >= skewed_lp.b * (1 - 1e-9))
    assert result.x_feasible.dot(skewed_lp.cost) == pytest.approx(result.objective)

    stats, counters = result.stats, result.counters
    assert stats.frac_cover_calls == stats.binary_search_iterations + 1
    assert stats.frac_cover_calls <= bound_M(eps, 1.0, params.q, SKEWED_R_STAR)
    assert counters.index_find == stats.point_find_calls
    assert counters.cost == counters.index_find
    assert counters.column == stats.product_support
    assert result.support <= stats.max_point_find_calls

    probes = recorder.of_type(ProbeCompleted)
    assert len(probes) == stats.frac_cover_calls
    assert probes[0].r == params.q and probes[0].satisfiable
    assert probes[-1].alpha == result.alpha and probes[-1].beta == result.beta


def test_cov_lp_solve_with_weak_oracle(skewed_lp):
    suite = skewed_lp.suite("degrade:0.5")
    assert suite.eta == 0.5
    params = _params(skewed_lp, 1.0, eta=suite.eta)
    result = cov_lp_solve(suite, skewed_lp.b, params)
    assert result.objective >= SKEWED_R_STAR * (1 - 1e-9)
    assert result.objective <= 6 * SKEWED_R_STAR * (1 + 1e-9)
    assert np.all(result.ax_feasible >= skewed_lp.b * (1 - 1e-9))


def test_identity_optimum_is_bracketed(identity_lp):
    result = cov_lp_solve(identity_lp.suite(), identity_lp.b, _params(identity_lp, 0.5))
    assert result.alpha < 2.0 <= result.objective * (1 + 1e-9)
    assert result.objective <= 1.75 * 2.0 * (1 + 1e-9)


def test_upper_bound_below_optimum(skewed_lp):
    params = SolveParams(eps=1.0, eta=1.0, q=0.5, rho=0.5)
    with pytest.raises(InvalidUpperBound):
        cov_lp_solve(skewed_lp.suite(), skewed_lp.b, params)


def test_oracle_weaker_than_declared():
    lp = ExplicitCoveringLp([[1.0, 0.01]], [1.0], [1.0, 1.0])
    suite = lp.suite("degrade:0.01", declared_eta=1.0)
    with pytest.raises(InvalidUpperBound):
        cov_lp_solve(suite, lp.b, _params(lp, 1.0))


def test_call_cap_is_enforced(skewed_lp):
    params = _params(skewed_lp, 1.0, max_oracle_calls=2)
    with pytest.raises(IterationCapExceeded):
        cov_lp_solve(skewed_lp.suite(), skewed_lp.b, params)


def test_debug_solve_matches_plain_solve(skewed_lp):
    plain = cov_lp_solve(skewed_lp.suite(), skewed_lp.b, _params(skewed_lp, 1.0))
    debug = cov_lp_solve(
        skewed_lp.suite(), skewed_lp.b, _params(skewed_lp, 1.0, debug=True)
    )
    assert debug.objective == plain.objective
    assert debug.x_feasible == plain.x_feasible
    assert debug.stats.point_find_calls == plain.stats.point_find_calls
