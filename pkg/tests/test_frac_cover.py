import math

import numpy as np
import pytest  # type: ignore

from covlp.events import ImproveCoverExit
from covlp.exceptions import DomainViolation, IterationCapExceeded, WidthBoundViolated
from covlp.explicit import ExplicitCoveringLp
from covlp.frac_cover import (
    FcovContext,
    FcovState,
    Seed,
    check_c1,
    check_c2_surrogate,
    dual_weights,
    frac_cover,
    get_seed,
    improve_cover,
    lambda_of,
)
from covlp.params import bound_U, derived_params, improve_cover_invocation_bound
from covlp.vectors import SparseVec
from tests.instances import check_inner_loop_invariants, level_oracles

# Unit-row seeds pick columns 0 and 1, the balanced column 2 is better.
DETOUR_A = [[1.0, 0.0, 0.9], [0.0, 1.0, 0.9]]
DETOUR_RHO = 1.0


@pytest.fixture
def detour_lp() -> ExplicitCoveringLp:
    return ExplicitCoveringLp(DETOUR_A, [1.0, 1.0], [1.0, 1.0, 1.0])


def test_lambda_of_examples():
    assert lambda_of(np.array([2.0, 3.0]), np.array([1.0, 1.0])) == 2
    assert lambda_of(np.array([0.0, 5.0]), np.array([1.0, 1.0])) == 0
    assert lambda_of(np.array([3.0, 4.0]), np.array([2.0, 8.0])) == 0.5
    with pytest.raises(DomainViolation):
        lambda_of(np.array([1.0]), np.array([0.0]))


def test_dual_weights_examples():
    b = np.ones(3)
    weights = dual_weights(np.full(3, 0.7), b, 5.0)
    assert weights.scaled.tolist() == [1.0, 1.0, 1.0]
    assert weights.log_scale == pytest.approx(-3.5)
    assert weights.potential(b) == 3

    weights = dual_weights(np.array([1.0, 2.0]), np.ones(2), 1.0)
    assert weights.scaled == pytest.approx([1.0, math.exp(-1)])
    assert weights.log_scale == -1.0

    weights = dual_weights(np.array([3.0]), np.array([2.0]), 0.4)
    true_potential = weights.potential(np.array([2.0])) * math.exp(weights.log_scale)
    assert true_potential == pytest.approx(math.exp(-0.4 * 1.5))
    with pytest.raises(DomainViolation):
        dual_weights(np.ones(2), np.ones(2), 0.0)


def test_check_c1_examples():
    assert check_c1(1.5, 2.0, 3.0, 1e-3)
    assert not check_c1(1.0, 1.0, 1.5, 0.4)
    assert check_c1(1.0, 1.0, 1.5, 0.6)


def test_check_c2_surrogate_examples():
    _, _, eps2, eps3, _, _ = derived_params(1.0, 1.0)
    assert check_c2_surrogate(2.0, 2.0, 1.0, 1.0, eps2, eps3, 1.0)
    assert check_c2_surrogate(1.0, 1.0, 0.5, 1.0, 0.3, 0.1, 0.7)
    # y^T A x = 0 reduces to (1 - eps2) y^T A x_tilde / eta <= eps3 lambda y^T b
    assert check_c2_surrogate(0.0, 0.1, 1.0, 1.0, 0.5, 0.2, 1.0)
    assert not check_c2_surrogate(0.0, 0.5, 1.0, 1.0, 0.5, 0.2, 1.0)


def _context(lp: ExplicitCoveringLp, r: float, rho: float, eps: float = 1.0, **kw):
    return FcovContext.create(level_oracles(lp, r), lp.b, rho, eps, 1.0, **kw)


def test_get_seed_identity(identity_lp):
    context = _context(identity_lp, 1.0, 1.0)
    seed = get_seed(context)
    assert seed is not None
    assert seed.x == SparseVec({0: 0.5, 1: 0.5})
    assert seed.ax.tolist() == [0.5, 0.5]
    assert lambda_of(seed.ax, identity_lp.b) == 0.5
    assert context.stats.point_find_calls == 2


def test_get_seed_single_row(unit_lp):
    seed = get_seed(_context(unit_lp, 3.0, 3.0))
    assert seed is not None
    assert seed.x == SparseVec({0: 3.0})


def test_get_seed_detects_uncoverable_row():
    lp = ExplicitCoveringLp([[1.0, 0.0], [0.0, 0.1]], [1.0, 1.0], [1.0, 1.0])
    assert get_seed(_context(lp, 1.0, 1.0)) is None


def test_zero_width_is_unsatisfiable_without_calls(unit_lp):
    result = frac_cover(level_oracles(unit_lp, 1.0), unit_lp.b, 0.0, 1.0, 1.0)
    assert not result.satisfiable
    assert result.stats.point_find_calls == 0


def test_negative_width_rejected(unit_lp):
    with pytest.raises(DomainViolation):
        frac_cover(level_oracles(unit_lp, 1.0), unit_lp.b, -1.0, 1.0, 1.0)


def test_seed_already_covers(unit_lp):
    result = frac_cover(level_oracles(unit_lp, 1.0), unit_lp.b, 1.0, 1.0, 1.0)
    assert result.solution is not None
    assert result.solution.x == SparseVec({0: 1.0})
    assert result.stats.improve_cover_calls == 0
    assert result.stats.point_find_calls == 1


@pytest.mark.parametrize("eps,eta", [(1.0, 1.0), (0.5, 1.0), (1.0, 0.5)])
def test_uncoverable_instance_respects_contract(eps, eta):
    lp = ExplicitCoveringLp([[1.0]], [2.0], [1.0])
    result = frac_cover(level_oracles(lp, 1.0), lp.b, 0.5, eps, eta)
    if result.solution is not None:
        assert result.solution.ax[0] >= eta / (1 + eps) * 2 * (1 - 1e-9)
    else:
        assert result.stats.improve_cover_calls == 0


def test_improve_cover_succeeds_at_optimum():
    lp = ExplicitCoveringLp([[1.0]], [1.0], [1.0])
    context = _context(lp, 2.0, 2.0)
    seed = Seed(x=SparseVec({0: 2.0}), ax=np.array([2.0]))
    state, success = improve_cover(FcovState.from_seed(seed, lp.b), context)
    assert success
    assert state.lam == 2.0
    assert context.stats.steps == 0
    assert context.stats.point_find_calls == 1


def test_improve_cover_calls_point_find_once_per_step(detour_lp):
    context = _context(detour_lp, 1.0, 1.0)
    state = FcovState.from_seed(get_seed(context), detour_lp.b)
    assert state.lam == pytest.approx(0.5)
    calls = context.stats.point_find_calls
    state, success = improve_cover(state, context)
    assert success
    assert context.stats.steps > 0
    assert context.stats.point_find_calls - calls == context.stats.steps + 1
    assert state.x().dot(detour_lp.cost) == pytest.approx(1.0)


def test_invariants_hold_every_iteration(detour_lp, recorder):
    result = frac_cover(
        level_oracles(detour_lp, 1.0),
        detour_lp.b,
        DETOUR_RHO,
        1.0,
        1.0,
        debug=True,
        monitor=recorder,
    )
    assert any(event.stepped for run in recorder.improve_cover_runs() for event in run)
    assert recorder.of_type(ImproveCoverExit)
    check_inner_loop_invariants(recorder, detour_lp.rows, 1.0)
    assert result.stats.max_residual <= 1e-9


def test_call_accounting(detour_lp):
    eps = 1.0
    result = frac_cover(
        level_oracles(detour_lp, 1.0), detour_lp.b, DETOUR_RHO, eps, 1.0
    )
    stats = result.stats
    m = detour_lp.rows
    assert stats.improve_cover_calls <= improve_cover_invocation_bound(m, 1.0)
    assert stats.point_find_calls <= bound_U(m, DETOUR_RHO, eps, 1.0)
    assert stats.point_find_calls == m + stats.steps + stats.improve_cover_calls
    assert result.solution is not None
    x = result.solution.x
    assert len(x) <= stats.point_find_calls
    dense = np.array([x.get(j) for j in range(detour_lp.columns)])
    assert result.solution.ax == pytest.approx(detour_lp.A @ dense)
    assert x.dot(detour_lp.cost) == pytest.approx(1.0)
    assert result.solution.lam >= 0.5 * (1 - 1e-9)


def test_solution_covers_scaled_rhs(skewed_lp):
    eps = 0.5
    result = frac_cover(level_oracles(skewed_lp, 1.5), skewed_lp.b, 1.5, eps, 1.0)
    assert result.solution is not None
    assert np.all(result.solution.ax >= skewed_lp.b / (1 + eps) * (1 - 1e-9))


def test_iteration_cap(detour_lp):
    with pytest.raises(IterationCapExceeded):
        frac_cover(
            level_oracles(detour_lp, 1.0),
            detour_lp.b,
            DETOUR_RHO,
            1.0,
            1.0,
            max_calls=3,
        )


def test_width_violation_detected(skewed_lp):
    with pytest.raises(WidthBoundViolated):
        frac_cover(level_oracles(skewed_lp, 1.2), skewed_lp.b, 0.5, 1.0, 1.0)


def test_residual_is_relative_to_each_row():
    lp = ExplicitCoveringLp([[1.0, 0.0], [0.0, 1e-6]], [1.0, 1.0], [1.0, 1.0])
    context = _context(lp, 1.0, 1.0)
    x = SparseVec({0: 1.0, 1: 1.0})
    state = FcovState(gamma=1.0, base=x, ax=np.array([1.0, 1e-6]), lam=1e-6)
    assert context.residual(state) == 0

    state.ax = np.array([1.0, 1e-6 * (1 + 1e-5)])
    assert context.residual(state) == pytest.approx(1e-5)
