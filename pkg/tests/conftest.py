import numpy as np
import pytest  # type: ignore

from covlp.explicit import ExplicitCoveringLp
from tests.instances import EventRecorder

# r* = 10 / 7 with x* = (4/7, 6/7)
SKEWED_A = [[1.0, 0.5], [0.25, 1.0]]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def recorder() -> EventRecorder:
    return EventRecorder()


@pytest.fixture
def unit_lp() -> ExplicitCoveringLp:
    return ExplicitCoveringLp([[1.0]], [1.0], [1.0])


@pytest.fixture
def identity_lp() -> ExplicitCoveringLp:
    return ExplicitCoveringLp(np.eye(2), [1.0, 1.0], [1.0, 1.0])


@pytest.fixture
def skewed_lp() -> ExplicitCoveringLp:
    return ExplicitCoveringLp(SKEWED_A, [1.0, 1.0], [1.0, 1.0])
