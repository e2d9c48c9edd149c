import pytest  # type: ignore
from pydantic import ValidationError

from covlp.events import ImproveCoverExit, ProbeCompleted


def test_events_are_frozen():
    event = ImproveCoverExit(success=True, lam=1.0, lambda0=0.5, steps=3)
    assert event.residual is None
    with pytest.raises(TypeError):
        event.steps = 4


def test_events_compare_by_value():
    first = ProbeCompleted(
        r=2.0,
        satisfiable=True,
        alpha=0.0,
        beta=2.0,
        point_find_calls=2,
        improve_cover_calls=0,
        support=2,
    )
    assert first == ProbeCompleted(**first.dict())
    assert first != first.copy(update={"r": 1.0})


def test_events_validate_fields():
    with pytest.raises(ValidationError):
        ImproveCoverExit(success=True, lam="high", lambda0=0.5, steps=3)
