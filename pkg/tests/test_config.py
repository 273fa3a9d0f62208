import pytest

from src.config import _Settings


def test_defaults() -> None:
    settings = _Settings()
    assert settings.oracle.heap_bound > 0
    assert settings.solver.workers >= 1


def test_nested_environment_override(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("SL_ENTAIL_ORACLE__HEAP_BOUND", "7")
    monkeypatch.setenv("SL_ENTAIL_SOLVER__WORKERS", "3")
    settings = _Settings()
    assert settings.oracle.heap_bound == 7
    assert settings.solver.workers == 3
