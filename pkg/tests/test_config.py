import pytest

from delaygauge.core.config import get_settings


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def test_defaults(monkeypatch):
    monkeypatch.delenv("DELAYGAUGE_THREADS", raising=False)
    monkeypatch.delenv("DELAYGAUGE_LOG_LEVEL", raising=False)
    settings = get_settings()
    assert settings.runtime.threads == 1
    assert settings.integrator.interpolation_tol == 1e-9
    assert settings.reduction.ric_cap == 1_000_000
    assert settings.reservoir.t_skip == 5.0
    assert settings.reservoir.history_amplitude == 0.02
    assert settings.reservoir.consistency_threshold == 0.99


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("DELAYGAUGE_THREADS", "4")
    monkeypatch.setenv("DELAYGAUGE_LOG_LEVEL", "DEBUG")
    settings = get_settings()
    assert settings.runtime.threads == 4
    assert settings.runtime.log_level == "DEBUG"


def test_thread_count_is_at_least_one(monkeypatch):
    monkeypatch.setenv("DELAYGAUGE_THREADS", "0")
    assert get_settings().runtime.threads == 1


def test_settings_are_cached():
    assert get_settings() is get_settings()


def test_timed_logs_duration(caplog):
    import logging

    from delaygauge.core.logging import get_logger, timed

    with caplog.at_level(logging.INFO, logger="delaygauge"):
        with timed("enumeration", get_logger()):
            pass
        with pytest.raises(RuntimeError):
            with timed("failing run"):
                raise RuntimeError("boom")
    messages = [record.getMessage() for record in caplog.records]
    assert any(m.startswith("enumeration finished in") for m in messages)
    assert any(m.startswith("failing run finished in") for m in messages)
