import pytest

from app.config import Settings
from common.utils.pool import batch_ranges, merge_sums, run_batches
from common.utils.streams import stream_rng


def test_defaults():
    settings = Settings(_env_file=None)
    assert settings.THREADS == 1
    assert settings.MAX_QUBITS == 10
    settings.validate_required()


def test_environment_prefix(monkeypatch):
    monkeypatch.setenv("ENTPERC_THREADS", "3")
    monkeypatch.setenv("ENTPERC_LOG_LEVEL", "DEBUG")
    settings = Settings(_env_file=None)
    assert settings.THREADS == 3
    assert settings.LOG_LEVEL == "DEBUG"


def test_resolve_workers(monkeypatch):
    monkeypatch.setenv("ENTPERC_THREADS", "4")
    settings = Settings(_env_file=None)
    assert settings.resolve_workers() == 4
    assert settings.resolve_workers(2) == 2
    assert settings.resolve_workers(0) == 1


def test_validate_collects_every_error(monkeypatch):
    monkeypatch.setenv("ENTPERC_THREADS", "0")
    monkeypatch.setenv("ENTPERC_MAX_QUBITS", "20")
    with pytest.raises(ValueError) as excinfo:
        Settings(_env_file=None).validate_required()
    message = str(excinfo.value)
    assert "THREADS must be at least 1" in message
    assert "MAX_QUBITS must lie in 1..12" in message


def test_bad_log_level(monkeypatch, capsys):
    import cli

    monkeypatch.setattr(cli.settings, "LOG_LEVEL", "LOUD")
    assert cli.main(["distill"]) == 1


# =============================================================================
# Streams and pool
# =============================================================================


def test_streams_are_independent_and_reproducible():
    first = stream_rng(7, "percolation", 0).random(4)
    again = stream_rng(7, "percolation", 0).random(4)
    other_index = stream_rng(7, "percolation", 1).random(4)
    other_module = stream_rng(7, "routing.ghz", 0).random(4)
    assert first.tolist() == again.tolist()
    assert first.tolist() != other_index.tolist()
    assert first.tolist() != other_module.tolist()


def test_batch_ranges_cover_trials():
    assert batch_ranges(130, 64) == [(0, 64), (64, 128), (128, 130)]


def _range_sum(task):
    start, stop = task
    return (float(sum(range(start, stop))), float(stop - start))


def test_run_batches_keeps_task_order():
    tasks = batch_ranges(200, 64)
    single = merge_sums(run_batches(_range_sum, tasks, workers=1))
    pooled = merge_sums(run_batches(_range_sum, tasks, workers=2))
    assert single == pooled == [float(sum(range(200))), 200.0]
