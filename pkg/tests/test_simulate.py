import numpy as np
import pytest

from qcmce.decoders import BfConfig
from qcmce.errors import ValidationError
from qcmce.simulate import ExperimentSpec, error_patterns, measure_capability, run_experiment, run_point, worker_count


def test_error_patterns_exact_weight():
    e = error_patterns(300, 17, 50, np.random.default_rng(0))
    assert e.shape == (50, 300) and (e.sum(axis=1) == 17).all()
    assert not error_patterns(300, 0, 4, np.random.default_rng(0)).any()


def test_error_patterns_uniform_positions():
    e = error_patterns(40, 4, 20000, np.random.default_rng(1))
    freq = e.mean(axis=0)
    assert np.allclose(freq, 0.1, atol=0.01)


def test_zero_errors_never_fail(toy_h):
    for dec in ("bf", "spa"):
        r = run_point(toy_h, dec, 0, 30, np.random.default_rng(0), BfConfig((2, 2, 2, 2)))
        assert r.frame_errors == 0 and r.bit_errors == 0


def test_unknown_decoder(toy_h):
    with pytest.raises(ValidationError):
        run_point(toy_h, "ml", 1, 1, np.random.default_rng(0))
    with pytest.raises(ValidationError):
        ExperimentSpec(64, ((3, 3),), (1,), decoders=("ml",))


def test_reproducible_across_thread_counts(monkeypatch):
    spec = ExperimentSpec(64, ((3, 3, 3, 3), (2, 4, 3, 3)), (4, 8), trials=60, seed=5)
    monkeypatch.setenv("QCMCE_THREADS", "1")
    one = run_experiment(spec)
    monkeypatch.setenv("QCMCE_THREADS", "4")
    four = run_experiment(spec)
    assert one == four and len(one) == 8


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("QCMCE_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("QCMCE_THREADS", "lots")
    with pytest.raises(ValidationError):
        worker_count()


def test_measure_capability(toy_h):
    bf = BfConfig((2, 2, 2, 2))
    cap = measure_capability(toy_h, bf, 50, seed=0, max_weight=30)
    assert 1 <= cap < 30
    rng = np.random.default_rng(np.random.SeedSequence([0, 2, cap + 1]))
    assert run_point(toy_h, "bf", cap + 1, 50, rng, bf).frame_errors > 0
    loose = measure_capability(toy_h, bf, 50, seed=0, max_weight=30, max_fer=0.2)
    assert loose >= cap
