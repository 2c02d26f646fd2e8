import threading
import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from phonewatch.errors import InvalidInputError
from phonewatch.pipeline import ManifestEntry
from phonewatch.streaming import (GREEN, RED, YELLOW, RealClock, SimulatedClock, StatusLevels,
                                  max_rate, run_stream)


def entries(n, dt=0.1):
    return [ManifestEntry(f"f{i}", [], 1, i * dt) for i in range(n)]


def by_table(table, delay=0.0):
    def job(entry):
        if delay:
            time.sleep(delay * (hash(entry.path) % 3))
        return table[entry.path]
    return job


def test_levels():
    lv = StatusLevels()
    assert lv.level(0.0) == GREEN and lv.level(0.39) == GREEN
    assert lv.level(0.40) == YELLOW and lv.level(0.50) == YELLOW and lv.level(0.6499) == YELLOW
    assert lv.level(0.65) == RED and lv.level(0.70) == RED and lv.level(1.0) == RED
    for bad in ((0.65, 0.40), (-0.1, 0.5), (0.4, 1.2), (0.5, 0.5)):
        with pytest.raises(InvalidInputError):
            StatusLevels(*bad)


def test_all_negative_stays_green():
    es = entries(50)
    recs = list(run_stream(es, None, job=lambda e: -1, clock=SimulatedClock()))
    assert {r.level for r in recs} == {GREEN}
    assert not any(r.alarm for r in recs)


def test_rolling_window_fraction():
    # 8 frames per second (exact in binary), verdicts +1 from frame 20 on
    es = entries(60, dt=0.125)
    table = {e.path: (1 if i >= 20 else -1) for i, e in enumerate(es)}
    table["f25"] = None
    recs = list(run_stream(es, None, job=by_table(table), clock=SimulatedClock(), window=3.0))
    # window (0.625, 3.625] holds frames 6..29: 23 usable, 9 positive
    assert recs[29].fraction == 9 / 23 and recs[29].level == GREEN
    assert recs[29].line() == "f29 0.3913 green"
    # frames 8..31: 11 of 23
    assert recs[31].fraction == 11 / 23 and recs[31].level == YELLOW
    # frames 13..36: 16 of 23
    assert recs[36].fraction == 16 / 23 and recs[36].level == RED and recs[36].alarm
    assert recs[25].verdict is None
    assert recs[0].fraction == 0.0


@given(st.lists(st.sampled_from([1, -1, None]), min_size=1, max_size=60), st.integers(1, 6))
def test_order_and_worker_independence(verdicts, workers):
    es = entries(len(verdicts), dt=0.25)
    table = {e.path: v for e, v in zip(es, verdicts)}
    one = [r.line() for r in run_stream(es, None, job=by_table(table), workers=1,
                                        clock=SimulatedClock())]
    many = list(run_stream(es, None, job=by_table(table, delay=0.0005), workers=workers,
                           clock=SimulatedClock()))
    assert [r.line() for r in many] == one
    assert [r.index for r in many] == list(range(len(verdicts)))


def test_throttle_simulated():
    es = entries(200, dt=1 / 15)
    clock = SimulatedClock()
    recs = list(run_stream(es, None, job=lambda e: 1, fps=6.0, clock=clock))
    times = [r.released_at for r in recs]
    assert max_rate(times, 10.0) <= 6.0 * 1.05
    assert times[-1] == pytest.approx(199 / 6.0)


def test_throttle_real_clock():
    es = entries(13)
    t0 = time.monotonic()
    recs = list(run_stream(es, None, job=lambda e: 1, fps=20.0, clock=RealClock(), workers=2))
    elapsed = time.monotonic() - t0
    assert elapsed >= 12 / 20.0 - 0.01
    gaps = np.diff([r.released_at for r in recs])
    assert gaps.min() >= 1 / 20.0 - 0.005


def test_workers_run_concurrently():
    seen = set()
    lock = threading.Lock()

    def job(e):
        with lock:
            seen.add(threading.get_ident())
        time.sleep(0.01)
        return 1

    list(run_stream(entries(20), None, job=job, fps=0, workers=4, clock=SimulatedClock()))
    assert len(seen) > 1


def test_stream_validation():
    with pytest.raises(InvalidInputError):
        list(run_stream(entries(3), None, job=lambda e: 1, workers=0))
    missing = [ManifestEntry("x", [], 1, None)]
    with pytest.raises(InvalidInputError):
        list(run_stream(missing, None, job=lambda e: 1, clock=SimulatedClock()))
    backwards = [ManifestEntry("a", [], 1, 1.0), ManifestEntry("b", [], 1, 0.5)]
    with pytest.raises(InvalidInputError):
        list(run_stream(backwards, None, job=lambda e: 1, clock=SimulatedClock()))


def test_max_rate():
    assert max_rate([0, 1, 2, 3], 10.0) == 0.4
    assert max_rate([i / 8 for i in range(160)], 10.0) == 8.0
