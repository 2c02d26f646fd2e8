"""Throttled, ordered stream processing with rolling status levels.

Frames are released at most ``fps`` per second, handed to a pool of
stateless workers, and re-assembled in input order before any aggregation.
Only the release times depend on the clock or the worker count; every value
written out depends on the frames alone.
"""
from __future__ import annotations

import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .errors import InvalidInputError
from .pipeline import OK, ManifestEntry, process_entry
from .segmentation import DEFAULT_FRACTION
from .svm import predict

GREEN = "green"
YELLOW = "yellow"
RED = "red"


@dataclass(frozen=True)
class StatusLevels:
    green_upper: float = 0.40
    red_lower: float = 0.65

    def __post_init__(self):
        if not 0.0 <= self.green_upper < self.red_lower <= 1.0:
            raise InvalidInputError(
                f"status boundaries must satisfy 0 <= green_upper < red_lower <= 1, "
                f"got {self.green_upper}, {self.red_lower}")

    def level(self, fraction: float) -> str:
        if fraction >= self.red_lower:
            return RED
        if fraction >= self.green_upper:
            return YELLOW
        return GREEN


class RealClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep_until(self, t: float) -> None:
        delay = t - time.monotonic()
        if delay > 0:
            time.sleep(delay)


class SimulatedClock:
    """Clock that jumps instead of sleeping."""

    def __init__(self, start: float = 0.0):
        self.t = start

    def now(self) -> float:
        return self.t

    def sleep_until(self, t: float) -> None:
        self.t = max(self.t, t)


@dataclass(frozen=True)
class StreamRecord:
    index: int
    frame_id: str
    timestamp: float
    verdict: int | None  # None: no usable face
    fraction: float  # positive fraction over the trailing window
    level: str
    released_at: float

    @property
    def alarm(self) -> bool:
        return self.level == RED

    def line(self) -> str:
        return f"{self.frame_id} {self.fraction:.4f} {self.level}"


def classify_entry(entry: ManifestEntry, model, base_dir, frac: float):
    """Worker job: frame -> +1 / -1, or None without a usable face."""
    result = process_entry(entry, base_dir, frac)
    if result.status != OK:
        return None
    return predict(model, result.features.as_array())


def run_stream(entries, model, *, base_dir=".", workers: int = 4, fps: float = 6.0,
               window: float = 3.0, levels: StatusLevels = StatusLevels(),
               frac: float = DEFAULT_FRACTION, clock=None, job=None):
    """Yield a :class:`StreamRecord` per entry, in input order.

    ``fps <= 0`` disables throttling.  Entries must carry timestamps in
    non-decreasing order; the rolling fraction covers usable frames with
    timestamps in ``(t - window, t]``.
    """
    if workers < 1:
        raise InvalidInputError("worker count must be positive")
    clock = clock or RealClock()
    job = job or (lambda e: classify_entry(e, model, base_dir, frac))
    recent: deque = deque()  # (timestamp, verdict) of usable frames in the window
    positives = 0
    last_ts = float("-inf")

    def aggregate(i, entry, released, future):
        nonlocal positives, last_ts
        verdict = future.result()
        t = float(entry.timestamp)
        if t < last_ts:
            raise InvalidInputError(f"timestamps go backwards at {entry.path}")
        last_ts = t
        if verdict is not None:
            recent.append((t, verdict))
            positives += verdict == 1
        while recent and recent[0][0] <= t - window:
            positives -= recent.popleft()[1] == 1
        fraction = positives / len(recent) if recent else 0.0
        return StreamRecord(i, entry.path, t, verdict, fraction, levels.level(fraction), released)

    pending: deque = deque()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        start = clock.now()
        for i, entry in enumerate(entries):
            if entry.timestamp is None:
                raise InvalidInputError(f"{entry.path}: streaming needs timestamps")
            if fps > 0:
                clock.sleep_until(start + i / fps)
            pending.append((i, entry, clock.now(), pool.submit(job, entry)))
            while len(pending) > 2 * workers:
                yield aggregate(*pending.popleft())
        while pending:
            yield aggregate(*pending.popleft())


def max_rate(release_times, span: float = 10.0) -> float:
    """Largest number of releases in any half-open ``span``-second interval, per second."""
    times = sorted(release_times)
    best = 0
    lo = 0
    for hi, t in enumerate(times):
        while times[lo] <= t - span:
            lo += 1
        best = max(best, hi - lo + 1)
    return best / span
