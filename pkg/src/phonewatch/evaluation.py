"""Cross-validation, accuracy metrics and period (time-window) voting."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, PhoneWatchError
from .features import FeatureVector
from .svm import KernelSpec, train

WITH_PHONE = 1
NO_PHONE = -1
DEFAULT_THRESHOLDS = (0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90)


@dataclass(frozen=True)
class Sample:
    frame_id: str
    features: FeatureVector
    label: int | None  # +1 with phone, -1 without, None unknown
    timestamp: float | None = None


@dataclass
class LabeledDataset:
    items: list = field(default_factory=list)

    def __len__(self):
        return len(self.items)

    @property
    def X(self) -> np.ndarray:
        return np.array([[s.features.ph, s.features.mi] for s in self.items], dtype=np.float64)

    @property
    def y(self) -> np.ndarray:
        return np.array([s.label for s in self.items], dtype=np.float64)

    def validate(self):
        labels = {s.label for s in self.items}
        if not {WITH_PHONE, NO_PHONE} <= labels:
            raise InvalidInputError("dataset needs both labels")


def kfold_split(y, k: int = 9, seed: int = 0) -> list[np.ndarray]:
    """Stratified folds: each class is shuffled and dealt round-robin.

    Dealing continues across classes, so total fold sizes also differ by at
    most one.
    """
    y = np.asarray(y)
    if k < 2:
        raise InvalidInputError("cross-validation needs at least 2 folds")
    classes = sorted(set(y.tolist()))
    if len(y) < k or any((y == c).sum() < k for c in classes):
        raise InvalidInputError(f"each class needs at least k={k} items")
    rng = np.random.default_rng(seed)
    buckets = [[] for _ in range(k)]
    slot = 0
    for c in classes:
        idx = np.flatnonzero(y == c)
        for i in rng.permutation(idx):
            buckets[slot % k].append(int(i))
            slot += 1
    return [np.array(sorted(b), dtype=int) for b in buckets]


@dataclass
class CVResult:
    mean: float
    fold_accuracies: list
    std: float
    failures: list  # (fold index, error message)


def accuracy(predicted, truth) -> float:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if truth.size == 0:
        return float("nan")
    return float((predicted == truth).mean())


def cross_validate(X, y, kernel: KernelSpec, nu: float, k: int = 9, seed: int = 0,
                   folds=None) -> CVResult:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    folds = kfold_split(y, k, seed) if folds is None else folds
    accs, failures = [], []
    for f, test in enumerate(folds):
        train_idx = np.setdiff1d(np.arange(len(y)), test)
        try:
            model = train(X[train_idx], y[train_idx], kernel, nu)
            accs.append(accuracy(model.predict(X[test]), y[test]))
        except PhoneWatchError as exc:
            accs.append(0.0)
            failures.append((f, str(exc)))
    std = float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0
    return CVResult(float(np.mean(accs)), accs, std, failures)


# -- period voting -------------------------------------------------------------


@dataclass(frozen=True)
class PeriodVerdict:
    period_index: int
    frames_in_period: int
    positives: int
    threshold: float

    @property
    def has_data(self) -> bool:
        return self.frames_in_period > 0

    @property
    def positive_fraction(self) -> float:
        if not self.frames_in_period:
            return float("nan")
        return self.positives / self.frames_in_period

    @property
    def decision(self) -> int | None:
        if not self.frames_in_period:
            return None
        # ">= threshold", compared on the correctly rounded ratio
        return WITH_PHONE if self.positive_fraction >= self.threshold else NO_PHONE


def period_index(timestamps, window: float = 3.0) -> np.ndarray:
    t = np.asarray(timestamps, dtype=np.float64)
    if t.size == 0:
        return np.zeros(0, dtype=int)
    return np.floor((t - t[0]) / window + 1e-9).astype(int)


def classify_period(verdicts, timestamps, window: float = 3.0,
                    threshold: float = 0.65) -> list[PeriodVerdict]:
    """Bucket frame verdicts into consecutive windows and vote.

    ``verdicts`` holds +1, -1 (or 0 for a frame on the boundary) per frame;
    ``None`` marks a frame without a usable face, which is not counted.
    Windows with no usable frames are returned with ``frames_in_period == 0``.
    """
    t = np.asarray(timestamps, dtype=np.float64)
    if len(verdicts) != t.size:
        raise InvalidInputError("verdicts and timestamps differ in length")
    if t.size and np.any(np.diff(t) < 0):
        raise InvalidInputError("timestamps must be non-decreasing")
    if t.size == 0:
        return []
    idx = period_index(t, window)
    n_periods = int(idx[-1]) + 1
    frames = np.zeros(n_periods, dtype=int)
    positives = np.zeros(n_periods, dtype=int)
    for p, v in zip(idx, verdicts):
        if v is None:
            continue
        frames[p] += 1
        positives[p] += v == WITH_PHONE
    return [PeriodVerdict(p, int(frames[p]), int(positives[p]), threshold)
            for p in range(n_periods)]


def ground_truth_periods(labels, timestamps, window: float = 3.0) -> list[int | None]:
    """Reference label per window: with phone when at least half its frames are."""
    votes = classify_period(list(labels), timestamps, window, threshold=0.5)
    return [v.decision for v in votes]


@dataclass(frozen=True)
class SweepRow:
    threshold: float
    acc_with: float
    acc_without: float
    acc_general: float
    n_with: int
    n_without: int


def period_accuracy(periods, truth) -> SweepRow:
    hits = {WITH_PHONE: 0, NO_PHONE: 0}
    totals = {WITH_PHONE: 0, NO_PHONE: 0}
    for verdict, ref in zip(periods, truth):
        if ref is None or not verdict.has_data:
            continue
        totals[ref] += 1
        hits[ref] += verdict.decision == ref
    ratio = lambda a, b: a / b if b else float("nan")
    threshold = periods[0].threshold if periods else float("nan")
    return SweepRow(threshold, ratio(hits[WITH_PHONE], totals[WITH_PHONE]),
                    ratio(hits[NO_PHONE], totals[NO_PHONE]),
                    ratio(sum(hits.values()), sum(totals.values())),
                    totals[WITH_PHONE], totals[NO_PHONE])


def threshold_sweep(verdicts, timestamps, truth, thresholds=DEFAULT_THRESHOLDS,
                    window: float = 3.0) -> list[SweepRow]:
    rows = []
    for th in thresholds:
        periods = classify_period(verdicts, timestamps, window, th)
        if len(truth) != len(periods):
            raise InvalidInputError("ground truth does not cover the same periods")
        rows.append(period_accuracy(periods, truth))
    return rows


# -- CSV output ------------------------------------------------------------------


def _num(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return repr(float(x))


def write_features_csv(path, dataset: LabeledDataset) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame_id", "timestamp", "ph", "mi", "label"])
        for s in dataset.items:
            w.writerow([s.frame_id, _num(s.timestamp), _num(s.features.ph),
                        _num(s.features.mi), "?" if s.label is None else s.label])


def write_verdicts_csv(path, periods) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period_index", "frames", "positive_fraction", "decision"])
        for v in periods:
            decision = {WITH_PHONE: "withPhone", NO_PHONE: "noPhone"}.get(v.decision, "nodata")
            w.writerow([v.period_index, v.frames_in_period, _num(v.positive_fraction), decision])


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["threshold", "acc_with", "acc_without", "acc_general"])
        for r in rows:
            w.writerow([_num(r.threshold), _num(r.acc_with), _num(r.acc_without),
                        _num(r.acc_general)])
