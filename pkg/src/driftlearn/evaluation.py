"""Prequential evaluation: kappa metrics, the run engine, and rank tests.

Models are evaluated test-then-train: every instance is predicted first and
only then (possibly) used for training, with the ordering enforced here so
no learner sees a label before it has committed to a prediction.  Chance-
corrected agreement (Cohen's kappa) is the headline metric, tracked
globally, over a fixed sliding window, or over an adaptive window sized by
a change detector on the 0/1 correctness signal.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .adwin import AdwinEstimator
from .core import ContractError


class BudgetLawError(AssertionError):
    """Realized label spending exceeded budget + 1/seen at some prefix."""


class ConfusionMatrix:
    """Square count matrix, rows = true class, columns = predicted class."""

    def __init__(self, class_count: int):
        if class_count < 2:
            raise ContractError("need at least two classes")
        self.class_count = class_count
        self.counts = np.zeros((class_count, class_count), dtype=np.int64)
        self.total = 0

    def add(self, true_label: int, predicted: int) -> None:
        self.counts[true_label, predicted] += 1
        self.total += 1

    def remove(self, true_label: int, predicted: int) -> None:
        if self.counts[true_label, predicted] <= 0:
            raise ContractError("removing a pair that was never added")
        self.counts[true_label, predicted] -= 1
        self.total -= 1

    def accuracy(self) -> float:
        if self.total == 0:
            return 0.0
        return float(np.trace(self.counts)) / self.total

    def kappa(self) -> float:
        """Cohen's kappa; 0 when empty or when chance agreement is total."""
        n = self.total
        if n == 0:
            return 0.0
        observed = float(np.trace(self.counts)) / n
        row = self.counts.sum(axis=1)
        col = self.counts.sum(axis=0)
        expected = float(row @ col) / (n * n)
        if expected >= 1.0:
            return 0.0
        return (observed - expected) / (1.0 - expected)


class GlobalKappa:
    """Kappa over everything seen so far."""

    def __init__(self, class_count: int):
        self.confusion = ConfusionMatrix(class_count)

    def add(self, true_label: int, predicted: int) -> None:
        self.confusion.add(true_label, predicted)

    def kappa(self) -> float:
        return self.confusion.kappa()


class SlidingKappa:
    """Kappa over the most recent fixed-width window of predictions."""

    def __init__(self, class_count: int, width: int):
        if width < 1:
            raise ContractError(f"width must be >= 1, got {width}")
        self.width = width
        self.confusion = ConfusionMatrix(class_count)
        self._pairs: deque[tuple[int, int]] = deque()

    def add(self, true_label: int, predicted: int) -> None:
        self._pairs.append((true_label, predicted))
        self.confusion.add(true_label, predicted)
        if len(self._pairs) > self.width:
            old_true, old_pred = self._pairs.popleft()
            self.confusion.remove(old_true, old_pred)

    def kappa(self) -> float:
        return self.confusion.kappa()


class AdaptiveKappa:
    """Kappa over a window sized by a change detector on correctness.

    The detector shrinks its window when the accuracy level shifts; the
    confusion matrix is trimmed to the detector's current width so the
    reported kappa reflects only the post-change regime.
    """

    def __init__(self, class_count: int, delta: float = 0.002):
        self.detector = AdwinEstimator(delta)
        self.confusion = ConfusionMatrix(class_count)
        self._pairs: deque[tuple[int, int]] = deque()

    def add(self, true_label: int, predicted: int) -> None:
        self._pairs.append((true_label, predicted))
        self.confusion.add(true_label, predicted)
        self.detector.update(1.0 if true_label == predicted else 0.0)
        while len(self._pairs) > self.detector.width:
            old_true, old_pred = self._pairs.popleft()
            self.confusion.remove(old_true, old_pred)

    def kappa(self) -> float:
        return self.confusion.kappa()


@dataclass
class RunReport:
    """Outcome of one test-then-train pass over a stream."""

    instances: int
    labeled: int
    spending: float
    global_kappa: float
    accuracy: float
    update_count: int
    elapsed_ms: float
    confusion: np.ndarray
    series: list[tuple[int, float]] = field(default_factory=list)
    elevations: list = field(default_factory=list)


def run_test_then_train(
    model, stream, *, series_tracker=None, series_stride: int = 1000, observer=None
) -> RunReport:
    """Drive a model over a stream, predicting before every train step.

    The model must expose process(instance, oracle) -> StepOutcome and a
    budget_tracker; the budget law spending <= B + 1/seen is asserted after
    every instance.  When a series tracker is given, (instances_seen, kappa)
    points are recorded every series_stride instances.  An observer, when
    given, sees every (labeled, model) pair after the step completes, e.g.
    for full-label shadow evaluation of ensemble slots.
    """
    if model.class_count != stream.class_count:
        raise ContractError("model and stream disagree on class count")
    tracker = model.budget_tracker
    accumulator = GlobalKappa(stream.class_count)
    series: list[tuple[int, float]] = []
    seen = 0
    started = time.perf_counter()
    for labeled in stream:
        outcome = model.process(labeled.instance, lambda _inst, _y=labeled.label: _y)
        seen += 1
        true_label = labeled.label
        accumulator.add(true_label, outcome.predicted)
        if series_tracker is not None:
            series_tracker.add(true_label, outcome.predicted)
            if seen % series_stride == 0:
                series.append((seen, series_tracker.kappa()))
        if observer is not None:
            observer.observe(labeled, model)
        if tracker.spending > tracker.budget + 1.0 / tracker.seen + 1e-12:
            raise BudgetLawError(
                f"spending {tracker.spending:.6f} exceeds budget {tracker.budget} "
                f"+ 1/{tracker.seen} at instance {seen}"
            )
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return RunReport(
        instances=seen,
        labeled=tracker.labeled,
        spending=tracker.spending,
        global_kappa=accumulator.kappa(),
        accuracy=accumulator.confusion.accuracy(),
        update_count=getattr(model, "update_count", 0),
        elapsed_ms=elapsed_ms,
        confusion=accumulator.confusion.counts.copy(),
        series=series,
        elevations=list(getattr(model, "elevation_events", [])),
    )


def prequential_series(
    model,
    stream,
    *,
    window: int = 1000,
    stride: int = 1000,
    adaptive: bool = False,
    delta: float = 0.002,
) -> list[tuple[int, float]]:
    """Windowed kappa sampled every ``stride`` instances along the run."""
    if adaptive:
        tracker = AdaptiveKappa(stream.class_count, delta)
    else:
        tracker = SlidingKappa(stream.class_count, window)
    report = run_test_then_train(model, stream, series_tracker=tracker, series_stride=stride)
    return report.series


@dataclass(frozen=True)
class SegmentAverages:
    """Mean kappa inside and outside drift intervals; None when absent."""

    stable: float | None
    drift: float | None
    balanced: float | None


def segment_average(
    series: Sequence[tuple[int, float]], schedule: Sequence[tuple[int, int]]
) -> SegmentAverages:
    """Split a kappa series into drift neighborhoods and stable spans.

    A point at time t belongs to the drift partition when t lies within
    center +/- width of any scheduled drift.  The balanced average weighs
    both partitions equally; with one partition empty it equals the other.
    """
    stable_vals: list[float] = []
    drift_vals: list[float] = []
    for t, value in series:
        in_drift = any(center - width <= t <= center + width for center, width in schedule)
        (drift_vals if in_drift else stable_vals).append(value)
    stable = sum(stable_vals) / len(stable_vals) if stable_vals else None
    drift = sum(drift_vals) / len(drift_vals) if drift_vals else None
    if stable is None and drift is None:
        balanced = None
    elif stable is None:
        balanced = drift
    elif drift is None:
        balanced = stable
    else:
        balanced = 0.5 * (stable + drift)
    return SegmentAverages(stable, drift, balanced)


def _ranks_desc(values: Sequence[float]) -> list[float]:
    """Competition ranks (1 = best = largest), ties averaged."""
    order = sorted(range(len(values)), key=lambda i: -values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


@dataclass(frozen=True)
class RankSummary:
    average_ranks: dict[str, float]
    critical_difference: float
    friedman_statistic: float
    control: str
    significantly_different: dict[str, bool]


def friedman_bonferroni_dunn(
    scores: dict[str, Sequence[float]], control: str, alpha: float = 0.05
) -> RankSummary:
    """Average ranks over datasets plus Bonferroni-Dunn comparisons.

    Each method needs one score per dataset (higher is better).  The
    critical difference is q_alpha * sqrt(M (M+1) / (6 N)) where q_alpha is
    the two-sided normal critical value at alpha / (M - 1), i.e. the
    published Bonferroni-Dunn value for M - 1 comparisons against a control.
    """
    methods = list(scores)
    if control not in scores:
        raise ContractError(f"control {control!r} not among methods")
    n_datasets = len(scores[control])
    if n_datasets < 1 or any(len(scores[m]) != n_datasets for m in methods):
        raise ContractError("every method needs the same positive number of scores")
    m_methods = len(methods)
    if m_methods < 2:
        raise ContractError("need at least two methods to rank")
    rank_sums = {m: 0.0 for m in methods}
    for d in range(n_datasets):
        row = [float(scores[m][d]) for m in methods]
        for m, r in zip(methods, _ranks_desc(row)):
            rank_sums[m] += r
    average = {m: rank_sums[m] / n_datasets for m in methods}
    sum_sq = sum(r * r for r in average.values())
    friedman = (
        12.0 * n_datasets / (m_methods * (m_methods + 1))
        * (sum_sq - m_methods * (m_methods + 1) ** 2 / 4.0)
    )
    q = NormalDist().inv_cdf(1.0 - alpha / (2.0 * (m_methods - 1)))
    cd = q * (m_methods * (m_methods + 1) / (6.0 * n_datasets)) ** 0.5
    flags = {
        m: abs(average[m] - average[control]) >= cd for m in methods if m != control
    }
    return RankSummary(average, cd, friedman, control, flags)
