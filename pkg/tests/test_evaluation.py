import math
from statistics import NormalDist
from types import SimpleNamespace

import numpy as np
import pytest

from driftlearn.active import BudgetTracker, RandomQuery
from driftlearn.core import ContractError, make_rng
from driftlearn.evaluation import (
    AdaptiveKappa,
    BudgetLawError,
    ConfusionMatrix,
    GlobalKappa,
    SlidingKappa,
    friedman_bonferroni_dunn,
    prequential_series,
    run_test_then_train,
    segment_average,
)
from driftlearn.exploit import PlainActiveLearner
from driftlearn.learners import GaussianNaiveBayes
from driftlearn.streams import DriftingStream, SeaConcept, StaggerConcept


def _fill(matrix: ConfusionMatrix, counts) -> None:
    for true_label, row in enumerate(counts):
        for predicted, n in enumerate(row):
            for _ in range(n):
                matrix.add(true_label, predicted)


# --------------------------------------------------------------------- kappa


def test_kappa_worked_example():
    m = ConfusionMatrix(2)
    _fill(m, [[40, 10], [20, 30]])
    # observed 0.7, chance 0.5 -> (0.7 - 0.5) / 0.5
    assert m.kappa() == pytest.approx(0.4, rel=1e-12)
    assert m.accuracy() == pytest.approx(0.7, rel=1e-12)


def test_kappa_label_permutation_invariance():
    counts = [[40, 10, 3], [20, 30, 7], [5, 6, 50]]
    m = ConfusionMatrix(3)
    _fill(m, counts)
    perm = [2, 0, 1]
    permuted = ConfusionMatrix(3)
    for i in range(3):
        for j in range(3):
            for _ in range(counts[i][j]):
                permuted.add(perm[i], perm[j])
    assert permuted.kappa() == pytest.approx(m.kappa(), rel=1e-12)


def test_kappa_of_majority_guesser_is_zero():
    m = ConfusionMatrix(2)
    _fill(m, [[70, 0], [30, 0]])
    assert m.kappa() == 0.0
    assert m.accuracy() == pytest.approx(0.7)


def test_kappa_perfect_and_inverted():
    m = ConfusionMatrix(2)
    _fill(m, [[50, 0], [0, 50]])
    assert m.kappa() == pytest.approx(1.0)
    inv = ConfusionMatrix(2)
    _fill(inv, [[0, 50], [50, 0]])
    assert inv.kappa() == pytest.approx(-1.0)


def test_kappa_empty_and_degenerate():
    m = ConfusionMatrix(2)
    assert m.kappa() == 0.0
    _fill(m, [[10, 0], [0, 0]])
    # every true label and every prediction is class 0: chance agreement 1
    assert m.kappa() == 0.0
    with pytest.raises(ContractError):
        ConfusionMatrix(1)
    with pytest.raises(ContractError):
        m.remove(1, 1)


def test_sliding_matches_global_when_window_covers_run():
    rng = make_rng(1, "evaluation")
    wide = SlidingKappa(3, 10_000)
    everything = GlobalKappa(3)
    for _ in range(2000):
        t, p = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        wide.add(t, p)
        everything.add(t, p)
    assert wide.kappa() == pytest.approx(everything.kappa(), rel=1e-12)


def test_sliding_window_forgets():
    narrow = SlidingKappa(2, 100)
    for i in range(100):
        narrow.add(i % 2, i % 2)
    for i in range(100):
        narrow.add(i % 2, 1 - i % 2)
    # the early perfect half has been fully evicted
    assert narrow.confusion.total == 100
    assert narrow.kappa() == pytest.approx(-1.0)
    with pytest.raises(ContractError):
        SlidingKappa(2, 0)


def test_adaptive_kappa_tracks_regime_change():
    tracker = AdaptiveKappa(2)
    for i in range(2000):
        tracker.add(i % 2, i % 2)
    assert tracker.kappa() == pytest.approx(1.0)
    for i in range(2000):
        tracker.add(i % 2, 1 - i % 2)
    # the detector cut away most of the pre-change window
    assert tracker.detector.width < 2500
    assert tracker.confusion.total == tracker.detector.width
    assert tracker.kappa() < -0.8


# ------------------------------------------------------------------ segments


def test_segment_average_partitions_and_recombines():
    schedule = [(100, 10), (200, 10)]
    series = []
    for t in range(50, 260, 5):
        in_drift = any(c - w <= t <= c + w for c, w in schedule)
        series.append((t, 0.2 if in_drift else 0.8))
    result = segment_average(series, schedule)
    assert result.stable == pytest.approx(0.8)
    assert result.drift == pytest.approx(0.2)
    assert result.balanced == pytest.approx(0.5)
    n_d = sum(1 for t, v in series if v == 0.2)
    n_s = len(series) - n_d
    mean = sum(v for _, v in series) / len(series)
    assert (result.stable * n_s + result.drift * n_d) / len(series) == pytest.approx(mean)


def test_segment_average_boundary_is_inclusive():
    schedule = [(100, 10)]
    result = segment_average([(90, 0.1), (110, 0.2), (111, 0.9), (89, 0.7)], schedule)
    assert result.drift == pytest.approx(0.15)
    assert result.stable == pytest.approx(0.8)


def test_segment_average_empty_partitions():
    series = [(10, 0.5), (20, 0.7)]
    no_drift = segment_average(series, [])
    assert no_drift.drift is None
    assert no_drift.stable == pytest.approx(0.6)
    assert no_drift.balanced == pytest.approx(0.6)
    all_drift = segment_average(series, [(15, 10)])
    assert all_drift.stable is None
    assert all_drift.balanced == pytest.approx(all_drift.drift)
    empty = segment_average([], [])
    assert empty.stable is None and empty.drift is None and empty.balanced is None


# ---------------------------------------------------------------- run engine


def _full_budget_model(class_count: int = 2):
    return PlainActiveLearner(
        GaussianNaiveBayes(class_count, 2),
        1.0,
        RandomQuery(1.0),
        make_rng(7, "query"),
    )


def test_run_test_then_train_report_fields():
    stream = DriftingStream([SeaConcept(8.0)], [], 3000, 0.0, make_rng(2, "stream"))
    # SEA features are 3-wide
    model = PlainActiveLearner(
        GaussianNaiveBayes(2, 3), 1.0, RandomQuery(1.0), make_rng(3, "query")
    )
    report = run_test_then_train(model, stream)
    assert report.instances == 3000
    assert report.labeled == 3000
    assert report.spending == pytest.approx(1.0)
    assert report.update_count == 3000
    assert report.confusion.sum() == 3000
    assert 0.0 <= report.accuracy <= 1.0
    assert report.global_kappa > 0.5
    assert report.series == []
    assert report.elevations == []
    assert report.elapsed_ms > 0.0


def test_run_engine_rejects_shape_mismatch():
    stream = DriftingStream([SeaConcept(8.0)], [], 100, 0.0, make_rng(2, "stream"))
    model = _full_budget_model(class_count=3)
    with pytest.raises(ContractError):
        run_test_then_train(model, stream)


class _OverSpender:
    """Stub that labels everything while claiming a 10% budget."""

    class_count = 2

    def __init__(self):
        self.budget_tracker = SimpleNamespace(spending=0.0, budget=0.1, seen=0, labeled=0)

    def process(self, instance, oracle):
        t = self.budget_tracker
        t.seen += 1
        t.labeled += 1
        t.spending = t.labeled / t.seen
        return SimpleNamespace(predicted=0)


def test_budget_law_violation_raises():
    stream = DriftingStream([SeaConcept(8.0)], [], 100, 0.0, make_rng(4, "stream"))
    with pytest.raises(BudgetLawError, match="exceeds budget"):
        run_test_then_train(_OverSpender(), stream)


class _ConceptSwitcher:
    """Predicts with the pre-drift rule before the center, post-drift after.

    Perfect on both pure regimes, so any kappa dip is confined to the
    transition neighborhood where instances come from the mixture.
    """

    class_count = 2

    def __init__(self, old, new, center):
        self.old, self.new, self.center = old, new, center
        self.budget_tracker = SimpleNamespace(spending=0.0, budget=0.0, seen=1, labeled=0)

    def process(self, instance, oracle):
        concept = self.old if instance.arrival_index < self.center else self.new
        return SimpleNamespace(predicted=concept.classify(instance.features))


def test_series_dips_inside_drift_interval():
    old, new, center, width = StaggerConcept(0), StaggerConcept(2), 5000, 50
    stream = DriftingStream([old, new], [(center, width)], 10_000, 0.0, make_rng(5, "stream"))
    tracker = SlidingKappa(2, 100)
    report = run_test_then_train(
        _ConceptSwitcher(old, new, center), stream, series_tracker=tracker, series_stride=100
    )
    assert len(report.series) == 100
    segments = segment_average(report.series, [(center, width)])
    assert segments.stable > 0.9
    assert segments.drift < segments.stable - 0.1
    assert segments.drift <= segments.balanced <= segments.stable


def test_prequential_series_full_budget_learning_curve():
    stream = DriftingStream([SeaConcept(8.0)], [], 4000, 0.0, make_rng(6, "stream"))
    model = PlainActiveLearner(
        GaussianNaiveBayes(2, 3), 1.0, RandomQuery(1.0), make_rng(7, "query")
    )
    series = prequential_series(model, stream, window=500, stride=500)
    assert [t for t, _ in series] == [500 * i for i in range(1, 9)]
    assert all(-1.0 <= v <= 1.0 for _, v in series)
    assert series[-1][1] > series[0][1] - 0.05
    assert series[-1][1] > 0.5


# ------------------------------------------------------------------- ranking


def test_friedman_dominance_gives_extreme_ranks():
    scores = {
        "best": [0.9, 0.8, 0.95, 0.85],
        "mid": [0.5, 0.5, 0.6, 0.55],
        "worst": [0.1, 0.2, 0.15, 0.12],
    }
    summary = friedman_bonferroni_dunn(scores, control="mid")
    assert summary.average_ranks == {"best": 1.0, "mid": 2.0, "worst": 3.0}
    assert summary.control == "mid"
    assert set(summary.significantly_different) == {"best", "worst"}


def test_friedman_identical_scores():
    scores = {"a": [0.5] * 6, "b": [0.5] * 6, "c": [0.5] * 6}
    summary = friedman_bonferroni_dunn(scores, control="a")
    assert all(r == pytest.approx(2.0) for r in summary.average_ranks.values())
    assert summary.friedman_statistic == pytest.approx(0.0, abs=1e-12)
    assert not any(summary.significantly_different.values())


def test_critical_difference_formula():
    scores = {
        "a": list(range(10)),
        "b": [x + 0.5 for x in range(10)],
        "c": [x - 0.5 for x in range(10)],
    }
    summary = friedman_bonferroni_dunn(scores, control="a", alpha=0.05)
    q = NormalDist().inv_cdf(1.0 - 0.05 / 4.0)
    assert summary.critical_difference == pytest.approx(q * math.sqrt(3 * 4 / (6 * 10)))
    # two comparisons against a control at alpha = 0.05
    assert summary.critical_difference == pytest.approx(1.00239, abs=1e-4)
    assert summary.average_ranks == {"a": 2.0, "b": 1.0, "c": 3.0}
    assert summary.significantly_different == {"b": False, "c": False}


def test_friedman_statistic_value():
    # chi^2_F = 12N/(M(M+1)) (sum R_j^2 - M(M+1)^2/4) with ranks 1, 2, 3
    scores = {
        "best": [3.0, 3.1, 3.2],
        "mid": [2.0, 2.1, 2.2],
        "worst": [1.0, 1.1, 1.2],
    }
    summary = friedman_bonferroni_dunn(scores, control="best")
    expected = 12.0 * 3 / (3 * 4) * ((1 + 4 + 9) - 3 * 16 / 4.0)
    assert summary.friedman_statistic == pytest.approx(expected)


def test_friedman_ties_average_ranks():
    scores = {"a": [1.0, 1.0], "b": [1.0, 1.0], "c": [0.0, 0.0]}
    summary = friedman_bonferroni_dunn(scores, control="c")
    assert summary.average_ranks["a"] == pytest.approx(1.5)
    assert summary.average_ranks["b"] == pytest.approx(1.5)
    assert summary.average_ranks["c"] == pytest.approx(3.0)


def test_friedman_validation():
    with pytest.raises(ContractError):
        friedman_bonferroni_dunn({"a": [1.0]}, control="a")
    with pytest.raises(ContractError):
        friedman_bonferroni_dunn({"a": [1.0], "b": [1.0, 2.0]}, control="a")
    with pytest.raises(ContractError):
        friedman_bonferroni_dunn({"a": [1.0], "b": [2.0]}, control="missing")


def test_budget_tracker_integration_under_partial_budget():
    stream = DriftingStream([SeaConcept(8.0)], [], 5000, 0.0, make_rng(8, "stream"))
    model = PlainActiveLearner(
        GaussianNaiveBayes(2, 3), 0.2, RandomQuery(0.2), make_rng(9, "query")
    )
    report = run_test_then_train(model, stream)
    assert report.spending <= 0.2 + 1.0 / 5000 + 1e-12
    assert report.labeled == report.update_count
    assert 700 <= report.labeled <= 1300


def test_budget_tracker_contract():
    tracker = BudgetTracker(0.5)
    assert tracker.spending == 0.0
    tracker.register_seen()
    assert tracker.allows()
    tracker.register_labeled()
    assert tracker.spending == pytest.approx(1.0)
    assert not tracker.allows()
