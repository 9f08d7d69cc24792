"""Hoeffding tree (incremental decision tree) and a drift-adaptive variant.

Leaves accumulate class counts plus per-feature histograms.  A leaf defers
split decisions until a grace period of instances has arrived, then compares
the two best candidate splits with the Hoeffding bound; numeric split
candidates are the interior edges of an equal-width 10-bin histogram whose
range freezes at the leaf's first evaluation.

The adaptive variant monitors the tree's prequential 0/1 error with an
adaptive window.  A detected error shift starts a background tree trained in
parallel; once the background is mature and its windowed error undercuts the
foreground's, it replaces the foreground tree outright.
"""

from __future__ import annotations

import copy
import math

import numpy as np

from ..adwin import AdwinEstimator
from ..core import ContractError, Instance, IncrementalClassifier, LabeledInstance, argmax_label

HISTOGRAM_BINS = 10


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total <= 0.0:
        return 0.0
    p = counts[counts > 0.0] / total
    return float(-(p * np.log2(p)).sum())


class _Leaf:
    __slots__ = (
        "class_counts",
        "raw",
        "lows",
        "bin_widths",
        "bin_counts",
        "observed",
        "since_eval",
    )

    def __init__(self, class_count: int, n_features: int, seed_counts=None):
        if seed_counts is None:
            self.class_counts = np.zeros(class_count)
        else:
            self.class_counts = seed_counts
        self.raw: list[tuple[np.ndarray, int]] | None = []
        self.lows = None
        self.bin_widths = None
        self.bin_counts = None
        self.observed = 0
        self.since_eval = 0

    def add(self, features: np.ndarray, label: int) -> None:
        self.class_counts[label] += 1.0
        self.observed += 1
        self.since_eval += 1
        if self.raw is not None:
            self.raw.append((features, label))
        else:
            self._bin(features, label)

    def _bin(self, features: np.ndarray, label: int) -> None:
        counts = self.bin_counts
        lows = self.lows
        widths = self.bin_widths
        for f in range(len(lows)):
            idx = int((features[f] - lows[f]) / widths[f])
            if idx < 0:
                idx = 0
            elif idx >= HISTOGRAM_BINS:
                idx = HISTOGRAM_BINS - 1
            counts[f, label, idx] += 1.0

    def freeze(self, class_count: int, n_features: int) -> None:
        """Fix equal-width bin edges from the range seen so far."""
        stacked = np.array([features for features, _ in self.raw])
        mins = stacked.min(axis=0)
        spans = stacked.max(axis=0) - mins
        usable = spans > 0.0
        self.lows = np.where(usable, mins, mins - 0.5)
        self.bin_widths = np.where(usable, spans / HISTOGRAM_BINS, 1.0)
        self.bin_counts = np.zeros((n_features, class_count, HISTOGRAM_BINS))
        for features, label in self.raw:
            self._bin(features, label)
        self.raw = None


class _Node:
    __slots__ = ("leaf", "feature", "threshold", "left", "right")

    def __init__(self, leaf: _Leaf):
        self.leaf: _Leaf | None = leaf
        self.feature = -1
        self.threshold = 0.0
        self.left: "_Node" | None = None
        self.right: "_Node" | None = None


class HoeffdingTree(IncrementalClassifier):
    def __init__(
        self,
        class_count: int,
        n_features: int,
        grace_period: int = 200,
        split_confidence: float = 1e-7,
        tie_threshold: float = 0.05,
    ):
        if class_count < 2:
            raise ContractError("need at least two classes")
        self.class_count = class_count
        self.n_features = n_features
        self.grace_period = grace_period
        self.split_confidence = split_confidence
        self.tie_threshold = tie_threshold
        self._root = _Node(_Leaf(class_count, n_features))
        self.node_count = 1

    def _sort(self, features: np.ndarray) -> _Node:
        node = self._root
        while node.leaf is None:
            if features[node.feature] <= node.threshold:
                node = node.left
            else:
                node = node.right
        return node

    def update(self, labeled: LabeledInstance) -> None:
        y = labeled.label
        if not 0 <= y < self.class_count:
            raise ContractError(f"label {y} outside [0, {self.class_count})")
        node = self._sort(labeled.features)
        leaf = node.leaf
        leaf.add(labeled.features, y)
        if leaf.since_eval >= self.grace_period:
            leaf.since_eval = 0
            if np.count_nonzero(leaf.class_counts) > 1:
                self._attempt_split(node)

    def _attempt_split(self, node: _Node) -> None:
        leaf = node.leaf
        if leaf.raw is not None:
            leaf.freeze(self.class_count, self.n_features)
        best_gain = 0.0
        second_gain = 0.0
        best_feature = -1
        best_edge = -1
        best_left = None
        for f in range(self.n_features):
            mat = leaf.bin_counts[f]
            n = mat.sum()
            if n <= 0.0:
                continue
            parent_entropy = _entropy(mat.sum(axis=1))
            prefix = mat.cumsum(axis=1)
            gain_f = 0.0
            edge_f = -1
            left_f = None
            for b in range(HISTOGRAM_BINS - 1):
                left = prefix[:, b]
                n_left = left.sum()
                n_right = n - n_left
                if n_left <= 0.0 or n_right <= 0.0:
                    continue
                gain = parent_entropy - (
                    n_left / n * _entropy(left) + n_right / n * _entropy(mat.sum(axis=1) - left)
                )
                if gain > gain_f:
                    gain_f = gain
                    edge_f = b
                    left_f = left
            if gain_f > best_gain:
                second_gain = best_gain
                best_gain = gain_f
                best_feature = f
                best_edge = edge_f
                best_left = left_f
            elif gain_f > second_gain:
                second_gain = gain_f
        if best_feature < 0 or best_gain <= 0.0:
            return
        n_total = leaf.bin_counts[best_feature].sum()
        value_range = math.log2(self.class_count)
        bound = math.sqrt(
            value_range * value_range * math.log(1.0 / self.split_confidence) / (2.0 * n_total)
        )
        if best_gain - second_gain > bound or bound < self.tie_threshold:
            threshold = leaf.lows[best_feature] + leaf.bin_widths[best_feature] * (best_edge + 1)
            right_counts = leaf.bin_counts[best_feature].sum(axis=1) - best_left
            node.leaf = None
            node.feature = best_feature
            node.threshold = float(threshold)
            node.left = _Node(_Leaf(self.class_count, self.n_features, best_left.copy()))
            node.right = _Node(_Leaf(self.class_count, self.n_features, right_counts))
            self.node_count += 2

    def predict(self, instance: Instance) -> np.ndarray:
        leaf = self._sort(instance.features).leaf
        total = leaf.class_counts.sum()
        if total <= 0.0:
            return np.full(self.class_count, 1.0 / self.class_count)
        return leaf.class_counts / total

    def root_split(self) -> tuple[int, float] | None:
        """(feature, threshold) of the root split, or None while a leaf."""
        if self._root.leaf is not None:
            return None
        return self._root.feature, self._root.threshold

    def clone_model(self) -> "HoeffdingTree":
        return copy.deepcopy(self)


class AdaptiveHoeffdingTree(IncrementalClassifier):
    """Hoeffding tree with drift-triggered background replacement.

    The maturity guard keeps a freshly spawned background tree from taking
    over before it has seen enough labeled instances to be trusted, and the
    swap itself requires the background's windowed error to undercut the
    foreground's by a Hoeffding-style significance bound; a background that
    tests significantly worse is dropped instead.  Without the bound, noise
    in sparse error estimates swaps structure away faster than a tree can
    accumulate the statistics needed to split.
    """

    MATURITY = 300
    SWAP_CONFIDENCE = 0.05

    def __init__(
        self,
        class_count: int,
        n_features: int,
        grace_period: int = 200,
        split_confidence: float = 1e-7,
        tie_threshold: float = 0.05,
        monitor_delta: float = 0.002,
    ):
        self.class_count = class_count
        self.n_features = n_features
        self.monitor_delta = monitor_delta
        self._tree_args = (grace_period, split_confidence, tie_threshold)
        self._foreground = HoeffdingTree(class_count, n_features, *self._tree_args)
        self._monitor = AdwinEstimator(monitor_delta)
        self._background: HoeffdingTree | None = None
        self._background_monitor: AdwinEstimator | None = None
        self._background_age = 0
        self.swap_count = 0

    def update(self, labeled: LabeledInstance) -> None:
        y = labeled.label
        error = 1.0 if argmax_label(self._foreground.predict(labeled.instance)) != y else 0.0
        self._foreground.update(labeled)
        cut = self._monitor.update(error)
        if self._background is not None:
            bg_error = 1.0 if argmax_label(self._background.predict(labeled.instance)) != y else 0.0
            self._background.update(labeled)
            self._background_monitor.update(bg_error)
            self._background_age += 1
        if cut and self._background is None:
            self._background = HoeffdingTree(self.class_count, self.n_features, *self._tree_args)
            self._background_monitor = AdwinEstimator(self.monitor_delta)
            self._background_age = 0
        if self._background is not None and self._background_age >= self.MATURITY:
            fg_mean = self._monitor.mean()
            bg_mean = self._background_monitor.mean()
            windows = 1.0 / self._monitor.width + 1.0 / self._background_monitor.width
            bound = math.sqrt(
                2.0 * fg_mean * (1.0 - fg_mean) * math.log(2.0 / self.SWAP_CONFIDENCE) * windows
            )
            if fg_mean - bg_mean > bound:
                self._foreground = self._background
                self._monitor = self._background_monitor
                self._background = None
                self._background_monitor = None
                self._background_age = 0
                self.swap_count += 1
            elif bg_mean - fg_mean > bound:
                self._background = None
                self._background_monitor = None
                self._background_age = 0

    def predict(self, instance: Instance) -> np.ndarray:
        return self._foreground.predict(instance)

    def clone_model(self) -> "AdaptiveHoeffdingTree":
        return copy.deepcopy(self)
