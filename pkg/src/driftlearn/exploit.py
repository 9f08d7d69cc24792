"""Replay of recently labeled instances to stretch a scarce label budget.

Every queried instance lands in a sliding window of labeled examples.  After
the regular model update, a selection strategy draws extra training indices
from that window: uniformly, biased toward the newest entries through a
truncated exponential, or the newest entry alone repeated.  Replay intensity
and window capacity can optionally track the model's windowed error rate so
the wrapper retrains hard during drift and rests while the stream is stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .active import BudgetTracker
from .adwin import AdwinEstimator
from .core import (
    ContractError,
    Instance,
    IncrementalClassifier,
    LabeledInstance,
    argmax_label,
    draw_uniform,
)


class LabeledWindow:
    """Bounded FIFO of labeled instances with a dynamically adjustable cap.

    Features and labels are mirrored into flat arrays so replay batches can
    be gathered with one indexing operation instead of restacking objects.
    """

    def __init__(self, cap: int):
        self._items: list[LabeledInstance] = []
        self._features: np.ndarray | None = None
        self._labels: np.ndarray | None = None
        self._start = 0
        self.set_cap(cap)

    def set_cap(self, cap: int) -> None:
        if cap < 1:
            raise ContractError(f"window cap must be >= 1, got {cap}")
        self.cap = cap
        if len(self._items) > cap:
            self._evict(len(self._items) - cap)

    def _evict(self, count: int) -> None:
        del self._items[:count]
        self._start += count

    def push(self, labeled: LabeledInstance) -> None:
        row = labeled.features
        live = len(self._items)
        if self._features is None:
            size = max(2 * self.cap, 64)
            self._features = np.empty((size, row.shape[0]), dtype=np.float64)
            self._labels = np.empty(size, dtype=np.int64)
        elif self._start + live == self._features.shape[0]:
            if self._start > 0:
                self._features[:live] = self._features[self._start : self._start + live]
                self._labels[:live] = self._labels[self._start : self._start + live]
                self._start = 0
            else:
                self._features = np.concatenate([self._features, np.empty_like(self._features)])
                self._labels = np.concatenate([self._labels, np.empty_like(self._labels)])
        self._features[self._start + live] = row
        self._labels[self._start + live] = labeled.label
        self._items.append(labeled)
        if len(self._items) > self.cap:
            self._evict(len(self._items) - self.cap)

    def gather(self, indices) -> tuple[np.ndarray, np.ndarray]:
        """Feature matrix and label vector for 1-based window indices."""
        offsets = np.asarray(indices, dtype=np.int64) + (self._start - 1)
        return self._features[offsets], self._labels[offsets]

    def __len__(self) -> int:
        return len(self._items)

    def __getitem__(self, i: int) -> LabeledInstance:
        return self._items[i]

    def newest(self) -> LabeledInstance:
        return self._items[-1]


def sample_index(size: int, r: float) -> int:
    """Map a draw r in [0, 1] onto a 1-based window index (1 = oldest)."""
    if size < 1:
        raise ContractError("cannot sample from an empty window")
    return min(max(math.ceil(r * size), 1), size)


def draw_truncated_exponential(rng: np.random.Generator, rate: float) -> float:
    """Exponential(rate) draw conditioned on (0, 1] by rejection."""
    if rate <= 0.0:
        raise ContractError(f"rate must be positive, got {rate}")
    while True:
        e = -math.log(draw_uniform(rng)) / rate
        if e <= 1.0:
            return e


def _indices_from_draws(draws: np.ndarray, size: int) -> list[int]:
    indices = np.ceil(draws * size).astype(np.int64)
    np.clip(indices, 1, size, out=indices)
    return indices.tolist()


class UniformSelection:
    """Each replay index drawn uniformly over the window."""

    def select(self, size: int, count: int, rng: np.random.Generator) -> list[int]:
        if size < 1 or count < 1:
            return []
        return _indices_from_draws(rng.random(count), size)


class ExponentialSelection:
    """Replay indices biased toward the newest window entries.

    A truncated exponential draw e near 0 is frequent and maps to index
    ceil((1 - e) * size), i.e. the newest end of the window.
    """

    def __init__(self, rate: float = 4.0):
        if rate <= 0.0:
            raise ContractError(f"rate must be positive, got {rate}")
        self.rate = rate

    def select(self, size: int, count: int, rng: np.random.Generator) -> list[int]:
        if size < 1 or count < 1:
            return []
        accepted: list[np.ndarray] = []
        have = 0
        while have < count:
            block = max(int((count - have) * 1.05) + 8, 16)
            e = -np.log(rng.random(block)) / self.rate
            e = e[e <= 1.0][: count - have]
            accepted.append(e)
            have += e.shape[0]
        return _indices_from_draws(1.0 - np.concatenate(accepted), size)


class NewestOnlySelection:
    """Replays only the most recent labeled instance, count times."""

    def select(self, size: int, count: int, rng: np.random.Generator) -> list[int]:
        if size < 1:
            return []
        return [size] * count


def effective_intensity(error_rate: float, max_intensity: int) -> int:
    """Scale the replay budget by the current error rate.

    Rounds half away from zero, so error 0.25 with max 10 gives 3 replays
    (2.5 rounds up) and a perfectly accurate model replays nothing.
    """
    if not 0.0 <= error_rate <= 1.0:
        raise ContractError(f"error_rate must lie in [0, 1], got {error_rate}")
    if max_intensity < 0:
        raise ContractError(f"max_intensity must be >= 0, got {max_intensity}")
    return int(math.floor(error_rate * max_intensity + 0.5))


class FixedCap:
    """Window capacity pinned at a constant limit."""

    def __init__(self, limit: int):
        if limit < 1:
            raise ContractError(f"cap limit must be >= 1, got {limit}")
        self.limit = limit

    def compute_cap(self, monitor: AdwinEstimator) -> int:
        return self.limit


class ErrorShrinkCap:
    """Capacity (1 - error) * limit, floored and clamped to at least 1.

    High error shrinks the window so replay concentrates on fresh instances;
    low error lets the window grow back toward the limit.
    """

    def __init__(self, limit: int):
        if limit < 1:
            raise ContractError(f"cap limit must be >= 1, got {limit}")
        self.limit = limit

    def compute_cap(self, monitor: AdwinEstimator) -> int:
        return max(int(math.floor((1.0 - monitor.mean()) * self.limit)), 1)


class AdaptiveWidthCap:
    """Window capacity follows the error monitor's own adaptive width."""

    def compute_cap(self, monitor: AdwinEstimator) -> int:
        return max(monitor.width, 1)


@dataclass
class StepOutcome:
    """What happened for one stream instance."""

    scores: np.ndarray
    predicted: int
    queried: bool
    replay_count: int = 0
    label: int | None = None


class PlainActiveLearner:
    """Budgeted active learner without replay: one update per queried label."""

    def __init__(
        self,
        learner: IncrementalClassifier,
        budget: float,
        query,
        rng_query: np.random.Generator,
    ):
        self.learner = learner
        self.budget_tracker = BudgetTracker(budget)
        self.query = query
        self._rng_query = rng_query
        self.update_count = 0

    @property
    def class_count(self) -> int:
        return self.learner.class_count

    def predict(self, instance: Instance) -> np.ndarray:
        return self.learner.predict(instance)

    def process(self, instance: Instance, oracle) -> StepOutcome:
        scores = self.learner.predict(instance)
        predicted = argmax_label(scores)
        self.budget_tracker.register_seen()
        if self.budget_tracker.allows() and self.query.should_query(scores, self._rng_query):
            label = oracle(instance)
            self.budget_tracker.register_labeled()
            self.learner.update(LabeledInstance(instance, label))
            self.update_count += 1
            return StepOutcome(scores, predicted, True, 0, label)
        return StepOutcome(scores, predicted, False)


class ExploitingClassifier:
    """Active learner that replays window instances after every real update.

    Processing order per queried instance: update the model with the fresh
    label, feed the prequential 0/1 error to the monitor, recompute the
    window cap, push the instance, then draw and apply the replay updates.
    With max_intensity 0 this reduces exactly to PlainActiveLearner.
    """

    def __init__(
        self,
        learner: IncrementalClassifier,
        selection,
        max_intensity: int,
        rng_replay: np.random.Generator,
        *,
        budget: float = 1.0,
        query=None,
        rng_query: np.random.Generator | None = None,
        dynamic_intensity: bool = False,
        cap_policy=None,
        monitor_delta: float = 0.002,
    ):
        if max_intensity < 0:
            raise ContractError(f"max_intensity must be >= 0, got {max_intensity}")
        self.learner = learner
        self.budget_tracker = BudgetTracker(budget)
        self.query = query
        self.selection = selection
        self.max_intensity = max_intensity
        self.dynamic_intensity = dynamic_intensity
        self.cap_policy = cap_policy if cap_policy is not None else FixedCap(1000)
        self.monitor = AdwinEstimator(monitor_delta)
        self.window = LabeledWindow(self.cap_policy.compute_cap(self.monitor))
        self._rng_query = rng_query
        self._rng_replay = rng_replay
        self.update_count = 0

    @property
    def class_count(self) -> int:
        return self.learner.class_count

    def predict(self, instance: Instance) -> np.ndarray:
        return self.learner.predict(instance)

    def process(self, instance: Instance, oracle) -> StepOutcome:
        if self.query is None or self._rng_query is None:
            raise ContractError("this wrapper was built without a query strategy")
        scores = self.learner.predict(instance)
        predicted = argmax_label(scores)
        self.budget_tracker.register_seen()
        if self.budget_tracker.allows() and self.query.should_query(scores, self._rng_query):
            label = oracle(instance)
            self.budget_tracker.register_labeled()
            replayed = self.learn_labeled(LabeledInstance(instance, label), scores)
            return StepOutcome(scores, predicted, True, replayed, label)
        return StepOutcome(scores, predicted, False)

    def learn_labeled(self, labeled: LabeledInstance, pre_scores: np.ndarray) -> int:
        """Model update plus replay for one labeled instance; returns the replay count."""
        error = 1.0 if argmax_label(pre_scores) != labeled.label else 0.0
        self.learner.update(labeled)
        self.update_count += 1
        self.monitor.update(error)
        self.window.set_cap(self.cap_policy.compute_cap(self.monitor))
        self.window.push(labeled)
        if self.dynamic_intensity:
            intensity = effective_intensity(self.monitor.mean(), self.max_intensity)
        else:
            intensity = self.max_intensity
        indices = self.selection.select(len(self.window), intensity, self._rng_replay)
        self._replay(indices)
        return len(indices)

    def _replay(self, indices: list[int]) -> None:
        if not indices:
            return
        if hasattr(self.learner, "update_many"):
            features, labels = self.window.gather(indices)
            self.learner.update_many(features, labels)
        else:
            for i in indices:
                self.learner.update(self.window[i - 1])
        self.update_count += len(indices)
