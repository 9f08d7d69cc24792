"""Risky/standard learner pairs sharing one label budget.

The risky slot is a replay-driven classifier whose aggressive retraining can
pay off or backfire; the standard slot is a plain budgeted learner.  Both
train on exactly the same queried instances, and an adaptive-window error
estimator per slot tracks prequential 0/1 error.  Predictions always come
from the slot with the lower windowed error (ties go to the standard slot).

In elevating mode, a Welch test on the two error estimates fires when one
slot is significantly better, at which point the better slot's model and
error estimator are copied over the worse slot's.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from .active import BudgetTracker
from .adwin import AdwinEstimator
from .core import ContractError, Instance, IncrementalClassifier, LabeledInstance, argmax_label
from .exploit import ExploitingClassifier, StepOutcome
from .stats import welch_satterthwaite_df, welch_significant, welch_statistic

ELEVATION_COOLDOWN = 30


@dataclass(frozen=True)
class ElevationEvent:
    """One model copy between slots: which slot was overwritten, and when."""

    labeled_index: int
    arrival_index: int
    replaced_slot: str


class PairedEnsemble:
    """Two learners, one query stream, one budget.

    mode "switching" only routes predictions to the currently better slot;
    mode "elevating" additionally copies the significantly better model over
    the worse one, with a cooldown so consecutive tests see fresh evidence.
    """

    def __init__(
        self,
        risky: ExploitingClassifier,
        standard: IncrementalClassifier,
        budget: float,
        query,
        rng_query: np.random.Generator,
        *,
        mode: str = "switching",
        significance: float = 0.05,
        estimator_delta: float = 0.002,
    ):
        if mode not in ("switching", "elevating"):
            raise ContractError(f"unknown ensemble mode {mode!r}")
        if risky.learner.class_count != standard.class_count:
            raise ContractError("risky and standard learners disagree on class count")
        self.risky = risky
        self.standard = standard
        self.budget_tracker = BudgetTracker(budget)
        self.query = query
        self.mode = mode
        self.significance = significance
        self._rng_query = rng_query
        self.risky_error = AdwinEstimator(estimator_delta)
        self.standard_error = AdwinEstimator(estimator_delta)
        self._labeled_count = 0
        self._since_elevation = ELEVATION_COOLDOWN
        self.elevation_events: list[ElevationEvent] = []
        # Pre-update per-slot scores from the latest process() call, for
        # shadow evaluation by the run engine.
        self.last_slot_predictions: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def class_count(self) -> int:
        return self.standard.class_count

    @property
    def update_count(self) -> int:
        return self.risky.update_count + self._labeled_count

    def _choose_risky(self) -> bool:
        return self.risky_error.mean() < self.standard_error.mean()

    def predict(self, instance: Instance) -> np.ndarray:
        if self._choose_risky():
            return self.risky.predict(instance)
        return self.standard.predict(instance)

    def process(self, instance: Instance, oracle) -> StepOutcome:
        scores_risky = self.risky.predict(instance)
        scores_standard = self.standard.predict(instance)
        self.last_slot_predictions = (scores_risky, scores_standard)
        scores = scores_risky if self._choose_risky() else scores_standard
        predicted = argmax_label(scores)
        self.budget_tracker.register_seen()
        if not (self.budget_tracker.allows() and self.query.should_query(scores, self._rng_query)):
            return StepOutcome(scores, predicted, False)
        label = oracle(instance)
        self.budget_tracker.register_labeled()
        self._labeled_count += 1
        labeled = LabeledInstance(instance, label)
        self.risky_error.update(1.0 if argmax_label(scores_risky) != label else 0.0)
        self.standard_error.update(1.0 if argmax_label(scores_standard) != label else 0.0)
        if self.mode == "elevating":
            self._since_elevation += 1
            self._maybe_elevate(instance.arrival_index)
        replayed = self.risky.learn_labeled(labeled, scores_risky)
        self.standard.update(labeled)
        return StepOutcome(scores, predicted, True, replayed, label)

    def _maybe_elevate(self, arrival_index: int) -> None:
        if self._since_elevation < ELEVATION_COOLDOWN:
            return
        n_risky = self.risky_error.width
        n_standard = self.standard_error.width
        if n_risky < 2 or n_standard < 2:
            return
        t = welch_statistic(
            self.risky_error.mean(),
            self.risky_error.variance(),
            n_risky,
            self.standard_error.mean(),
            self.standard_error.variance(),
            n_standard,
        )
        df = welch_satterthwaite_df(
            self.risky_error.variance(), n_risky, self.standard_error.variance(), n_standard
        )
        if not welch_significant(t, df, self.significance):
            return
        if t > 0:
            # Risky slot errs more: overwrite its model with the standard one.
            self.risky.learner = self.standard.clone_model()
            self.risky_error = copy.deepcopy(self.standard_error)
            replaced = "risky"
        else:
            self.standard = self.risky.learner.clone_model()
            self.standard_error = copy.deepcopy(self.risky_error)
            replaced = "standard"
        self.elevation_events.append(
            ElevationEvent(self._labeled_count, arrival_index, replaced)
        )
        self._since_elevation = 0
