"""Label budgets and query strategies for stream active learning.

The budget tracker measures spending as labeled / max(seen, 1) and admits a
query only while spending sits strictly below the budget, which bounds the
realized labeling rate by B + 1/seen at every prefix.  Query strategies
decide, per instance, whether the label is worth one unit of budget;
all of them consume randomness only from the generator handed in.
"""

from __future__ import annotations

import numpy as np

from .core import ContractError, draw_uniform


class BudgetTracker:
    """Exact labeling-rate accounting against a fixed budget fraction."""

    def __init__(self, budget: float):
        if not 0.0 < budget <= 1.0:
            raise ContractError(f"budget must lie in (0, 1], got {budget}")
        self.budget = budget
        self.seen = 0
        self.labeled = 0

    @property
    def spending(self) -> float:
        return self.labeled / max(self.seen, 1)

    def allows(self) -> bool:
        return self.spending < self.budget

    def register_seen(self) -> None:
        self.seen += 1

    def register_labeled(self) -> None:
        self.labeled += 1


class RandomQuery:
    """Queries each instance independently with probability ``budget``."""

    def __init__(self, budget: float):
        if not 0.0 < budget <= 1.0:
            raise ContractError(f"budget must lie in (0, 1], got {budget}")
        self.budget = budget

    def should_query(self, scores: np.ndarray, rng: np.random.Generator) -> bool:
        return draw_uniform(rng) < self.budget


class VariableUncertaintyQuery:
    """Uncertainty sampling with a randomized, self-adjusting threshold.

    The top posterior is compared against threshold * eta where eta is a
    positive draw from Normal(1, spread); the threshold shrinks after each
    query and grows otherwise, steering the query rate toward the budget
    even when the score distribution drifts.
    """

    def __init__(self, threshold: float = 1.0, step: float = 0.01, spread: float = 1.0):
        if not 0.0 < threshold <= 1.0:
            raise ContractError(f"threshold must lie in (0, 1], got {threshold}")
        self.threshold = threshold
        self.step = step
        self.spread = spread

    def should_query(self, scores: np.ndarray, rng: np.random.Generator) -> bool:
        top = float(np.max(scores))
        eta = rng.normal(1.0, self.spread)
        while eta <= 0.0:
            eta = rng.normal(1.0, self.spread)
        if top < self.threshold * eta:
            self.threshold = min(self.threshold * (1.0 - self.step), 1.0)
            return True
        self.threshold = min(self.threshold * (1.0 + self.step), 1.0)
        return False


class SelectiveSamplingQuery:
    """Margin-based randomized querying: P(query) = c / (c + margin)."""

    def __init__(self, slope: float = 0.01):
        if slope <= 0.0:
            raise ContractError(f"slope must be positive, got {slope}")
        self.slope = slope

    def should_query(self, scores: np.ndarray, rng: np.random.Generator) -> bool:
        if len(scores) < 2:
            raise ContractError("margin needs at least two class scores")
        top_two = np.partition(scores, -2)[-2:]
        margin = float(top_two[1] - top_two[0])
        probability = self.slope / (self.slope + margin)
        return draw_uniform(rng) < probability
