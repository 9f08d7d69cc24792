"""Adaptive windowing (ADWIN) over a stream of bounded real values.

The estimator keeps a variable-length window of the most recent inputs,
compressed into an exponential histogram: each level ``i`` holds buckets that
summarize ``2**i`` values (total and within-bucket variance), with at most
``MAX_BUCKETS_PER_LEVEL`` buckets per level before the two oldest merge into
the next level.  After every insertion the window is scanned at bucket
boundaries, newest to oldest, and the older part is dropped whenever the two
sides' means differ by more than the variance-sensitive threshold.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

MAX_BUCKETS_PER_LEVEL = 5

# Histogram capacity: level i summarizes 2**i values, so 48 levels cover any
# window this code could build; one spare slot per level absorbs the bucket
# that triggers a merge.
_MAX_LEVELS = 48
_LEVEL_CAPACITY = MAX_BUCKETS_PER_LEVEL + 1


def cut_threshold(n0: int, n1: int, window_variance: float, delta: float) -> float:
    """Mean-difference threshold for splitting a window of n0 + n1 values.

    Uses the harmonic mean m of the two side lengths and a per-split
    confidence delta' = delta / ln(n0 + n1), with the log floored at 1 so
    tiny windows do not inflate the confidence term.
    """
    if n0 < 1 or n1 < 1:
        raise ValueError("both sides of a split need at least one value")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    n = n0 + n1
    log_inv = math.log(2.0 * max(math.log(n), 1.0) / delta)
    m = 1.0 / (1.0 / n0 + 1.0 / n1)
    return math.sqrt((2.0 / m) * window_variance * log_inv) + (2.0 / (3.0 * m)) * log_inv


@njit(cache=True)
def _insert_and_shrink(totals, vars_, counts, level_count, width, total,
                       variance_sum, value, delta, max_per_level):
    """One full ADWIN step on the array-backed histogram.

    Buckets are oldest first within a level; higher levels are older than
    lower ones.  The boundary scan applies the same arithmetic as
    ``cut_threshold`` so decisions match the scalar form exactly.
    """
    if width > 0:
        mean_old = total / width
        variance_sum += width * (value - mean_old) ** 2 / (width + 1)
    width += 1
    total += value
    totals[0, counts[0]] = value
    vars_[0, counts[0]] = 0.0
    counts[0] += 1

    # Merge the two oldest buckets upward while a level overflows.
    level = 0
    while level < level_count and counts[level] > max_per_level:
        n = 1 << level
        t0 = totals[level, 0]
        v0 = vars_[level, 0]
        t1 = totals[level, 1]
        v1 = vars_[level, 1]
        cnt = counts[level]
        for i in range(2, cnt):
            totals[level, i - 2] = totals[level, i]
            vars_[level, i - 2] = vars_[level, i]
        counts[level] = cnt - 2
        m0 = t0 / n
        m1 = t1 / n
        # n*n/(2n) reduced to n/2; exact either way since n is a power of 2.
        merged_var = v0 + v1 + (n / 2.0) * (m0 - m1) ** 2
        if level + 1 == level_count:
            level_count += 1
        totals[level + 1, counts[level + 1]] = t0 + t1
        vars_[level + 1, counts[level + 1]] = merged_var
        counts[level + 1] += 1
        level += 1

    # Drop the oldest bucket while any split point shows a mean gap above
    # the threshold; rescan after every drop.
    shrank = 0
    while width >= 2:
        window_var = variance_sum / width
        violation = False
        exhausted = False
        n1 = 0
        u1 = 0.0
        for lv in range(level_count):
            size = 1 << lv
            for i in range(counts[lv] - 1, -1, -1):
                n1 += size
                u1 += totals[lv, i]
                n0 = width - n1
                if n0 < 1:
                    exhausted = True
                    break
                u0 = total - u1
                n = n0 + n1
                log_inv = math.log(2.0 * max(math.log(n), 1.0) / delta)
                m = 1.0 / (1.0 / n0 + 1.0 / n1)
                threshold = (
                    math.sqrt((2.0 / m) * window_var * log_inv)
                    + (2.0 / (3.0 * m)) * log_inv
                )
                if abs(u0 / n0 - u1 / n1) > threshold:
                    violation = True
                    break
            if violation or exhausted:
                break
        if not violation:
            break

        # Remove the oldest bucket (front of the highest non-empty level).
        lv = level_count - 1
        while counts[lv] == 0:
            lv -= 1
        bucket_total = totals[lv, 0]
        bucket_var = vars_[lv, 0]
        cnt = counts[lv]
        for i in range(1, cnt):
            totals[lv, i - 1] = totals[lv, i]
            vars_[lv, i - 1] = vars_[lv, i]
        counts[lv] = cnt - 1
        if counts[level_count - 1] == 0 and level_count > 1:
            level_count -= 1
        n = 1 << lv
        width -= n
        total -= bucket_total
        if width > 0:
            mu_bucket = bucket_total / n
            mu_rest = total / width
            removed = bucket_var + (
                float(n) * width / (n + width) * (mu_bucket - mu_rest) ** 2
            )
            variance_sum = variance_sum - removed
            if variance_sum < 0.0:
                variance_sum = 0.0
        else:
            variance_sum = 0.0
        shrank = 1
    return level_count, width, total, variance_sum, shrank


class AdwinEstimator:
    """Windowed mean estimator that shrinks when the mean shifts.

    ``update`` feeds one value and reports whether any shrink (cut) happened.
    ``mean``/``variance``/``width`` describe the current window; all three
    are 0 while the window is empty.
    """

    def __init__(self, delta: float = 0.002):
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        self.delta = delta
        self._bucket_totals = np.zeros((_MAX_LEVELS, _LEVEL_CAPACITY), dtype=np.float64)
        self._bucket_vars = np.zeros((_MAX_LEVELS, _LEVEL_CAPACITY), dtype=np.float64)
        self._bucket_counts = np.zeros(_MAX_LEVELS, dtype=np.int64)
        self._level_count = 1
        self._width = 0
        self._total = 0.0
        self._variance_sum = 0.0
        self.total_seen = 0
        self.cut_count = 0

    @property
    def width(self) -> int:
        return self._width

    def mean(self) -> float:
        return self._total / self._width if self._width else 0.0

    def variance(self) -> float:
        return self._variance_sum / self._width if self._width else 0.0

    @property
    def _levels(self) -> list[list[tuple[float, float]]]:
        """Histogram view: levels[i] holds (total, variance) buckets of
        2**i values each, oldest first; higher levels are older."""
        return [
            [
                (float(self._bucket_totals[level, i]), float(self._bucket_vars[level, i]))
                for i in range(int(self._bucket_counts[level]))
            ]
            for level in range(self._level_count)
        ]

    def update(self, value: float) -> bool:
        """Insert one value; True when the window shrank on this step."""
        value = float(value)
        if not math.isfinite(value):
            raise ValueError("AdwinEstimator values must be finite")
        self.total_seen += 1
        level_count, width, total, variance_sum, shrank = _insert_and_shrink(
            self._bucket_totals,
            self._bucket_vars,
            self._bucket_counts,
            self._level_count,
            self._width,
            self._total,
            self._variance_sum,
            value,
            self.delta,
            MAX_BUCKETS_PER_LEVEL,
        )
        self._level_count = int(level_count)
        self._width = int(width)
        self._total = float(total)
        self._variance_sum = float(variance_sum)
        if shrank:
            self.cut_count += 1
            return True
        return False
