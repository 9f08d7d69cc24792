"""Grid execution: build models from a config, run cells, write results.

One cell is (strategy, budget, seed).  Cells are fully independent, so the
grid can run across processes; results are reassembled in declaration order
and the CSV body is byte-identical for identical configs and seeds no
matter how many workers ran.  Wall-clock timings are inherently
non-deterministic, so they go to a sidecar file instead of the results CSV.
"""

from __future__ import annotations

import csv
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .active import RandomQuery, SelectiveSamplingQuery, VariableUncertaintyQuery
from .config import ExperimentConfig
from .core import ContractError, argmax_label, make_rng
from .ensemble import PairedEnsemble
from .evaluation import SlidingKappa, run_test_then_train, segment_average
from .exploit import (
    AdaptiveWidthCap,
    ErrorShrinkCap,
    ExploitingClassifier,
    ExponentialSelection,
    FixedCap,
    NewestOnlySelection,
    PlainActiveLearner,
    UniformSelection,
)
from .learners import (
    AdaptiveHoeffdingTree,
    GaussianNaiveBayes,
    HoeffdingTree,
    LinearSgdClassifier,
)
from .streams import PRESETS, make_stream, read_attribute_relation, read_delimited

OUTPUT_DIR_ENV = "DRIFTLEARN_OUTPUT_DIR"
SERIES_WINDOW = 1000
SERIES_STRIDE = 1000
SHADOW_WINDOW = 500

RESULT_COLUMNS = [
    "config_id",
    "stream",
    "learner",
    "query",
    "strategy",
    "ensemble",
    "budget",
    "seed",
    "lambda_max",
    "window_policy",
    "alpha_theta",
    "global_kappa",
    "stable_kappa",
    "drift_kappa",
    "balanced_kappa",
    "accuracy",
    "spending",
    "labeled",
    "update_count",
    "elevations",
    "elevation_tp",
    "elevation_fp",
]


@dataclass(frozen=True)
class GridCell:
    strategy: str
    budget_index: int
    seed: int


class ShadowElevationJudge:
    """Full-label shadow errors for both ensemble slots, to grade elevations.

    The evaluator knows every true label even though the learners only see
    queried ones, so it can keep windowed 0/1 error estimates per slot and
    check whether each elevation replaced the slot that was truly worse.
    """

    def __init__(self, window: int = SHADOW_WINDOW):
        self._risky_errors: deque[float] = deque(maxlen=window)
        self._standard_errors: deque[float] = deque(maxlen=window)
        self._judged = 0
        self.true_positives = 0
        self.false_positives = 0

    def observe(self, labeled, model) -> None:
        scores_risky, scores_standard = model.last_slot_predictions
        label = labeled.label
        self._risky_errors.append(1.0 if argmax_label(scores_risky) != label else 0.0)
        self._standard_errors.append(1.0 if argmax_label(scores_standard) != label else 0.0)
        events = model.elevation_events
        while self._judged < len(events):
            event = events[self._judged]
            self._judged += 1
            mean_risky = sum(self._risky_errors) / len(self._risky_errors)
            mean_standard = sum(self._standard_errors) / len(self._standard_errors)
            if mean_risky > mean_standard:
                truly_worse = "risky"
            elif mean_standard > mean_risky:
                truly_worse = "standard"
            else:
                truly_worse = None
            if truly_worse is not None and event.replaced_slot == truly_worse:
                self.true_positives += 1
            else:
                self.false_positives += 1


def build_stream(config: ExperimentConfig, seed: int):
    key = config.stream.lower()
    if key in PRESETS:
        return make_stream(key, seed, config.length)
    path = config.stream
    if not os.path.exists(path):
        raise ContractError(f"stream {config.stream!r} is neither a preset nor a file")
    with open(path, "r", encoding="utf-8") as handle:
        head = handle.read(256).lstrip().lower()
    if head.startswith("@relation") or head.startswith("%"):
        return read_attribute_relation(path)
    return read_delimited(
        path,
        delimiter=config.delimiter,
        label_column=config.label_column,
        class_count=config.classes,
    )


def build_learner(config: ExperimentConfig, class_count: int, n_features: int, alpha_theta: float):
    if config.learner == "nb":
        return GaussianNaiveBayes(class_count, n_features)
    if config.learner == "sgd":
        return LinearSgdClassifier(
            class_count, n_features, learning_rate=config.learning_rate, loss=config.loss
        )
    if config.learner == "ht":
        return HoeffdingTree(class_count, n_features)
    if config.learner == "aht":
        return AdaptiveHoeffdingTree(class_count, n_features, monitor_delta=alpha_theta)
    raise ContractError(f"unknown learner {config.learner!r}")


def build_query(kind: str, budget: float):
    if kind == "random":
        return RandomQuery(budget)
    if kind == "randvar":
        return VariableUncertaintyQuery()
    if kind == "selective":
        return SelectiveSamplingQuery()
    raise ContractError(f"unknown query strategy {kind!r}")


def build_selection(strategy: str, gamma: float):
    if strategy == "uw":
        return UniformSelection()
    if strategy == "ew":
        return ExponentialSelection(gamma)
    if strategy == "se":
        return NewestOnlySelection()
    raise ContractError(f"unknown selection strategy {strategy!r}")


def build_cap_policy(policy: str, limit: int):
    if policy == "fixed":
        return FixedCap(limit)
    if policy == "dynamic":
        return ErrorShrinkCap(limit)
    if policy == "adwin":
        return AdaptiveWidthCap()
    raise ContractError(f"unknown window policy {policy!r}")


def build_model(
    config: ExperimentConfig,
    strategy: str,
    budget: float,
    alpha_theta: float,
    lambda_max: int,
    seed: int,
    class_count: int,
    n_features: int,
):
    query = build_query(config.query, budget)
    rng_query = make_rng(seed, "query")
    learner = build_learner(config, class_count, n_features, alpha_theta)
    if strategy == "baseline":
        return PlainActiveLearner(learner, budget, query, rng_query)
    wrapper = ExploitingClassifier(
        learner,
        build_selection(strategy, config.gamma),
        lambda_max,
        make_rng(seed, "replay"),
        budget=budget,
        query=query if config.ensemble == "none" else None,
        rng_query=rng_query if config.ensemble == "none" else None,
        dynamic_intensity=config.dynamic_intensity,
        cap_policy=build_cap_policy(config.window_policy, config.window_limit),
        monitor_delta=alpha_theta,
    )
    if config.ensemble == "none":
        return wrapper
    standard = build_learner(config, class_count, n_features, alpha_theta)
    return PairedEnsemble(
        wrapper,
        standard,
        budget,
        query,
        rng_query,
        mode=config.ensemble,
        significance=config.alpha_e,
        estimator_delta=alpha_theta,
    )


def config_id(config: ExperimentConfig, strategy: str) -> str:
    parts = [config.stream.lower(), config.learner, config.query, strategy]
    if config.ensemble != "none":
        parts.append(config.ensemble)
    return "-".join(parts)


def run_cell(config: ExperimentConfig, cell: GridCell) -> tuple[dict, float]:
    """Run one grid cell; returns (result row, elapsed milliseconds)."""
    budget = config.budgets[cell.budget_index]
    alpha_theta = config.alpha_theta[cell.budget_index]
    lambda_max = config.lambda_max[cell.budget_index] if cell.strategy != "baseline" else 0
    stream = build_stream(config, cell.seed)
    model = build_model(
        config,
        cell.strategy,
        budget,
        alpha_theta,
        lambda_max,
        cell.seed,
        stream.class_count,
        stream.n_features,
    )
    judge = ShadowElevationJudge() if isinstance(model, PairedEnsemble) else None
    tracker = SlidingKappa(stream.class_count, SERIES_WINDOW)
    report = run_test_then_train(
        model, stream, series_tracker=tracker, series_stride=SERIES_STRIDE, observer=judge
    )
    segments = segment_average(report.series, stream.drift_schedule)
    if cell.strategy == "baseline":
        policy_label = "none"
    elif config.window_policy == "adwin":
        policy_label = "adwin"
    else:
        policy_label = f"{config.window_policy}({config.window_limit})"
    row = {
        "config_id": config_id(config, cell.strategy),
        "stream": config.stream.lower(),
        "learner": config.learner,
        "query": config.query,
        "strategy": cell.strategy,
        "ensemble": config.ensemble,
        "budget": _fmt(budget),
        "seed": str(cell.seed),
        "lambda_max": str(lambda_max),
        "window_policy": policy_label,
        "alpha_theta": _fmt(alpha_theta),
        "global_kappa": _fmt(report.global_kappa),
        "stable_kappa": _fmt(segments.stable),
        "drift_kappa": _fmt(segments.drift),
        "balanced_kappa": _fmt(segments.balanced),
        "accuracy": _fmt(report.accuracy),
        "spending": _fmt(report.spending),
        "labeled": str(report.labeled),
        "update_count": str(report.update_count),
        "elevations": str(len(report.elevations)),
        "elevation_tp": str(judge.true_positives if judge else 0),
        "elevation_fp": str(judge.false_positives if judge else 0),
    }
    return row, report.elapsed_ms


def _fmt(value) -> str:
    if value is None:
        return ""
    return f"{value:.6f}"


def _cells(config: ExperimentConfig, seeds) -> list[GridCell]:
    return [
        GridCell(strategy, b_idx, seed)
        for strategy in config.strategies
        for b_idx in range(len(config.budgets))
        for seed in seeds
    ]


def _run_cell_job(args: tuple[ExperimentConfig, GridCell]) -> tuple[dict, float]:
    return run_cell(*args)


def resolve_output_path(config: ExperimentConfig, output: str | None) -> str:
    if output is None:
        output = config.output
    if output is None:
        output = f"{config.stream.lower()}_{config.learner}_results.csv"
    if os.path.isabs(output):
        return output
    return os.path.join(os.environ.get(OUTPUT_DIR_ENV, "."), output)


def timings_path(results_path: str) -> str:
    stem, ext = os.path.splitext(results_path)
    return f"{stem}_timings{ext or '.csv'}"


def run_grid(
    config: ExperimentConfig,
    *,
    jobs: int = 1,
    output: str | None = None,
    seed_override: int | None = None,
) -> tuple[list[dict], str]:
    """Run every grid cell and write the results CSV (plus timing sidecar)."""
    seeds = (seed_override,) if seed_override is not None else config.seeds
    cells = _cells(config, seeds)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_cell_job, [(config, cell) for cell in cells]))
    else:
        outcomes = [run_cell(config, cell) for cell in cells]
    rows = [row for row, _ in outcomes]
    path = resolve_output_path(config, output)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=RESULT_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    with open(timings_path(path), "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["config_id", "strategy", "budget", "seed", "elapsed_ms"])
        for (row, elapsed) in outcomes:
            writer.writerow(
                [row["config_id"], row["strategy"], row["budget"], row["seed"], f"{elapsed:.3f}"]
            )
    return rows, path
