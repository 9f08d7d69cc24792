"""Budgeted online learning on drifting streams with instance replay."""

from .active import (
    BudgetTracker,
    RandomQuery,
    SelectiveSamplingQuery,
    VariableUncertaintyQuery,
)
from .adwin import AdwinEstimator
from .core import (
    ContractError,
    IncrementalClassifier,
    Instance,
    LabeledInstance,
    make_instance,
    make_rng,
)
from .ensemble import PairedEnsemble
from .evaluation import (
    AdaptiveKappa,
    BudgetLawError,
    ConfusionMatrix,
    GlobalKappa,
    SlidingKappa,
    friedman_bonferroni_dunn,
    run_test_then_train,
    segment_average,
)
from .exploit import (
    AdaptiveWidthCap,
    ErrorShrinkCap,
    ExploitingClassifier,
    ExponentialSelection,
    FixedCap,
    LabeledWindow,
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
from .streams import DriftingStream, FileStream, PRESETS, make_stream

__version__ = "0.1.0"

__all__ = [
    "AdaptiveHoeffdingTree",
    "AdaptiveKappa",
    "AdaptiveWidthCap",
    "AdwinEstimator",
    "BudgetLawError",
    "BudgetTracker",
    "ConfusionMatrix",
    "ContractError",
    "DriftingStream",
    "ErrorShrinkCap",
    "ExploitingClassifier",
    "ExponentialSelection",
    "FileStream",
    "FixedCap",
    "GaussianNaiveBayes",
    "GlobalKappa",
    "HoeffdingTree",
    "IncrementalClassifier",
    "Instance",
    "LabeledInstance",
    "LabeledWindow",
    "LinearSgdClassifier",
    "NewestOnlySelection",
    "PairedEnsemble",
    "PlainActiveLearner",
    "PRESETS",
    "RandomQuery",
    "SelectiveSamplingQuery",
    "SlidingKappa",
    "UniformSelection",
    "VariableUncertaintyQuery",
    "friedman_bonferroni_dunn",
    "make_instance",
    "make_rng",
    "make_stream",
    "run_test_then_train",
    "segment_average",
    "__version__",
]
