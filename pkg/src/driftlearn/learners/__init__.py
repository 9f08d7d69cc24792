from .bayes import GaussianNaiveBayes
from .linear import LinearSgdClassifier
from .tree import AdaptiveHoeffdingTree, HoeffdingTree

__all__ = [
    "GaussianNaiveBayes",
    "LinearSgdClassifier",
    "HoeffdingTree",
    "AdaptiveHoeffdingTree",
]
