"""Shrinkage discriminant analysis with fdr-based effect-size shrinkage and
misclassification-rate feature selection."""

__version__ = "0.1.0"

from .classifier import ShrinkageDiscriminantAnalysis
from .dataset import LabeledMatrix, load_tsv, stratified_folds, write_tsv
from .effectsize import EffectEstimates, estimate_effects
from .evalharness import BenchmarkReport, crossval, run_sim_benchmark
from .exceptions import DataFormatError, DataValidationError, NumericalError
from .fdr import FdrModel, local_fdr
from .scores import ScoreSet, compute_scores
from .selection import SelectionResult, misclassification_rate, select_features
from .shrinkage import ModelParams, fit_model_params

__all__ = [
    "__version__",
    "BenchmarkReport",
    "DataFormatError",
    "DataValidationError",
    "EffectEstimates",
    "FdrModel",
    "LabeledMatrix",
    "ModelParams",
    "NumericalError",
    "ScoreSet",
    "SelectionResult",
    "ShrinkageDiscriminantAnalysis",
    "compute_scores",
    "crossval",
    "estimate_effects",
    "fit_model_params",
    "load_tsv",
    "local_fdr",
    "misclassification_rate",
    "run_sim_benchmark",
    "select_features",
    "stratified_folds",
    "write_tsv",
]
