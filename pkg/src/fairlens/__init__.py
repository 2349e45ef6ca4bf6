"""Fairness auditing for binary classifiers.

Given a classifier family, a tabular dataset and a set of sensitive features,
the toolkit measures the model's reliance on those features through aggregated
local surrogate explanations, flags the model when at least two of them rank
among its most important features, and mitigates by averaging feature-dropout
retrained models. Outcome fairness is scored with five group metrics.
"""

from .config import RunConfig
from .dataset import Dataset, FeatureSchema, SplitPair, load_csv, smote, split, write_csv
from .errors import ConfigError, DataFormatError, FairlensError
from .global_explain import GlobalExplanation, aggregate, submodular_pick, top_k
from .lime import Explanation, LimeConfig, explain, fit_surrogate, kernel_weight, sample_neighbors
from .metrics import (GroupConfusion, GroupSpec, MetricVector, compute_metrics,
                      counterfactual_flip_rate, demographic_parity, disparate_impact,
                      equal_accuracy, equal_opportunity, group_confusion,
                      predictive_equality)
from .models import ModelSpec, TrainedModel, accuracy, train
from .pipeline import (EnsembleModel, FairnessGateResult, RunRecord, build_pool,
                       ensemble_predict_proba, gate, run_single_audit)
from .report import (AuditRun, emit_accuracy_table, emit_explanation_tables,
                     emit_metric_points, run_audit)

__version__ = "0.1.0"

__all__ = [
    "AuditRun", "ConfigError", "DataFormatError", "Dataset", "EnsembleModel",
    "Explanation", "FairlensError", "FairnessGateResult", "FeatureSchema",
    "GlobalExplanation", "GroupConfusion", "GroupSpec", "LimeConfig",
    "MetricVector", "ModelSpec", "RunConfig", "RunRecord", "SplitPair",
    "TrainedModel", "accuracy", "aggregate", "build_pool", "compute_metrics",
    "counterfactual_flip_rate", "demographic_parity", "disparate_impact",
    "emit_accuracy_table", "emit_explanation_tables", "emit_metric_points",
    "ensemble_predict_proba", "equal_accuracy", "equal_opportunity", "explain",
    "fit_surrogate", "gate", "group_confusion", "kernel_weight", "load_csv",
    "predictive_equality", "run_audit", "run_single_audit", "sample_neighbors",
    "smote", "split", "submodular_pick", "top_k", "train", "write_csv",
]
