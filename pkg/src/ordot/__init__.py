"""Exact 1-D Wasserstein losses for ordinal classification.

Histograms over an ordered class scale, ground metrics built from |i - j|,
closed-form transport distances with analytic logit gradients, a Sinkhorn
baseline, unimodal-uniform label smoothing, ordinal evaluation metrics,
and a small training harness for loss comparisons.
"""

from . import errors
from .exact import (
    TransportPlan,
    lp_oracle,
    monotone_plan,
    wasserstein_convex,
    wasserstein_linear,
    wasserstein_onehot,
    wasserstein_step,
)
from .ground_metric import GroundMatrix, MetricFamily, base_distance, build_ground_matrix
from .histograms import Histogram, OneHotLabel, cumulative, make_histogram, one_hot
from .losses import (
    LossSpec,
    LossValueGrad,
    batch_loss_and_grad,
    loss_and_grad,
    regression_readout_loss,
    softmax,
)
from .metrics import (
    EvalReport,
    accuracy,
    evaluate_probs,
    mae,
    mean_tnr_at_tpr,
    qwk,
    threshold_splits,
    tnr_at_tpr,
)
from .sinkhorn import SinkhornConfig, sinkhorn_distance, sinkhorn_plan
from .smoothing import SmoothingConfig, smooth_label, smoothing_table, unimodal_distribution
from .trainer import (
    ExperimentConfig,
    MlpModel,
    OrdinalDataset,
    SyntheticOrdinalConfig,
    TrainConfig,
    TrainResult,
    TrainValData,
    comparison_to_csv,
    comparison_to_text,
    generate_synthetic,
    run_comparison,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "Histogram",
    "OneHotLabel",
    "make_histogram",
    "one_hot",
    "cumulative",
    "MetricFamily",
    "GroundMatrix",
    "base_distance",
    "build_ground_matrix",
    "TransportPlan",
    "wasserstein_onehot",
    "wasserstein_linear",
    "wasserstein_convex",
    "wasserstein_step",
    "monotone_plan",
    "lp_oracle",
    "SinkhornConfig",
    "sinkhorn_distance",
    "sinkhorn_plan",
    "SmoothingConfig",
    "unimodal_distribution",
    "smooth_label",
    "smoothing_table",
    "LossSpec",
    "LossValueGrad",
    "softmax",
    "loss_and_grad",
    "batch_loss_and_grad",
    "regression_readout_loss",
    "EvalReport",
    "accuracy",
    "mae",
    "qwk",
    "tnr_at_tpr",
    "mean_tnr_at_tpr",
    "threshold_splits",
    "evaluate_probs",
    "MlpModel",
    "SyntheticOrdinalConfig",
    "OrdinalDataset",
    "generate_synthetic",
    "TrainConfig",
    "TrainValData",
    "TrainResult",
    "ExperimentConfig",
    "train",
    "run_comparison",
    "comparison_to_csv",
    "comparison_to_text",
    "__version__",
]
