"""Oracle upper bounds on human-ML complementarity.

Given two agents' predictions and the true targets, compute the best
per-instance convex combination under a chosen evaluation function and
summarize how the weights are spread (routing vs. blending).
"""

__version__ = "0.1.0"

from .combiner import (
    CombinerConfig,
    closed_form_weight,
    grid_oracle,
    optimize_weights,
    optimize_weights_general,
    optimize_weights_mse,
)
from .core import (
    ComplementarityReport,
    PredictionSet,
    WeightVector,
    c_across,
    c_within,
    check_complementarity,
    summarize_report,
)
from .errors import (
    ComplementarityError,
    ExperimentError,
    IllConditionedError,
    InvalidConfigError,
    StructuralError,
)
from .objectives import EvaluationSpec, eval_blended, eval_mse, eval_rank_weighted, v_weights

__all__ = [
    "CombinerConfig",
    "ComplementarityError",
    "ComplementarityReport",
    "EvaluationSpec",
    "ExperimentError",
    "IllConditionedError",
    "InvalidConfigError",
    "PredictionSet",
    "StructuralError",
    "WeightVector",
    "c_across",
    "c_within",
    "check_complementarity",
    "closed_form_weight",
    "eval_blended",
    "eval_mse",
    "eval_rank_weighted",
    "grid_oracle",
    "optimize_weights",
    "optimize_weights_general",
    "optimize_weights_mse",
    "summarize_report",
    "v_weights",
]
