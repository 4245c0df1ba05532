"""Additive decomposition of MLP predictions by stepwise Taylor path
integration from model-specific root points."""

from .attribution import (
    AttributionResult,
    GridSpec,
    build_path,
    integrated_gradients_reference,
    redistribute_baseline,
    stepwise_attribute,
)
from .data import StandardizationStats, load_dataset, standardize
from .deep import (
    ContributionMatrix,
    DeepAttribution,
    ThresholdSpec,
    deep_explain,
    domains_from_data,
    explain_dataset,
    layer_attribute,
    to_share_matrix,
)
from .errors import (
    DeepExplainError,
    InfeasibleTarget,
    ToleranceNotReached,
)
from .links import LinkFunction, is_trivial, link_deriv, link_eval
from .model import ForwardTrace, Layer, MlpModel, forward, load_model, save_model
from .report import emit_decomposition
from .rootfind import (
    InputDomain,
    RootPoint,
    RootTarget,
    attainable_extremum,
    solve_root,
)

__version__ = "0.1.0"
