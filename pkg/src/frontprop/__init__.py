"""Local affine surrogates of feed-forward networks in one forward pass."""

__version__ = "0.1.0"

from .activations import (
    ACTIVATION_KINDS,
    SMOOTH_KINDS,
    activation_derivative,
    activation_eval,
)
from .engine import (
    BASE_EXACTNESS_TOL,
    AffineMap,
    Explanation,
    Linearization,
    apply_linearization,
    compose_dense,
    frontprop,
    linearize_activation,
    linearize_batch_norm,
    linearize_softmax,
    propagate,
)
from .model_io import (
    BatchNormLayer,
    DenseLayer,
    Diagnostic,
    DropoutLayer,
    Layer,
    ModelIOError,
    ModelParseError,
    ModelSchemaError,
    ModelShapeError,
    ModelSpec,
    SoftmaxLayer,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    validate_model,
)
from .network import ForwardTrace, LayerTrace, forward, forward_pass_count
from .validation import (
    FidelityReport,
    PerturbationConfig,
    ScatterRecord,
    baseline_surrogate,
    evaluate_scatter,
    fd_jacobian,
    fidelity_metrics,
    max_relative_deviation,
    resolve_ranges,
    sample_neighbors,
    scatter_csv_text,
    write_scatter_csv,
)

__all__ = [
    "ACTIVATION_KINDS",
    "SMOOTH_KINDS",
    "AffineMap",
    "BASE_EXACTNESS_TOL",
    "BatchNormLayer",
    "DenseLayer",
    "Diagnostic",
    "DropoutLayer",
    "Explanation",
    "FidelityReport",
    "ForwardTrace",
    "Layer",
    "LayerTrace",
    "Linearization",
    "ModelIOError",
    "ModelParseError",
    "ModelSchemaError",
    "ModelShapeError",
    "ModelSpec",
    "PerturbationConfig",
    "ScatterRecord",
    "SoftmaxLayer",
    "activation_derivative",
    "activation_eval",
    "apply_linearization",
    "baseline_surrogate",
    "compose_dense",
    "evaluate_scatter",
    "fd_jacobian",
    "fidelity_metrics",
    "forward",
    "forward_pass_count",
    "frontprop",
    "linearize_activation",
    "linearize_batch_norm",
    "linearize_softmax",
    "load_model",
    "max_relative_deviation",
    "model_from_dict",
    "model_to_dict",
    "propagate",
    "resolve_ranges",
    "sample_neighbors",
    "save_model",
    "scatter_csv_text",
    "validate_model",
    "write_scatter_csv",
]
