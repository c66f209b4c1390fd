"""Export trained Keras / PyTorch sequential models to the frontprop
interchange JSON format, with prediction-parity verification."""

from .report import (
    PARITY_TOLERANCE,
    ExportError,
    ExportReport,
    UnmappableLayerError,
)
from .reference import evaluate, evaluate_batch, load_document


def export_model(source, out_path, framework: str, verify: int = 100, seed: int = 42):
    """Dispatch to the framework-specific exporter.  framework: 'tf' | 'torch'."""
    if framework == "tf":
        from .keras_export import export_keras

        return export_keras(source, out_path, verify=verify, seed=seed)
    if framework == "torch":
        from .torch_export import export_torch

        return export_torch(source, out_path, verify=verify, seed=seed)
    raise ValueError(f"unknown framework: {framework!r} (expected 'tf' or 'torch')")


__all__ = [
    "PARITY_TOLERANCE",
    "ExportError",
    "ExportReport",
    "UnmappableLayerError",
    "evaluate",
    "evaluate_batch",
    "load_document",
    "export_model",
]
