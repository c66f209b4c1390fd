"""Keras sequential model -> interchange JSON.

Walks the layer stack, transposing Dense kernels from Keras'
(fan_in, units) storage to the interchange row-per-output-unit
orientation, then verifies the written file against the source model's
predictions on seeded random inputs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .reference import evaluate_batch, load_document
from .report import PARITY_TOLERANCE, ExportError, ExportReport, UnmappableLayerError

# keras activation identifier -> interchange activation kind
_ACTIVATION_NAMES = {
    "linear": "identity",
    "relu": "relu",
    "elu": "elu",
    "selu": "selu",
    "gelu": "gelu",
    "sigmoid": "sigmoid",
    "tanh": "tanh",
    "silu": "swish",
    "swish": "swish",
    "softsign": "softsign",
    "exponential": "exponential",
    "softplus": "softplus",
}

# keras >= 3 defines hard_sigmoid as clip((x + 3) / 6, 0, 1); the
# interchange kind is clip(0.2 x + 0.5, 0, 1).  Same name, different
# function: refusing beats exporting the wrong slope.
_HARD_SIGMOID_NOTE = (
    "this keras version's hard_sigmoid (slope 1/6 on [-3, 3]) is not the "
    "interchange hard_sigmoid (slope 0.2 on [-2.5, 2.5])"
)


def _keras():
    try:
        import keras
    except ImportError as exc:  # pragma: no cover
        raise ExportError("keras is not installed; install the 'tf' extra") from exc
    return keras


def _activation_kind(identifier, where: str) -> str:
    keras = _keras()
    name = keras.activations.serialize(identifier)
    if not isinstance(name, str):  # registered custom object / config dict
        raise UnmappableLayerError(f"{where}: custom activation {name!r}")
    if name == "hard_sigmoid":
        raise UnmappableLayerError(f"{where}: {_HARD_SIGMOID_NOTE}")
    try:
        return _ACTIVATION_NAMES[name]
    except KeyError:
        raise UnmappableLayerError(f"{where}: activation {name!r}") from None


def _convert_layers(model, report: ExportReport) -> list[dict]:
    keras = _keras()
    out: list[dict] = []

    def describe(layer):
        return f"layer {len(out)} ({type(layer).__name__} '{layer.name}')"

    def fuse_or_fail(layer, kind: str):
        # a standalone activation is representable only as the activation
        # slot of the dense layer directly before it
        if out and out[-1]["type"] == "dense" and out[-1]["activation"] == "identity":
            out[-1]["activation"] = kind
            report.layers.append(
                {"source": type(layer).__name__, "interchange": f"dense activation {kind!r}"}
            )
            return
        raise UnmappableLayerError(
            f"{describe(layer)}: standalone activation without a preceding "
            "linear dense layer"
        )

    for layer in model.layers:
        if isinstance(layer, keras.layers.InputLayer):
            continue
        if isinstance(layer, keras.layers.Dense):
            weights = layer.get_weights()
            kernel = np.asarray(weights[0], dtype=np.float64)
            bias = (
                np.asarray(weights[1], dtype=np.float64)
                if layer.use_bias
                else np.zeros(kernel.shape[1])
            )
            name = _keras().activations.serialize(layer.activation)
            if name == "softmax":
                out.append(
                    {
                        "type": "dense",
                        "weights": kernel.T.tolist(),
                        "bias": bias.tolist(),
                        "activation": "identity",
                    }
                )
                out.append({"type": "softmax"})
                report.layers.append(
                    {"source": "Dense(softmax)", "interchange": "dense + softmax"}
                )
                continue
            kind = _activation_kind(layer.activation, describe(layer))
            out.append(
                {
                    "type": "dense",
                    "weights": kernel.T.tolist(),
                    "bias": bias.tolist(),
                    "activation": kind,
                }
            )
            report.layers.append({"source": f"Dense({name})", "interchange": "dense"})
        elif isinstance(layer, keras.layers.Dropout):
            out.append({"type": "dropout", "rate": float(layer.rate)})
            report.layers.append({"source": "Dropout", "interchange": "dropout"})
        elif isinstance(layer, keras.layers.BatchNormalization):
            axis = layer.axis if isinstance(layer.axis, int) else layer.axis[0]
            if axis not in (-1, 1):
                raise UnmappableLayerError(f"{describe(layer)}: axis {layer.axis}")
            mean = np.asarray(layer.moving_mean, dtype=np.float64)
            var = np.asarray(layer.moving_variance, dtype=np.float64)
            gamma = (
                np.asarray(layer.gamma, dtype=np.float64)
                if layer.scale
                else np.ones_like(mean)
            )
            beta = (
                np.asarray(layer.beta, dtype=np.float64)
                if layer.center
                else np.zeros_like(mean)
            )
            out.append(
                {
                    "type": "batch_norm",
                    "gamma": gamma.tolist(),
                    "beta": beta.tolist(),
                    "moving_mean": mean.tolist(),
                    "moving_var": var.tolist(),
                    "epsilon": float(layer.epsilon),
                }
            )
            report.layers.append(
                {"source": "BatchNormalization", "interchange": "batch_norm"}
            )
        elif isinstance(layer, keras.layers.Softmax):
            if layer.axis not in (-1, 1):
                raise UnmappableLayerError(f"{describe(layer)}: axis {layer.axis}")
            out.append({"type": "softmax"})
            report.layers.append({"source": "Softmax", "interchange": "softmax"})
        elif isinstance(layer, keras.layers.Activation):
            fuse_or_fail(layer, _activation_kind(layer.activation, describe(layer)))
        elif isinstance(layer, keras.layers.ReLU):
            if layer.max_value is not None or layer.threshold != 0 or layer.negative_slope != 0:
                raise UnmappableLayerError(
                    f"{describe(layer)}: parameterized ReLU variants are not representable"
                )
            fuse_or_fail(layer, "relu")
        elif isinstance(layer, keras.layers.ELU):
            if float(layer.alpha) != 1.0:
                raise UnmappableLayerError(
                    f"{describe(layer)}: elu alpha {layer.alpha} != 1"
                )
            fuse_or_fail(layer, "elu")
        else:
            raise UnmappableLayerError(describe(layer))
    return out


def _input_dim(model) -> int:
    shape = model.inputs[0].shape
    if len(shape) != 2 or shape[-1] is None:
        raise ExportError(f"expected (batch, features) input, got {tuple(shape)}")
    return int(shape[-1])


def export_keras(
    source,
    out_path: str | Path,
    verify: int = 100,
    seed: int = 42,
    tolerance: float = PARITY_TOLERANCE,
) -> ExportReport:
    """Export a keras model (object or saved-model path) and verify parity."""
    keras = _keras()
    if isinstance(source, (str, Path)):
        model = keras.models.load_model(source, compile=False)
        source_name = str(source)
    else:
        model, source_name = source, getattr(source, "name", "keras model")
    if verify < 100:
        raise ExportError(f"verification needs >= 100 inputs, got {verify}")

    report = ExportReport(
        framework="tf",
        source=source_name,
        output=str(out_path),
        verify_count=verify,
        seed=seed,
        tolerance=tolerance,
    )
    doc = {
        "schema_version": 1,
        "input_dim": _input_dim(model),
        "name": model.name,
        "layers": _convert_layers(model, report),
    }
    Path(out_path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    rng = np.random.default_rng(seed)
    inputs = rng.standard_normal((verify, doc["input_dim"])).astype(np.float32)
    got = np.asarray(model(inputs, training=False), dtype=np.float64)
    want = evaluate_batch(load_document(out_path), inputs)
    diff = np.abs(got - want)
    report.parity = float(diff.max())
    if report.parity > tolerance:
        worst = int(diff.max(axis=tuple(range(1, diff.ndim))).argmax())
        raise ExportError(
            f"parity {report.parity:.3e} exceeds {tolerance:.0e} at verification "
            f"input {worst}: {inputs[worst].tolist()}"
        )
    return report
