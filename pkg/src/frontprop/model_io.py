"""JSON interchange format for sequential feed-forward models.

The on-disk contract (schema_version 1):

    {
      "schema_version": 1,
      "name": "optional",
      "input_dim": 20,
      "feature_ranges": [[0.0, 1.0], ...],          // optional
      "layers": [
        {"type": "dense", "weights": [[...], ...], "bias": [...],
         "activation": "relu"},
        {"type": "dropout", "rate": 0.2},
        {"type": "batch_norm", "gamma": [...], "beta": [...],
         "moving_mean": [...], "moving_var": [...], "epsilon": 1e-5},
        {"type": "softmax"}
      ]
    }

Dense weights are stored row-per-output-unit: weights[j][k] is the weight
from input k of the layer to unit j, so each row is one unit's weight
vector.  All numbers are parsed at double precision regardless of the
precision the exporter emitted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .activations import ACTIVATION_KINDS

SCHEMA_VERSION = 1


class ModelIOError(Exception):
    """Base class for model loading/validation failures."""


class ModelParseError(ModelIOError):
    """The file is not valid JSON."""


class ModelSchemaError(ModelIOError):
    """The JSON parses but does not follow the interchange schema
    (unknown layer kind or activation, version mismatch, missing or
    mistyped fields)."""


class ModelShapeError(ModelIOError):
    """A structurally parsed model violates its invariants: layer
    dimension mismatches or out-of-range layer parameters."""


@dataclass(frozen=True, eq=False)
class DenseLayer:
    weights: np.ndarray  # (units, fan_in)
    bias: np.ndarray  # (units,)
    activation: str

    kind = "dense"

    def __eq__(self, other):
        return (
            isinstance(other, DenseLayer)
            and self.activation == other.activation
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.bias, other.bias)
        )


@dataclass(frozen=True, eq=False)
class DropoutLayer:
    rate: float

    kind = "dropout"

    def __eq__(self, other):
        return isinstance(other, DropoutLayer) and self.rate == other.rate


@dataclass(frozen=True, eq=False)
class BatchNormLayer:
    gamma: np.ndarray
    beta: np.ndarray
    moving_mean: np.ndarray
    moving_var: np.ndarray
    epsilon: float

    kind = "batch_norm"

    def __eq__(self, other):
        return (
            isinstance(other, BatchNormLayer)
            and self.epsilon == other.epsilon
            and np.array_equal(self.gamma, other.gamma)
            and np.array_equal(self.beta, other.beta)
            and np.array_equal(self.moving_mean, other.moving_mean)
            and np.array_equal(self.moving_var, other.moving_var)
        )


@dataclass(frozen=True, eq=False)
class SoftmaxLayer:
    kind = "softmax"

    def __eq__(self, other):
        return isinstance(other, SoftmaxLayer)


Layer = Union[DenseLayer, DropoutLayer, BatchNormLayer, SoftmaxLayer]


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Immutable ordered layer sequence plus input dimension."""

    input_dim: int
    layers: tuple[Layer, ...]
    schema_version: int = SCHEMA_VERSION
    name: str | None = None
    feature_ranges: np.ndarray | None = None  # (input_dim, 2) min/max per input

    @property
    def output_dim(self) -> int:
        return self.layer_widths()[-1]

    def layer_widths(self) -> list[int]:
        """Width of the vector leaving each layer, in order."""
        widths = []
        w = self.input_dim
        for layer in self.layers:
            if isinstance(layer, DenseLayer):
                w = layer.weights.shape[0]
            widths.append(w)
        return widths

    def __eq__(self, other):
        if not isinstance(other, ModelSpec):
            return NotImplemented
        if (
            self.input_dim != other.input_dim
            or self.schema_version != other.schema_version
            or self.name != other.name
            or self.layers != other.layers
        ):
            return False
        if (self.feature_ranges is None) != (other.feature_ranges is None):
            return False
        return self.feature_ranges is None or np.array_equal(
            self.feature_ranges, other.feature_ranges
        )


@dataclass(frozen=True)
class Diagnostic:
    """One invariant violation: which layer (None = model level) and why."""

    layer: int | None
    reason: str

    def __str__(self):
        where = "model" if self.layer is None else f"layer {self.layer}"
        return f"{where}: {self.reason}"


def _require(mapping: dict, key: str, context: str):
    if key not in mapping:
        raise ModelSchemaError(f"{context}: missing required field {key!r}")
    return mapping[key]


def _as_matrix(raw, context: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ModelSchemaError(f"{context}: not a rectangular numeric matrix ({exc})") from None
    if arr.ndim != 2:
        raise ModelSchemaError(f"{context}: expected a 2-D matrix, got ndim={arr.ndim}")
    return arr


def _as_vector(raw, context: str) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ModelSchemaError(f"{context}: not a numeric vector ({exc})") from None
    if arr.ndim != 1:
        raise ModelSchemaError(f"{context}: expected a 1-D vector, got ndim={arr.ndim}")
    return arr


def _layer_from_dict(raw: dict, index: int) -> Layer:
    ctx = f"layer {index}"
    if not isinstance(raw, dict):
        raise ModelSchemaError(f"{ctx}: expected an object")
    kind = _require(raw, "type", ctx)
    if kind == "dense":
        weights = _as_matrix(_require(raw, "weights", ctx), f"{ctx} weights")
        bias = _as_vector(_require(raw, "bias", ctx), f"{ctx} bias")
        activation = _require(raw, "activation", ctx)
        if activation not in ACTIVATION_KINDS:
            raise ModelSchemaError(f"{ctx}: unknown activation {activation!r}")
        return DenseLayer(weights=weights, bias=bias, activation=activation)
    if kind == "dropout":
        return DropoutLayer(rate=float(_require(raw, "rate", ctx)))
    if kind == "batch_norm":
        return BatchNormLayer(
            gamma=_as_vector(_require(raw, "gamma", ctx), f"{ctx} gamma"),
            beta=_as_vector(_require(raw, "beta", ctx), f"{ctx} beta"),
            moving_mean=_as_vector(_require(raw, "moving_mean", ctx), f"{ctx} moving_mean"),
            moving_var=_as_vector(_require(raw, "moving_var", ctx), f"{ctx} moving_var"),
            epsilon=float(_require(raw, "epsilon", ctx)),
        )
    if kind == "softmax":
        return SoftmaxLayer()
    raise ModelSchemaError(f"{ctx}: unknown layer kind {kind!r}")


def model_from_dict(raw: dict) -> ModelSpec:
    """Build a ModelSpec from a parsed JSON object, without validation."""
    if not isinstance(raw, dict):
        raise ModelSchemaError("top level: expected an object")
    version = _require(raw, "schema_version", "top level")
    if version != SCHEMA_VERSION:
        raise ModelSchemaError(
            f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})"
        )
    input_dim = _require(raw, "input_dim", "top level")
    if not isinstance(input_dim, int) or isinstance(input_dim, bool):
        raise ModelSchemaError("input_dim must be an integer")
    layers_raw = _require(raw, "layers", "top level")
    if not isinstance(layers_raw, list):
        raise ModelSchemaError("layers must be a list")
    layers = tuple(_layer_from_dict(item, i) for i, item in enumerate(layers_raw))
    feature_ranges = None
    if raw.get("feature_ranges") is not None:
        feature_ranges = _as_matrix(raw["feature_ranges"], "feature_ranges")
        if feature_ranges.shape[1] != 2:
            raise ModelSchemaError("feature_ranges entries must be (min, max) pairs")
    name = raw.get("name")
    if name is not None and not isinstance(name, str):
        raise ModelSchemaError("name must be a string")
    return ModelSpec(
        input_dim=input_dim,
        layers=layers,
        schema_version=version,
        name=name,
        feature_ranges=feature_ranges,
    )


def validate_model(spec: ModelSpec) -> list[Diagnostic]:
    """Check every invariant; returns one diagnostic per violation.

    Empty list iff the model is evaluable without runtime shape failures.
    """
    out: list[Diagnostic] = []
    if spec.input_dim < 1:
        out.append(Diagnostic(None, f"input_dim must be >= 1, got {spec.input_dim}"))
    if not spec.layers:
        out.append(Diagnostic(None, "layers must be non-empty"))
    if spec.feature_ranges is not None:
        fr = np.asarray(spec.feature_ranges)
        if fr.ndim != 2 or fr.shape != (spec.input_dim, 2):
            out.append(
                Diagnostic(
                    None,
                    f"feature_ranges must have shape ({spec.input_dim}, 2), got {fr.shape}",
                )
            )
        else:
            bad = np.nonzero(fr[:, 0] >= fr[:, 1])[0]
            for j in bad:
                out.append(
                    Diagnostic(None, f"feature_ranges[{j}]: min must be < max, got {fr[j].tolist()}")
                )

    width = spec.input_dim
    for i, layer in enumerate(spec.layers):
        if isinstance(layer, DenseLayer):
            units, fan_in = layer.weights.shape
            if fan_in != width:
                out.append(
                    Diagnostic(i, f"dense fan_in {fan_in} does not match incoming width {width}")
                )
            if layer.bias.shape[0] != units:
                out.append(
                    Diagnostic(
                        i, f"bias length {layer.bias.shape[0]} does not match {units} units"
                    )
                )
            if layer.activation not in ACTIVATION_KINDS:
                out.append(Diagnostic(i, f"unknown activation {layer.activation!r}"))
            width = units
        elif isinstance(layer, DropoutLayer):
            if not 0.0 <= layer.rate < 1.0:
                out.append(Diagnostic(i, f"dropout rate must be in [0, 1), got {layer.rate}"))
        elif isinstance(layer, BatchNormLayer):
            for pname in ("gamma", "beta", "moving_mean", "moving_var"):
                vec = getattr(layer, pname)
                if vec.shape[0] != width:
                    out.append(
                        Diagnostic(
                            i,
                            f"batch_norm {pname} length {vec.shape[0]} does not match "
                            f"incoming width {width}",
                        )
                    )
            if layer.epsilon <= 0:
                out.append(Diagnostic(i, f"batch_norm epsilon must be > 0, got {layer.epsilon}"))
            if np.any(layer.moving_var < 0):
                out.append(Diagnostic(i, "batch_norm moving_var entries must be >= 0"))
        elif isinstance(layer, SoftmaxLayer):
            pass
        else:
            out.append(Diagnostic(i, f"unknown layer object {type(layer).__name__}"))
    return out


def load_model(path: str | Path) -> ModelSpec:
    """Load and fully validate an interchange JSON model file.

    Raises ModelParseError for malformed JSON, ModelSchemaError for schema
    violations, ModelShapeError when the parsed model fails validation.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelParseError(f"{path}: {exc}") from None
    spec = model_from_dict(raw)
    diagnostics = validate_model(spec)
    if diagnostics:
        detail = "; ".join(str(d) for d in diagnostics)
        raise ModelShapeError(f"{path}: {detail}")
    return spec


def _layer_to_dict(layer: Layer) -> dict:
    if isinstance(layer, DenseLayer):
        return {
            "type": "dense",
            "weights": layer.weights.tolist(),
            "bias": layer.bias.tolist(),
            "activation": layer.activation,
        }
    if isinstance(layer, DropoutLayer):
        return {"type": "dropout", "rate": layer.rate}
    if isinstance(layer, BatchNormLayer):
        return {
            "type": "batch_norm",
            "gamma": layer.gamma.tolist(),
            "beta": layer.beta.tolist(),
            "moving_mean": layer.moving_mean.tolist(),
            "moving_var": layer.moving_var.tolist(),
            "epsilon": layer.epsilon,
        }
    if isinstance(layer, SoftmaxLayer):
        return {"type": "softmax"}
    raise TypeError(f"not a layer: {type(layer).__name__}")


def model_to_dict(spec: ModelSpec) -> dict:
    """Serialize to the JSON interchange structure (round-trip exact)."""
    out: dict = {"schema_version": spec.schema_version}
    if spec.name is not None:
        out["name"] = spec.name
    out["input_dim"] = spec.input_dim
    if spec.feature_ranges is not None:
        out["feature_ranges"] = np.asarray(spec.feature_ranges).tolist()
    out["layers"] = [_layer_to_dict(layer) for layer in spec.layers]
    return out


def save_model(spec: ModelSpec, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(spec), fh, indent=2)
        fh.write("\n")
