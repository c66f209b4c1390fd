"""Single-instance forward evaluation with per-layer trace recording.

Dense layers compute W x + b then the elementwise activation; dropout is
the identity at inference (inverted-dropout training assumed); batch norm
applies its frozen inference-mode affine; softmax uses max-subtraction
for stability.  Everything runs in double precision and is deterministic:
identical (model, x) gives bit-identical traces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import activation_eval
from .model_io import BatchNormLayer, DenseLayer, DropoutLayer, ModelSpec, SoftmaxLayer

# Diagnostic count of full network evaluations since import.  A plain int
# bumped under the GIL; forward() itself stays a pure function of its
# arguments.
_pass_count = 0


def forward_pass_count() -> int:
    """Total forward evaluations performed by this process."""
    return _pass_count


@dataclass(frozen=True)
class LayerTrace:
    """What one layer saw: the vector entering its nonlinearity (None for
    layers that have none) and the vector it produced."""

    pre_activation: np.ndarray | None
    output: np.ndarray


@dataclass(frozen=True)
class ForwardTrace:
    layers: tuple[LayerTrace, ...]

    @property
    def output(self) -> np.ndarray:
        return self.layers[-1].output


def softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - np.max(z))
    return e / np.sum(e)


def forward(model: ModelSpec, x) -> ForwardTrace:
    """Evaluate the network on one instance, recording every layer."""
    global _pass_count
    _pass_count += 1

    t = np.asarray(x, dtype=np.float64)
    if t.shape != (model.input_dim,):
        raise ValueError(
            f"input has shape {t.shape}, model expects ({model.input_dim},)"
        )

    traces: list[LayerTrace] = []
    for layer in model.layers:
        if isinstance(layer, DenseLayer):
            if layer.weights.shape[1] != t.shape[0]:
                raise ValueError(
                    f"dense layer expects width {layer.weights.shape[1]}, got {t.shape[0]}"
                )
            s = layer.weights @ t + layer.bias
            t = np.asarray(activation_eval(layer.activation, s))
            traces.append(LayerTrace(pre_activation=s, output=t))
        elif isinstance(layer, DropoutLayer):
            traces.append(LayerTrace(pre_activation=None, output=t))
        elif isinstance(layer, BatchNormLayer):
            t = layer.gamma * (t - layer.moving_mean) / np.sqrt(
                layer.moving_var + layer.epsilon
            ) + layer.beta
            traces.append(LayerTrace(pre_activation=None, output=t))
        elif isinstance(layer, SoftmaxLayer):
            z = t
            t = softmax(z)
            traces.append(LayerTrace(pre_activation=z, output=t))
        else:
            raise TypeError(f"not a layer: {type(layer).__name__}")
    return ForwardTrace(layers=tuple(traces))
