"""Forward propagation of affine maps: the local linear surrogate engine.

A single forward pass records every pre-activation at the base instance.
The surrogate starts as the identity map on the inputs (each input kept as
a symbolic placeholder) and is folded through the layers in order:

* dense        -- compose the exact affine W x + b, then replace each
                  unit's activation by its tangent line at the traced
                  pre-activation;
* dropout      -- identity at inference;
* batch norm   -- exact affine (inference mode), no approximation;
* softmax      -- first-order expansion around the traced probabilities,
                  with the intercept pinned so the base output is exact.

The result is one affine map per output dimension whose value at the base
instance equals the network output exactly (up to double-precision
accumulation), and whose coefficient matrix is the network Jacobian
wherever all activations are differentiable at their traced inputs.

Cost: exactly one network evaluation; the map folding itself does
O(sum_h N_h * N_{h-1} * N_in) arithmetic on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import activation_derivative, activation_eval
from .model_io import BatchNormLayer, DenseLayer, DropoutLayer, ModelSpec, SoftmaxLayer
from .network import ForwardTrace, forward

# Largest acceptable |surrogate(base) - network(base)| per component;
# double-precision accumulation stays orders of magnitude below this.
BASE_EXACTNESS_TOL = 1e-9


@dataclass(frozen=True)
class AffineMap:
    """L(x) = coefficients @ x + intercept.

    Rows track the units of the layer being propagated; columns always
    index the model inputs.  Intercepts are carried explicitly rather than
    folded into a homogeneous coordinate.
    """

    coefficients: np.ndarray  # (rows, n_inputs)
    intercept: np.ndarray  # (rows,)

    def __post_init__(self):
        object.__setattr__(
            self, "coefficients", np.asarray(self.coefficients, dtype=np.float64)
        )
        object.__setattr__(self, "intercept", np.asarray(self.intercept, dtype=np.float64))
        if self.coefficients.ndim != 2:
            raise ValueError("coefficients must be a matrix")
        if self.intercept.shape != (self.coefficients.shape[0],):
            raise ValueError(
                f"intercept length {self.intercept.shape} does not match "
                f"{self.coefficients.shape[0]} coefficient rows"
            )

    @property
    def rows(self) -> int:
        return self.coefficients.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.coefficients.shape[1]

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(coefficients=np.eye(n), intercept=np.zeros(n))

    def __call__(self, x) -> np.ndarray:
        return self.coefficients @ np.asarray(x, dtype=np.float64) + self.intercept


@dataclass(frozen=True)
class Linearization:
    """Tangent line q(s) = slope * s + intercept of an activation at its
    traced pre-activation.  Scalar for one unit, or per-unit arrays for a
    whole layer (both broadcast identically)."""

    slope: float | np.ndarray
    intercept: float | np.ndarray


def linearize_activation(kind: str, s_base) -> Linearization:
    """Tangent line of `kind` at s_base; exact there by construction."""
    m = activation_derivative(kind, s_base)
    n = activation_eval(kind, s_base) - m * np.asarray(s_base, dtype=np.float64)
    return Linearization(slope=m, intercept=n)


def compose_dense(weights: np.ndarray, bias: np.ndarray, incoming: AffineMap) -> AffineMap:
    """Affine map entering a dense layer's activations: W . incoming + b."""
    if weights.shape[1] != incoming.rows:
        raise ValueError(
            f"weights fan_in {weights.shape[1]} does not match incoming rows {incoming.rows}"
        )
    return AffineMap(
        coefficients=weights @ incoming.coefficients,
        intercept=weights @ incoming.intercept + bias,
    )


def apply_linearization(lin: Linearization, pre: AffineMap) -> AffineMap:
    """Substitute the pre-activation map into each unit's tangent line."""
    slope = np.asarray(lin.slope, dtype=np.float64)
    col = slope if slope.ndim == 0 else slope[:, np.newaxis]
    return AffineMap(
        coefficients=col * pre.coefficients,
        intercept=slope * pre.intercept + lin.intercept,
    )


def linearize_batch_norm(layer: BatchNormLayer, incoming: AffineMap) -> AffineMap:
    """Fold inference-mode batch norm, an exact per-unit affine y = a x + c."""
    a = layer.gamma / np.sqrt(layer.moving_var + layer.epsilon)
    c = layer.beta - a * layer.moving_mean
    return apply_linearization(Linearization(slope=a, intercept=c), incoming)


def linearize_softmax(
    p_base: np.ndarray, logits_base: np.ndarray, incoming: AffineMap
) -> AffineMap:
    """First-order softmax around the traced point.

    Jacobian diag(p) - p p^T, intercept pinned so the map reproduces
    p_base exactly at the base instance (logits_base is the traced input
    to the softmax, i.e. the value of `incoming` there).
    """
    p = np.asarray(p_base, dtype=np.float64)
    jac = np.diag(p) - np.outer(p, p)
    return AffineMap(
        coefficients=jac @ incoming.coefficients,
        intercept=p - jac @ np.asarray(logits_base, dtype=np.float64) + jac @ incoming.intercept,
    )


@dataclass(frozen=True)
class Explanation:
    """Local surrogate around one instance, plus its attribution view.

    contributions[k, j] = coefficient[k, j] * base_instance[j]: input j's
    share of output k.  Each row plus its intercept reassembles the base
    output.  flags lists activation kinks hit exactly at the base instance
    (local fidelity degrades there).
    """

    base_instance: np.ndarray
    base_output: np.ndarray
    affine: AffineMap
    contributions: np.ndarray
    flags: tuple[str, ...] = ()

    def base_residual(self) -> float:
        """max |affine(base) - base_output|, the exactness defect."""
        return float(np.max(np.abs(self.affine(self.base_instance) - self.base_output)))

    def to_dict(self) -> dict:
        return {
            "base_instance": self.base_instance.tolist(),
            "base_output": self.base_output.tolist(),
            "coefficients": self.affine.coefficients.tolist(),
            "intercept": self.affine.intercept.tolist(),
            "contributions": self.contributions.tolist(),
            "flags": list(self.flags),
        }


_KINK_POINTS = {"relu": (0.0,), "hard_sigmoid": (-2.5, 2.5)}


def _kink_flags(layer_index: int, activation: str, s: np.ndarray) -> list[str]:
    points = _KINK_POINTS.get(activation)
    if points is None:
        return []
    flags = []
    for point in points:
        for unit in np.nonzero(s == point)[0]:
            flags.append(f"{activation}_kink_at_layer_{layer_index}_unit_{unit}")
    return flags


def propagate(model: ModelSpec, trace: ForwardTrace) -> tuple[AffineMap, tuple[str, ...]]:
    """Fold all layers over the identity input map, given a base trace."""
    affine = AffineMap.identity(model.input_dim)
    flags: list[str] = []
    for i, (layer, layer_trace) in enumerate(zip(model.layers, trace.layers)):
        if isinstance(layer, DenseLayer):
            pre = compose_dense(layer.weights, layer.bias, affine)
            s = layer_trace.pre_activation
            affine = apply_linearization(linearize_activation(layer.activation, s), pre)
            flags.extend(_kink_flags(i, layer.activation, s))
        elif isinstance(layer, DropoutLayer):
            pass
        elif isinstance(layer, BatchNormLayer):
            affine = linearize_batch_norm(layer, affine)
        elif isinstance(layer, SoftmaxLayer):
            affine = linearize_softmax(layer_trace.output, layer_trace.pre_activation, affine)
        else:
            raise TypeError(f"not a layer: {type(layer).__name__}")
    return affine, tuple(flags)


def frontprop(model: ModelSpec, x_base) -> Explanation:
    """Extract the local affine surrogate around x_base in one pass."""
    x = np.asarray(x_base, dtype=np.float64)
    trace = forward(model, x)  # the single network evaluation
    affine, flags = propagate(model, trace)
    return Explanation(
        base_instance=x,
        base_output=trace.output,
        affine=affine,
        contributions=affine.coefficients * x[np.newaxis, :],
        flags=flags,
    )
