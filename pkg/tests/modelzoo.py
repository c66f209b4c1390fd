"""Seeded model builders shared across the test suite.

Three fixed architectures (the golden configurations used by the fidelity
protocol) get framework-style Glorot-uniform weights; the random builders
cover every layer kind and activation across a seed sweep.
"""

from __future__ import annotations

import numpy as np

from frontprop import (
    ACTIVATION_KINDS,
    BatchNormLayer,
    DenseLayer,
    DropoutLayer,
    ModelSpec,
    SoftmaxLayer,
)

SMOOTH_MIX = ("sigmoid", "tanh", "softplus", "gelu", "swish", "elu", "selu")


def glorot_dense(rng: np.random.Generator, units: int, fan_in: int, activation: str) -> DenseLayer:
    limit = np.sqrt(6.0 / (fan_in + units))
    return DenseLayer(
        weights=rng.uniform(-limit, limit, size=(units, fan_in)),
        bias=np.zeros(units),
        activation=activation,
    )


def scaled_dense(rng: np.random.Generator, units: int, fan_in: int, activation: str) -> DenseLayer:
    return DenseLayer(
        weights=rng.uniform(-1.0, 1.0, size=(units, fan_in)) / np.sqrt(fan_in),
        bias=rng.uniform(-0.5, 0.5, size=units),
        activation=activation,
    )


def random_batch_norm(rng: np.random.Generator, width: int) -> BatchNormLayer:
    return BatchNormLayer(
        gamma=rng.uniform(0.5, 1.5, size=width),
        beta=rng.uniform(-0.5, 0.5, size=width),
        moving_mean=rng.uniform(-0.5, 0.5, size=width),
        moving_var=rng.uniform(0.1, 1.5, size=width),
        epsilon=1e-5,
    )


def random_model(seed: int) -> tuple[ModelSpec, np.ndarray]:
    """Small random model exercising every layer kind across a seed sweep.

    Seed s forces the first dense activation to kind s mod 12, so any
    12-consecutive-seed sweep covers the full activation inventory;
    dropout / batch-norm / softmax layers appear on fixed seed residues.
    A second 'exponential' in one model is swapped for softplus: stacked
    exponentials overflow double precision for generic weights.
    """
    rng = np.random.default_rng(seed)
    n_in = int(rng.integers(2, 7))
    n_dense = int(rng.integers(1, 4))

    activations = [ACTIVATION_KINDS[seed % len(ACTIVATION_KINDS)]]
    activations += [
        ACTIVATION_KINDS[int(rng.integers(0, len(ACTIVATION_KINDS)))]
        for _ in range(n_dense - 1)
    ]
    for i in range(1, len(activations)):
        if activations[i] == "exponential" and "exponential" in activations[:i]:
            activations[i] = "softplus"

    layers: list = []
    width = n_in
    for i, activation in enumerate(activations):
        units = int(rng.integers(2, 12))
        layers.append(scaled_dense(rng, units, width, activation))
        width = units
        if seed % 2 == 0 and i == 0:
            layers.append(DropoutLayer(rate=float(rng.uniform(0.0, 0.9))))
        if seed % 3 == 0 and i == len(activations) - 1:
            layers.append(random_batch_norm(rng, width))
    if seed % 5 == 0:
        layers.append(SoftmaxLayer())

    x_base = rng.uniform(-1.0, 1.0, size=n_in)
    return ModelSpec(input_dim=n_in, layers=tuple(layers)), x_base


def smooth_random_model(seed: int) -> tuple[ModelSpec, np.ndarray]:
    """Random model restricted to the smooth activation mix (<= 4 dense
    layers, <= 64 units), where the coefficient matrix must equal the
    network Jacobian."""
    rng = np.random.default_rng(10_000 + seed)
    n_in = int(rng.integers(2, 9))
    n_dense = int(rng.integers(1, 5))
    layers: list = []
    width = n_in
    for i in range(n_dense):
        units = int(rng.integers(2, 65))
        activation = SMOOTH_MIX[int(rng.integers(0, len(SMOOTH_MIX)))]
        layers.append(scaled_dense(rng, units, width, activation))
        width = units
        if seed % 4 == 0 and i == 0:
            layers.append(DropoutLayer(rate=0.25))
        if seed % 3 == 0 and i == 0:
            layers.append(random_batch_norm(rng, width))
    x_base = rng.uniform(-1.0, 1.0, size=n_in)
    return ModelSpec(input_dim=n_in, layers=tuple(layers)), x_base


def _unit_ranges(n: int) -> np.ndarray:
    return np.stack([np.zeros(n), np.ones(n)], axis=1)


def wide_relu_classifier(seed: int) -> ModelSpec:
    """20 inputs -> 300 relu -> drop 0.2 -> 300 relu -> drop 0.2 ->
    20 relu -> 1 sigmoid."""
    rng = np.random.default_rng(20_000 + seed)
    return ModelSpec(
        input_dim=20,
        name=f"wide-relu-classifier-{seed}",
        feature_ranges=_unit_ranges(20),
        layers=(
            glorot_dense(rng, 300, 20, "relu"),
            DropoutLayer(rate=0.2),
            glorot_dense(rng, 300, 300, "relu"),
            DropoutLayer(rate=0.2),
            glorot_dense(rng, 20, 300, "relu"),
            glorot_dense(rng, 1, 20, "sigmoid"),
        ),
    )


def gelu_tanh_classifier(seed: int) -> ModelSpec:
    """8 inputs -> 64 gelu -> drop 0.1 -> 128 tanh -> 1 sigmoid
    (all-smooth activations)."""
    rng = np.random.default_rng(30_000 + seed)
    return ModelSpec(
        input_dim=8,
        name=f"gelu-tanh-classifier-{seed}",
        feature_ranges=_unit_ranges(8),
        layers=(
            glorot_dense(rng, 64, 8, "gelu"),
            DropoutLayer(rate=0.1),
            glorot_dense(rng, 128, 64, "tanh"),
            glorot_dense(rng, 1, 128, "sigmoid"),
        ),
    )


def mixed_activation_regressor(seed: int) -> ModelSpec:
    """22 inputs -> 300 relu -> drop 0.2 -> 300 selu -> 20 swish ->
    2 sigmoid."""
    rng = np.random.default_rng(40_000 + seed)
    return ModelSpec(
        input_dim=22,
        name=f"mixed-activation-regressor-{seed}",
        feature_ranges=_unit_ranges(22),
        layers=(
            glorot_dense(rng, 300, 22, "relu"),
            DropoutLayer(rate=0.2),
            glorot_dense(rng, 300, 300, "selu"),
            glorot_dense(rng, 20, 300, "swish"),
            glorot_dense(rng, 2, 20, "sigmoid"),
        ),
    )


REPLICAS = {
    "wide_relu": (wide_relu_classifier, False),  # (builder, all-smooth?)
    "gelu_tanh": (gelu_tanh_classifier, True),
    "mixed": (mixed_activation_regressor, False),
}


def instances_in_unit_box(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    return rng.uniform(0.0, 1.0, size=(count, dim))
