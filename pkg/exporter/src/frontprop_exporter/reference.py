"""Reference evaluator for the interchange JSON semantics.

This is the parity yardstick: a minimal, self-contained float64
implementation of exactly what the JSON promises, kept independent of
any consumer package so that an export is checked against the format's
contract and not against somebody's optimized engine.

Layer semantics:

* dense       y = g(W x + b), W stored row-per-output-unit
* dropout     identity (inference)
* batch_norm  y = gamma * (x - mean) / sqrt(var + eps) + beta
* softmax     exp(x - max(x)) / sum
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.special import erf, expit

SELU_LAMBDA = 1.05070098735548
SELU_ALPHA = 1.67326324235437

_PHI = lambda s: 0.5 * (1.0 + erf(s / np.sqrt(2.0)))

ACTIVATIONS = {
    "identity": lambda s: s,
    "relu": lambda s: np.maximum(s, 0.0),
    "elu": lambda s: np.where(s > 0, s, np.expm1(np.minimum(s, 0.0))),
    "selu": lambda s: SELU_LAMBDA
    * np.where(s > 0, s, SELU_ALPHA * np.expm1(np.minimum(s, 0.0))),
    "gelu": lambda s: s * _PHI(s),
    "sigmoid": expit,
    "tanh": np.tanh,
    "swish": lambda s: s * expit(s),
    "softsign": lambda s: s / (1.0 + np.abs(s)),
    "exponential": np.exp,
    "hard_sigmoid": lambda s: np.clip(0.2 * s + 0.5, 0.0, 1.0),
    "softplus": lambda s: np.logaddexp(0.0, s),
}


def load_document(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != 1:
        raise ValueError(f"unsupported schema_version: {doc.get('schema_version')!r}")
    return doc


def evaluate(doc: dict, x) -> np.ndarray:
    """Run one instance through the document's layer stack in float64."""
    t = np.asarray(x, dtype=np.float64)
    if t.shape != (doc["input_dim"],):
        raise ValueError(f"input shape {t.shape} != ({doc['input_dim']},)")
    for layer in doc["layers"]:
        kind = layer["type"]
        if kind == "dense":
            w = np.asarray(layer["weights"], dtype=np.float64)
            b = np.asarray(layer["bias"], dtype=np.float64)
            t = ACTIVATIONS[layer["activation"]](w @ t + b)
        elif kind == "dropout":
            pass
        elif kind == "batch_norm":
            gamma = np.asarray(layer["gamma"], dtype=np.float64)
            beta = np.asarray(layer["beta"], dtype=np.float64)
            mean = np.asarray(layer["moving_mean"], dtype=np.float64)
            var = np.asarray(layer["moving_var"], dtype=np.float64)
            t = gamma * (t - mean) / np.sqrt(var + layer["epsilon"]) + beta
        elif kind == "softmax":
            e = np.exp(t - t.max())
            t = e / e.sum()
        else:
            raise ValueError(f"unknown layer type: {kind!r}")
    return t


def evaluate_batch(doc: dict, inputs) -> np.ndarray:
    arr = np.asarray(inputs, dtype=np.float64)
    return np.stack([evaluate(doc, row) for row in arr])
