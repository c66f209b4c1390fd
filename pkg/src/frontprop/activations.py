"""Scalar activation functions and their analytic derivatives.

Every kind is total on the reals and vectorized over numpy arrays.
Conventions at non-differentiable points (the derivative is what the
tangent-line construction uses there):

* relu at 0          -> 0
* hard_sigmoid at +-2.5 -> 0
* elu / selu at 0    -> right branch (1 and SELU_LAMBDA respectively)

Overflow in the exp-based kinds saturates to inf per IEEE semantics; no
exceptions are raised.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import erf, expit

SELU_LAMBDA = 1.05070098735548
SELU_ALPHA = 1.67326324235437

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _norm_cdf(s):
    return 0.5 * (1.0 + erf(s * _INV_SQRT2))


def _norm_pdf(s):
    return np.exp(-0.5 * s * s) * _INV_SQRT2PI


def _sigmoid_deriv(s):
    p = expit(s)
    return p * (1.0 - p)


def _elu(s):
    return np.where(s > 0, s, np.expm1(s))


def _elu_deriv(s):
    return np.where(s > 0, 1.0, np.exp(np.minimum(s, 0.0)))


def _selu(s):
    return SELU_LAMBDA * np.where(s > 0, s, SELU_ALPHA * np.expm1(s))


def _selu_deriv(s):
    # >= keeps the kink at 0 on the right branch (slope SELU_LAMBDA)
    return SELU_LAMBDA * np.where(s >= 0, 1.0, SELU_ALPHA * np.exp(np.minimum(s, 0.0)))


def _swish(s):
    return s * expit(s)


def _swish_deriv(s):
    p = expit(s)
    return p * (1.0 + s * (1.0 - p))


def _hard_sigmoid_deriv(s):
    return np.where((s > -2.5) & (s < 2.5), 0.2, 0.0)


@dataclass(frozen=True)
class Activation:
    """One activation kind: elementwise value and slope functions."""

    name: str
    value: Callable
    slope: Callable


ACTIVATIONS: dict[str, Activation] = {
    a.name: a
    for a in [
        Activation("identity", lambda s: +s, lambda s: np.ones_like(s)),
        Activation("elu", _elu, _elu_deriv),
        Activation("relu", lambda s: np.maximum(s, 0.0), lambda s: np.where(s > 0, 1.0, 0.0)),
        Activation("selu", _selu, _selu_deriv),
        Activation("gelu", lambda s: s * _norm_cdf(s), lambda s: _norm_cdf(s) + s * _norm_pdf(s)),
        Activation("sigmoid", expit, _sigmoid_deriv),
        Activation("tanh", np.tanh, lambda s: 1.0 - np.tanh(s) ** 2),
        Activation("swish", _swish, _swish_deriv),
        Activation("softsign", lambda s: s / (1.0 + np.abs(s)), lambda s: (1.0 + np.abs(s)) ** -2),
        Activation("exponential", np.exp, np.exp),
        Activation("hard_sigmoid", lambda s: np.clip(0.2 * s + 0.5, 0.0, 1.0), _hard_sigmoid_deriv),
        Activation("softplus", lambda s: np.logaddexp(0.0, s), expit),
    ]
}

ACTIVATION_KINDS: tuple[str, ...] = tuple(ACTIVATIONS)

# Kinds that are C1 everywhere (no derivative jumps); the piecewise kinds
# relu / hard_sigmoid / selu carry kinks, and softsign's curvature jumps
# at 0 even though its slope is continuous.
SMOOTH_KINDS: tuple[str, ...] = (
    "identity",
    "elu",
    "gelu",
    "sigmoid",
    "tanh",
    "swish",
    "exponential",
    "softplus",
)


def _as_float64(s):
    return np.asarray(s, dtype=np.float64)


def activation_eval(kind: str, s):
    """Evaluate activation `kind` elementwise at `s` (scalar or array)."""
    try:
        act = ACTIVATIONS[kind]
    except KeyError:
        raise ValueError(f"unknown activation kind: {kind!r}") from None
    with np.errstate(over="ignore"):
        return act.value(_as_float64(s))


def activation_derivative(kind: str, s):
    """Elementwise derivative of activation `kind` at `s` (scalar or array)."""
    try:
        act = ACTIVATIONS[kind]
    except KeyError:
        raise ValueError(f"unknown activation kind: {kind!r}") from None
    with np.errstate(over="ignore"):
        return act.slope(_as_float64(s))
