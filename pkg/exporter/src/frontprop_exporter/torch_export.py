"""PyTorch nn.Sequential -> interchange JSON.

nn.Linear already stores weights row-per-output-unit, so matrices copy
straight across.  Activation modules are folded into the activation slot
of the Linear directly before them; inference-mode semantics throughout
(dropout identity, batch norm running statistics).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .reference import evaluate_batch, load_document
from .report import PARITY_TOLERANCE, ExportError, ExportReport, UnmappableLayerError

_HARD_SIGMOID_NOTE = (
    "torch Hardsigmoid (slope 1/6 on [-3, 3]) is not the interchange "
    "hard_sigmoid (slope 0.2 on [-2.5, 2.5])"
)


def _torch():
    try:
        import torch
    except ImportError as exc:  # pragma: no cover
        raise ExportError("torch is not installed; install the 'torch' extra") from exc
    return torch


def _activation_kind(module, where: str, report: ExportReport) -> str | None:
    """Interchange kind for an activation module, or None if `module`
    is not an activation."""
    nn = _torch().nn
    simple = {
        nn.ReLU: "relu",
        nn.Sigmoid: "sigmoid",
        nn.Tanh: "tanh",
        nn.SELU: "selu",
        nn.SiLU: "swish",
        nn.Softsign: "softsign",
    }
    for cls, kind in simple.items():
        if type(module) is cls:
            return kind
    if type(module) is nn.ELU:
        if float(module.alpha) != 1.0:
            raise UnmappableLayerError(f"{where}: elu alpha {module.alpha} != 1")
        return "elu"
    if type(module) is nn.GELU:
        if module.approximate == "tanh":
            # exportable, but the interchange gelu is the exact erf form;
            # the parity check decides whether the difference matters
            report.warnings.append(
                f"{where}: tanh-approximate GELU exported as exact gelu; "
                "values differ by up to ~1e-3"
            )
        return "gelu"
    if type(module) is nn.Softplus:
        if float(module.beta) != 1.0:
            raise UnmappableLayerError(f"{where}: softplus beta {module.beta} != 1")
        return "softplus"
    if type(module) is nn.Hardsigmoid:
        raise UnmappableLayerError(f"{where}: {_HARD_SIGMOID_NOTE}")
    return None


def _convert_layers(model, report: ExportReport) -> list[dict]:
    nn = _torch().nn
    out: list[dict] = []

    modules = [m for m in model if not isinstance(m, nn.Identity)]
    for position, module in enumerate(modules):
        where = f"module {position} ({type(module).__name__})"
        if isinstance(module, nn.Linear):
            out.append(
                {
                    "type": "dense",
                    "weights": module.weight.detach().cpu().double().numpy().tolist(),
                    "bias": (
                        module.bias.detach().cpu().double().numpy().tolist()
                        if module.bias is not None
                        else [0.0] * module.out_features
                    ),
                    "activation": "identity",
                }
            )
            report.layers.append({"source": "Linear", "interchange": "dense"})
            continue
        if isinstance(module, nn.Dropout):
            out.append({"type": "dropout", "rate": float(module.p)})
            report.layers.append({"source": "Dropout", "interchange": "dropout"})
            continue
        if isinstance(module, nn.BatchNorm1d):
            if not module.track_running_stats:
                raise UnmappableLayerError(
                    f"{where}: no running statistics to export"
                )
            mean = module.running_mean.detach().cpu().double().numpy()
            var = module.running_var.detach().cpu().double().numpy()
            if module.affine:
                gamma = module.weight.detach().cpu().double().numpy()
                beta = module.bias.detach().cpu().double().numpy()
            else:
                gamma, beta = np.ones_like(mean), np.zeros_like(mean)
            out.append(
                {
                    "type": "batch_norm",
                    "gamma": gamma.tolist(),
                    "beta": beta.tolist(),
                    "moving_mean": mean.tolist(),
                    "moving_var": var.tolist(),
                    "epsilon": float(module.eps),
                }
            )
            report.layers.append({"source": "BatchNorm1d", "interchange": "batch_norm"})
            continue
        if isinstance(module, nn.Softmax):
            if module.dim not in (-1, 1):  # last axis of (batch, features)
                raise UnmappableLayerError(f"{where}: dim {module.dim}")
            out.append({"type": "softmax"})
            report.layers.append({"source": "Softmax", "interchange": "softmax"})
            continue
        kind = _activation_kind(module, where, report)
        if kind is not None:
            if out and out[-1]["type"] == "dense" and out[-1]["activation"] == "identity":
                out[-1]["activation"] = kind
                report.layers.append(
                    {"source": type(module).__name__, "interchange": f"dense activation {kind!r}"}
                )
                continue
            raise UnmappableLayerError(
                f"{where}: standalone activation without a preceding Linear"
            )
        raise UnmappableLayerError(where)
    return out


def _input_dim(model) -> int:
    nn = _torch().nn
    for module in model:
        if isinstance(module, nn.Linear):
            return int(module.in_features)
        if isinstance(module, nn.BatchNorm1d):
            return int(module.num_features)
    raise ExportError("cannot determine input dimension: no Linear or BatchNorm1d layer")


def export_torch(
    source,
    out_path: str | Path,
    verify: int = 100,
    seed: int = 42,
    tolerance: float = PARITY_TOLERANCE,
) -> ExportReport:
    """Export an nn.Sequential (object or torch.save file) and verify parity."""
    torch = _torch()
    if isinstance(source, (str, Path)):
        model = torch.load(source, map_location="cpu", weights_only=False)
        source_name = str(source)
    else:
        model, source_name = source, "torch model"
    if not isinstance(model, torch.nn.Sequential):
        raise ExportError(f"expected nn.Sequential, got {type(model).__name__}")
    if verify < 100:
        raise ExportError(f"verification needs >= 100 inputs, got {verify}")
    model.eval()

    report = ExportReport(
        framework="torch",
        source=source_name,
        output=str(out_path),
        verify_count=verify,
        seed=seed,
        tolerance=tolerance,
    )
    doc = {
        "schema_version": 1,
        "input_dim": _input_dim(model),
        "layers": _convert_layers(model, report),
    }
    Path(out_path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    rng = np.random.default_rng(seed)
    inputs = rng.standard_normal((verify, doc["input_dim"])).astype(np.float32)
    with torch.no_grad():
        got = model(torch.from_numpy(inputs)).double().numpy()
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
