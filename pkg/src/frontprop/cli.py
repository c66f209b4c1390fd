"""Command-line front end.

Subcommands:

* explain           -- extract the affine surrogate around one instance
* validate          -- perturbation-scatter fidelity protocol, CSV output
* check-jacobian    -- engine coefficients vs finite-difference oracle
* compare-baseline  -- cost/fidelity table vs the least-squares baseline

Exit codes: 0 success, 1 invariant or tolerance failure, 2 usage/input
failure.  Every seeded command is byte-for-byte reproducible; file outputs
are written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from .engine import BASE_EXACTNESS_TOL, frontprop, propagate
from .model_io import DenseLayer, ModelIOError, ModelSpec, load_model
from .network import forward, forward_pass_count
from .validation import (
    PerturbationConfig,
    baseline_surrogate,
    evaluate_scatter,
    fd_jacobian,
    fidelity_metrics,
    max_relative_deviation,
    resolve_ranges,
    sample_neighbors,
    scatter_csv_text,
)

# Pre-activation kink points of the piecewise activations; finite
# differences are unreliable when the trace comes within `step` of one.
_PIECEWISE_KINKS = {"relu": (0.0,), "hard_sigmoid": (-2.5, 2.5), "selu": (0.0,)}


class _InputError(Exception):
    """Bad user input (file contents, dimensions, option combinations)."""


def _atomic_write_text(path: str | Path, text: str) -> None:
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def load_instances(path: str | Path) -> tuple[np.ndarray, int | None]:
    """Read an instance file: {"instance": [...]} or
    {"instances": [[...], ...]} with an optional "index" default."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise _InputError(f"{path}: {exc}") from None
    if not isinstance(raw, dict):
        raise _InputError(f"{path}: expected a JSON object")
    if "instance" in raw:
        rows = [raw["instance"]]
    elif "instances" in raw:
        rows = raw["instances"]
    else:
        raise _InputError(f"{path}: needs an 'instance' or 'instances' field")
    try:
        data = np.asarray(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise _InputError(f"{path}: instances are not rectangular numeric vectors ({exc})") from None
    if data.ndim != 2:
        raise _InputError(f"{path}: instances must be vectors of equal length")
    file_index = raw.get("index")
    if file_index is not None and not isinstance(file_index, int):
        raise _InputError(f"{path}: 'index' must be an integer")
    return data, file_index


def _select_instance(args, model: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """Returns (all instances, selected base instance)."""
    instances, file_index = load_instances(args.instances)
    if instances.shape[1] != model.input_dim:
        raise _InputError(
            f"instance dimension {instances.shape[1]} does not match "
            f"model input_dim {model.input_dim}"
        )
    index = args.index if args.index is not None else (file_index or 0)
    if not 0 <= index < instances.shape[0]:
        raise _InputError(
            f"index {index} out of range for {instances.shape[0]} instance(s)"
        )
    return instances, instances[index]


def _print_explanation(explanation) -> None:
    x = explanation.base_instance
    coef = explanation.affine.coefficients
    contrib = explanation.contributions
    print(f"base output: {explanation.base_output.tolist()}")
    for k in range(coef.shape[0]):
        print(f"output[{k}]  intercept {explanation.affine.intercept[k]:+.6g}")
        for j in range(coef.shape[1]):
            print(
                f"  x[{j:>3}] = {x[j]:>12.6g}   coeff {coef[k, j]:>12.6g}   "
                f"contribution {contrib[k, j]:>12.6g}"
            )
    if explanation.flags:
        print("flags: " + ", ".join(explanation.flags))


def cmd_explain(args) -> int:
    model = load_model(args.model)
    _, x_base = _select_instance(args, model)
    explanation = frontprop(model, x_base)
    residual = explanation.base_residual()
    if residual > BASE_EXACTNESS_TOL:
        print(
            f"base-exactness violated: |surrogate(base) - output| = {residual:.3e} "
            f"> {BASE_EXACTNESS_TOL:.0e}",
            file=sys.stderr,
        )
        return 1
    if args.out:
        _atomic_write_text(args.out, json.dumps(explanation.to_dict(), indent=2) + "\n")
    _print_explanation(explanation)
    return 0


def cmd_validate(args) -> int:
    model = load_model(args.model)
    instances, x_base = _select_instance(args, model)
    explanation = frontprop(model, x_base)
    if explanation.base_residual() > BASE_EXACTNESS_TOL:
        print(
            f"base-exactness violated: residual {explanation.base_residual():.3e}",
            file=sys.stderr,
        )
        return 1
    ranges = resolve_ranges(model, instances)
    config = PerturbationConfig(
        proximity_threshold=args.threshold,
        count=args.points,
        seed=args.seed,
        sigma_fraction=args.sigma_fraction,
    )
    neighbors = sample_neighbors(x_base, config, ranges)
    records = evaluate_scatter(model, explanation, neighbors, ranges)
    _atomic_write_text(args.out, scatter_csv_text(records))
    report = fidelity_metrics(records)
    print(f"threshold {args.threshold}  points {args.points}  seed {args.seed}")
    print(report.format())
    print(f"scatter written to {args.out}")
    return 0


def cmd_check_jacobian(args) -> int:
    model = load_model(args.model)
    _, x_base = _select_instance(args, model)
    if args.step <= 0 or args.tol <= 0:
        raise _InputError("--step and --tol must be > 0")
    trace = forward(model, x_base)
    for i, layer in enumerate(model.layers):
        if not isinstance(layer, DenseLayer):
            continue
        for point in _PIECEWISE_KINKS.get(layer.activation, ()):
            near = np.nonzero(
                np.abs(trace.layers[i].pre_activation - point) <= args.step
            )[0]
            if near.size:
                print(
                    f"warning: layer {i} ({layer.activation}) has pre-activations "
                    f"within {args.step:g} of the kink at {point:g} "
                    f"(units {near.tolist()}); finite differences are unreliable here"
                )
    affine, flags = propagate(model, trace)
    if flags:
        print("flags: " + ", ".join(flags))
    oracle = fd_jacobian(model, x_base, step=args.step)
    deviation = max_relative_deviation(affine.coefficients, oracle)
    print(f"max relative deviation vs central differences (h={args.step:g}): {deviation:.3e}")
    if deviation <= args.tol:
        print(f"within tolerance {args.tol:g}")
        return 0
    print(f"exceeds tolerance {args.tol:g}", file=sys.stderr)
    return 1


def cmd_compare_baseline(args) -> int:
    model = load_model(args.model)
    instances, x_base = _select_instance(args, model)
    ranges = resolve_ranges(model, instances)
    if args.points < model.input_dim + 1:
        raise _InputError(
            f"--points must be >= input_dim + 1 = {model.input_dim + 1} for the baseline fit"
        )

    before = forward_pass_count()
    t0 = time.perf_counter()
    explanation = frontprop(model, x_base)
    fp_time = time.perf_counter() - t0
    fp_passes = forward_pass_count() - before

    config = PerturbationConfig(
        proximity_threshold=args.threshold,
        count=args.points,
        seed=args.seed,
        sigma_fraction=args.sigma_fraction,
    )
    before = forward_pass_count()
    t0 = time.perf_counter()
    baseline, _ = baseline_surrogate(model, x_base, config, ranges)
    bl_time = time.perf_counter() - t0
    bl_passes = forward_pass_count() - before

    # held-out neighbors: same protocol, derived seed
    heldout_config = PerturbationConfig(
        proximity_threshold=args.threshold,
        count=args.points,
        seed=args.seed + 1,
        sigma_fraction=args.sigma_fraction,
    )
    heldout = sample_neighbors(x_base, heldout_config, ranges)
    nn_out = np.stack([forward(model, nb).output for nb in heldout])
    rows = []
    for label, surrogate, passes, wall in (
        ("frontprop", explanation.affine, fp_passes, fp_time),
        ("baseline", baseline, bl_passes, bl_time),
    ):
        predicted = np.stack([surrogate(nb) for nb in heldout])
        err = np.abs(predicted - nn_out)
        rows.append((label, passes, wall, float(err.max()), float(err.mean())))

    print(f"held-out neighbors: {args.points} (seed {heldout_config.seed})")
    print(f"{'method':<12} {'passes':>8} {'wall_s':>12} {'max|err|':>12} {'mean|err|':>12}")
    for label, passes, wall, mx, mn in rows:
        print(f"{label:<12} {passes:>8} {wall:>12.6f} {mx:>12.4e} {mn:>12.4e}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frontprop",
        description="Local affine surrogates of feed-forward networks in one forward pass.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=False, out=True):
        p.add_argument("--model", required=True, help="interchange model JSON")
        p.add_argument("--instances", required=True, help="instance file JSON")
        p.add_argument(
            "--index",
            type=int,
            default=None,
            help="dataset index of the base instance (default: file 'index' field, else 0)",
        )
        if out:
            p.add_argument("--out", required=out_required, help="output file path")

    p = sub.add_parser("explain", help="extract and print the affine surrogate")
    common(p)
    p.set_defaults(handler=cmd_explain)

    p = sub.add_parser("validate", help="perturbation-scatter fidelity protocol")
    common(p, out_required=True)
    p.add_argument("--threshold", type=float, default=0.1, help="proximity threshold in [0, 1]")
    p.add_argument("--points", type=int, default=1000, help="number of perturbed neighbors")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument(
        "--sigma-fraction",
        type=float,
        default=1.0 / 3.0,
        help="Gaussian sigma as a fraction of the clip bound",
    )
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("check-jacobian", help="compare against central finite differences")
    common(p, out=False)
    p.add_argument("--step", type=float, default=1e-5, help="finite-difference step")
    p.add_argument("--tol", type=float, default=1e-5, help="max allowed relative deviation")
    p.set_defaults(handler=cmd_check_jacobian)

    p = sub.add_parser("compare-baseline", help="cost/fidelity vs least-squares baseline")
    common(p, out=False)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--points", type=int, default=1000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--sigma-fraction", type=float, default=1.0 / 3.0)
    p.set_defaults(handler=cmd_compare_baseline)
    return parser


def run(argv=None) -> int:
    """Parse argv and dispatch; returns the process exit code."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (_InputError, ModelIOError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> None:
    raise SystemExit(run(argv))


if __name__ == "__main__":
    main()
