"""Perturbation-scatter fidelity protocol, finite-difference oracle, and a
least-squares perturbation baseline.

Neighbors are drawn around the base instance with seeded Gaussian noise
per dimension, scaled by the feature range and hard-clipped at
threshold * range (sigma defaults to a third of the clip bound, so almost
all unclipped mass already lies inside it).  Each neighbor is evaluated
through the network and through the surrogate; records carry the
Euclidean distance in min-max-normalized input space.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import AffineMap, Explanation
from .model_io import ModelSpec
from .network import forward


@dataclass(frozen=True)
class PerturbationConfig:
    proximity_threshold: float
    count: int = 1000
    seed: int = 42
    sigma_fraction: float = 1.0 / 3.0

    def __post_init__(self):
        if not 0.0 <= self.proximity_threshold <= 1.0:
            raise ValueError(
                f"proximity_threshold must be in [0, 1], got {self.proximity_threshold}"
            )
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.sigma_fraction <= 0:
            raise ValueError(f"sigma_fraction must be > 0, got {self.sigma_fraction}")


@dataclass(frozen=True)
class ScatterRecord:
    """One perturbed neighbor evaluated through both routes."""

    index: int
    neighbor: np.ndarray
    nn_output: np.ndarray
    surrogate_output: np.ndarray
    distance: float  # Euclidean, in normalized input space


@dataclass(frozen=True)
class FidelityReport:
    """Per-output-dimension agreement between network and surrogate.

    r_squared entries are None when the network output is constant over
    the neighbors (zero variance leaves R^2 undefined).
    """

    max_abs_error: tuple[float, ...]
    mean_abs_error: tuple[float, ...]
    r_squared: tuple[float | None, ...]

    def format(self) -> str:
        lines = []
        for k, (mx, mn, r2) in enumerate(
            zip(self.max_abs_error, self.mean_abs_error, self.r_squared)
        ):
            r2_text = "undefined" if r2 is None else f"{r2:.6f}"
            lines.append(
                f"output[{k}]: max|err|={mx:.3e}  mean|err|={mn:.3e}  R^2={r2_text}"
            )
        return "\n".join(lines)


def check_ranges(ranges) -> np.ndarray:
    arr = np.asarray(ranges, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"ranges must be an (n, 2) array of (min, max), got shape {arr.shape}")
    degenerate = np.nonzero(arr[:, 0] >= arr[:, 1])[0]
    if degenerate.size:
        raise ValueError(
            f"feature ranges must satisfy min < max; bad dimensions: {degenerate.tolist()}"
        )
    return arr


def resolve_ranges(model: ModelSpec, instances: np.ndarray | None = None) -> np.ndarray:
    """Per-dimension (min, max) for normalization: the model's declared
    feature_ranges when present, else the envelope of the supplied
    instance dataset.  Errors out rather than silently using raw units."""
    if model.feature_ranges is not None:
        return check_ranges(model.feature_ranges)
    if instances is None:
        raise ValueError(
            "model declares no feature_ranges and no instance dataset was "
            "supplied to infer them from"
        )
    data = np.asarray(instances, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 2:
        raise ValueError(
            "need at least 2 instances to infer feature ranges; "
            "declare feature_ranges on the model instead"
        )
    inferred = np.stack([data.min(axis=0), data.max(axis=0)], axis=1)
    return check_ranges(inferred)


def sample_neighbors(
    x_base, config: PerturbationConfig, ranges
) -> np.ndarray:
    """Draw `config.count` neighbors of x_base, deterministically per seed.

    Per dimension j the deviation is Gaussian with sigma =
    sigma_fraction * threshold * range_j, hard-clipped to magnitude
    <= threshold * range_j.
    """
    x = np.asarray(x_base, dtype=np.float64)
    arr = check_ranges(ranges)
    if arr.shape[0] != x.shape[0]:
        raise ValueError(f"ranges cover {arr.shape[0]} dimensions, instance has {x.shape[0]}")
    span = arr[:, 1] - arr[:, 0]
    limit = config.proximity_threshold * span
    sigma = config.sigma_fraction * limit
    rng = np.random.default_rng(config.seed)
    noise = rng.standard_normal((config.count, x.shape[0])) * sigma
    np.clip(noise, -limit, limit, out=noise)
    return x[np.newaxis, :] + noise


def evaluate_scatter(
    model: ModelSpec, explanation: Explanation, neighbors, ranges
) -> list[ScatterRecord]:
    """Evaluate each neighbor through the network and the surrogate.

    Records come back in neighbor-index order; distances use the
    min-max normalization given by `ranges`.
    """
    arr = check_ranges(ranges)
    span = arr[:, 1] - arr[:, 0]
    base = explanation.base_instance
    records = []
    for i, neighbor in enumerate(np.asarray(neighbors, dtype=np.float64)):
        nn_out = forward(model, neighbor).output
        lin_out = explanation.affine(neighbor)
        distance = float(np.linalg.norm((neighbor - base) / span))
        records.append(
            ScatterRecord(
                index=i,
                neighbor=neighbor,
                nn_output=nn_out,
                surrogate_output=lin_out,
                distance=distance,
            )
        )
    return records


def max_relative_deviation(a, b, floor: float = 1e-3) -> float:
    """max over entries of |a - b| / (|b| + floor).

    Plain relative deviation against `b`, except entries smaller than
    `floor` are measured against the floor instead, so the noise floor of
    finite differences on near-zero entries cannot dominate.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.max(np.abs(a - b) / (np.abs(b) + floor)))


def fd_jacobian(model: ModelSpec, x_base, step: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian of the network at x_base.

    Independent of the propagation engine: only forward evaluations.
    Costs 2 * N_in passes.
    """
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    x = np.asarray(x_base, dtype=np.float64)
    columns = []
    for j in range(x.shape[0]):
        bump = np.zeros_like(x)
        bump[j] = step
        plus = forward(model, x + bump).output
        minus = forward(model, x - bump).output
        columns.append((plus - minus) / (2.0 * step))
    return np.stack(columns, axis=1)


def baseline_surrogate(
    model: ModelSpec, x_base, config: PerturbationConfig, ranges
) -> tuple[AffineMap, int]:
    """Perturbation-based affine surrogate: sample neighbors, run the
    network on each, fit by ordinary least squares.

    Returns the fitted map and the number of forward passes consumed
    (= config.count).  This is the comparison baseline, not a product
    feature: its result varies with the seed and costs count passes where
    the propagation engine costs one.
    """
    x = np.asarray(x_base, dtype=np.float64)
    n_in = x.shape[0]
    if config.count < n_in + 1:
        raise ValueError(
            f"least-squares fit needs count >= {n_in + 1} neighbors, got {config.count}"
        )
    neighbors = sample_neighbors(x, config, ranges)
    outputs = np.stack([forward(model, nb).output for nb in neighbors])
    design = np.hstack([neighbors, np.ones((config.count, 1))])
    solution, _, rank, _ = np.linalg.lstsq(design, outputs, rcond=None)
    if rank < n_in + 1:
        raise ValueError(
            f"design matrix is rank-deficient (rank {rank} < {n_in + 1}); "
            "widen the perturbation or add neighbors"
        )
    return (
        AffineMap(coefficients=solution[:n_in].T, intercept=solution[n_in]),
        config.count,
    )


def fidelity_metrics(records: list[ScatterRecord]) -> FidelityReport:
    """Summarize a scatter into per-output max/mean error and R^2
    (network outputs as the reference)."""
    if not records:
        raise ValueError("records must be non-empty")
    nn = np.stack([r.nn_output for r in records])
    lin = np.stack([r.surrogate_output for r in records])
    err = np.abs(nn - lin)
    r_squared: list[float | None] = []
    for k in range(nn.shape[1]):
        ss_tot = float(np.sum((nn[:, k] - nn[:, k].mean()) ** 2))
        if ss_tot == 0.0:
            r_squared.append(None)
        else:
            ss_res = float(np.sum((lin[:, k] - nn[:, k]) ** 2))
            r_squared.append(1.0 - ss_res / ss_tot)
    return FidelityReport(
        max_abs_error=tuple(float(v) for v in err.max(axis=0)),
        mean_abs_error=tuple(float(v) for v in err.mean(axis=0)),
        r_squared=tuple(r_squared),
    )


def _fmt(value: float) -> str:
    # 17 significant digits: round-trip exact for float64
    return format(value, ".17g")


def scatter_csv_text(records: list[ScatterRecord]) -> str:
    """Render scatter records as CSV, deterministically.

    Header: index,distance,nn_0,...,nn_{K-1},lin_0,...,lin_{K-1}
    """
    if not records:
        raise ValueError("records must be non-empty")
    k = records[0].nn_output.shape[0]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["index", "distance"]
        + [f"nn_{i}" for i in range(k)]
        + [f"lin_{i}" for i in range(k)]
    )
    for record in records:
        writer.writerow(
            [record.index, _fmt(record.distance)]
            + [_fmt(v) for v in record.nn_output]
            + [_fmt(v) for v in record.surrogate_output]
        )
    return buf.getvalue()


def write_scatter_csv(records: list[ScatterRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(scatter_csv_text(records))
