import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontprop import (
    DenseLayer,
    ModelSpec,
    PerturbationConfig,
    baseline_surrogate,
    evaluate_scatter,
    fd_jacobian,
    fidelity_metrics,
    forward,
    forward_pass_count,
    frontprop,
    max_relative_deviation,
    resolve_ranges,
    sample_neighbors,
    scatter_csv_text,
    write_scatter_csv,
)

from modelzoo import random_model, smooth_random_model


def affine_model(seed=0, n_in=3, n_out=2):
    rng = np.random.default_rng(seed)
    w, b = rng.normal(size=(n_out, n_in)), rng.normal(size=n_out)
    return ModelSpec(input_dim=n_in, layers=(DenseLayer(w, b, "identity"),)), w, b


def unit_ranges(n):
    return np.stack([np.zeros(n), np.ones(n)], axis=1)


# ---------------------------------------------------------------- config

def test_config_defaults():
    cfg = PerturbationConfig(proximity_threshold=0.1)
    assert cfg.count == 1000
    assert cfg.seed == 42
    assert cfg.sigma_fraction == pytest.approx(1 / 3)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"proximity_threshold": -0.1},
        {"proximity_threshold": 1.5},  # fraction of the feature range, so <= 1
        {"proximity_threshold": 0.1, "count": 0},
        {"proximity_threshold": 0.1, "sigma_fraction": 0.0},
        {"proximity_threshold": 0.1, "sigma_fraction": -1.0},
    ],
)
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        PerturbationConfig(**kwargs)


# ---------------------------------------------------------------- sampling

def test_zero_threshold_pins_neighbors_to_base():
    x = np.array([0.3, 0.7])
    cfg = PerturbationConfig(proximity_threshold=0.0, count=50, seed=1)
    neighbors = sample_neighbors(x, cfg, unit_ranges(2))
    assert neighbors.shape == (50, 2)
    np.testing.assert_array_equal(neighbors, np.tile(x, (50, 1)))


def test_sampling_is_seeded():
    x = np.array([0.5, 0.5, 0.5])
    cfg = PerturbationConfig(proximity_threshold=0.2, count=100, seed=9)
    a = sample_neighbors(x, cfg, unit_ranges(3))
    b = sample_neighbors(x, cfg, unit_ranges(3))
    np.testing.assert_array_equal(a, b)
    c = sample_neighbors(x, PerturbationConfig(0.2, count=100, seed=10), unit_ranges(3))
    assert np.abs(a - c).max() > 0


def test_deviation_clipped_to_threshold_times_range():
    x = np.array([0.5, 0.5])
    cfg = PerturbationConfig(proximity_threshold=0.1, count=2000, seed=3)
    neighbors = sample_neighbors(x, cfg, unit_ranges(2))
    dev = np.abs(neighbors - x)
    assert dev.max() <= 0.1 + 1e-15
    # sigma = threshold/3, so ~0.3% of raw draws exceed the cap: clipping
    # must actually have engaged somewhere in 4000 draws
    assert dev.max() == pytest.approx(0.1)


def test_deviation_scales_with_feature_range():
    x = np.array([0.0, 0.0])
    ranges = np.array([[-1.0, 1.0], [-10.0, 10.0]])
    cfg = PerturbationConfig(proximity_threshold=0.5, count=500, seed=4)
    neighbors = sample_neighbors(x, cfg, ranges)
    assert np.abs(neighbors[:, 0]).max() <= 1.0
    assert np.abs(neighbors[:, 1]).max() <= 10.0
    assert np.abs(neighbors[:, 1]).max() > 1.0  # wider feature actually moves farther


@settings(max_examples=60, deadline=None)
@given(
    threshold=st.floats(min_value=1e-6, max_value=1.0),
    sigma_fraction=st.floats(min_value=0.05, max_value=3.0),
    seed=st.integers(0, 2**31 - 1),
    span=st.floats(min_value=1e-3, max_value=1e6),
)
def test_clipping_bound_holds_for_any_config(threshold, sigma_fraction, seed, span):
    x = np.array([0.25 * span])
    ranges = np.array([[0.0, span]])
    cfg = PerturbationConfig(threshold, count=64, seed=seed, sigma_fraction=sigma_fraction)
    neighbors = sample_neighbors(x, cfg, ranges)
    # the noise is hard-clipped before the shift; measuring the deviation
    # after x + noise - x re-rounds at the magnitude of the sum, hence the
    # one-ulp slack at |x| + limit
    limit = threshold * span
    assert np.abs(neighbors - x).max() <= limit + np.spacing(abs(x[0]) + limit)


# ---------------------------------------------------------------- ranges

def test_resolve_ranges_prefers_model_metadata():
    spec, _, _ = affine_model()
    ranges = np.array([[0.0, 1.0], [0.0, 2.0], [-1.0, 1.0]])
    spec = ModelSpec(input_dim=3, layers=spec.layers, feature_ranges=ranges)
    np.testing.assert_array_equal(resolve_ranges(spec), ranges)


def test_resolve_ranges_from_dataset_envelope():
    spec, _, _ = affine_model()
    instances = np.array([[0.0, 5.0, -1.0], [1.0, 3.0, -2.0], [0.5, 4.0, 0.0]])
    ranges = resolve_ranges(spec, instances)
    np.testing.assert_array_equal(ranges[:, 0], [0.0, 3.0, -2.0])
    np.testing.assert_array_equal(ranges[:, 1], [1.0, 5.0, 0.0])


def test_resolve_ranges_needs_some_source():
    spec, _, _ = affine_model()
    with pytest.raises(ValueError, match="feature_ranges"):
        resolve_ranges(spec)
    with pytest.raises(ValueError, match="at least 2"):
        resolve_ranges(spec, np.zeros((1, 3)))
    degenerate = np.array([[0.0, 1.0, 2.0], [0.0, 5.0, 3.0]])  # feature 0 constant
    with pytest.raises(ValueError, match="min < max"):
        resolve_ranges(spec, degenerate)


# ---------------------------------------------------------------- scatter

def test_scatter_on_affine_model_is_exact():
    spec, w, b = affine_model()
    x = np.array([0.2, 0.4, 0.6])
    exp = frontprop(spec, x)
    cfg = PerturbationConfig(proximity_threshold=0.3, count=200, seed=5)
    ranges = unit_ranges(3)
    neighbors = sample_neighbors(x, cfg, ranges)
    records = evaluate_scatter(spec, exp, neighbors, ranges)
    assert len(records) == 200
    for rec in records:
        np.testing.assert_array_equal(rec.nn_output, rec.surrogate_output)


def test_scatter_base_neighbor_has_zero_distance():
    spec, _, _ = affine_model()
    x = np.array([0.2, 0.4, 0.6])
    exp = frontprop(spec, x)
    records = evaluate_scatter(spec, exp, x[np.newaxis, :], unit_ranges(3))
    assert records[0].distance == 0.0
    np.testing.assert_array_equal(records[0].neighbor, x)


def test_scatter_distance_is_normalized_euclidean():
    spec, _, _ = affine_model()
    x = np.zeros(3)
    exp = frontprop(spec, x)
    ranges = np.array([[0.0, 1.0], [0.0, 2.0], [0.0, 4.0]])
    neighbor = np.array([[1.0, 2.0, 4.0]])  # one full range away per feature
    records = evaluate_scatter(spec, exp, neighbor, ranges)
    assert records[0].distance == pytest.approx(np.sqrt(3.0))


def test_scatter_records_keep_sample_order():
    spec, x = smooth_random_model(0)
    exp = frontprop(spec, x)
    ranges = np.stack([x - 1.0, x + 1.0], axis=1)
    cfg = PerturbationConfig(proximity_threshold=0.1, count=20, seed=6)
    neighbors = sample_neighbors(x, cfg, ranges)
    records = evaluate_scatter(spec, exp, neighbors, ranges)
    assert [r.index for r in records] == list(range(20))
    for rec in records:
        np.testing.assert_array_equal(rec.neighbor, neighbors[rec.index])
        np.testing.assert_array_equal(rec.nn_output, forward(spec, rec.neighbor).output)


def test_surrogate_error_grows_with_threshold():
    spec, x = smooth_random_model(1)
    exp = frontprop(spec, x)
    ranges = np.stack([x - 1.0, x + 1.0], axis=1)

    def mean_err(threshold):
        cfg = PerturbationConfig(proximity_threshold=threshold, count=400, seed=7)
        neighbors = sample_neighbors(x, cfg, ranges)
        records = evaluate_scatter(spec, exp, neighbors, ranges)
        return np.mean([np.abs(r.nn_output - r.surrogate_output).max() for r in records])

    assert mean_err(0.1) < mean_err(0.5)


# ---------------------------------------------------------------- CSV

def test_csv_shape_and_header():
    spec, _, _ = affine_model(n_in=2, n_out=2)
    x = np.array([0.5, 0.5])
    exp = frontprop(spec, x)
    ranges = unit_ranges(2)
    cfg = PerturbationConfig(proximity_threshold=0.1, count=3, seed=1)
    records = evaluate_scatter(spec, exp, sample_neighbors(x, cfg, ranges), ranges)
    text = scatter_csv_text(records)
    lines = text.strip().split("\n")
    assert lines[0] == "index,distance,nn_0,nn_1,lin_0,lin_1"
    assert len(lines) == 4


def test_csv_is_byte_stable_and_full_precision(tmp_path):
    spec, x = smooth_random_model(2)
    exp = frontprop(spec, x)
    ranges = np.stack([x - 1.0, x + 1.0], axis=1)
    cfg = PerturbationConfig(proximity_threshold=0.1, count=25, seed=8)

    def render():
        neighbors = sample_neighbors(x, cfg, ranges)
        return scatter_csv_text(evaluate_scatter(spec, exp, neighbors, ranges))

    a, b = render(), render()
    assert a == b
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_scatter_csv(evaluate_scatter(spec, exp, sample_neighbors(x, cfg, ranges), ranges), p1)
    write_scatter_csv(evaluate_scatter(spec, exp, sample_neighbors(x, cfg, ranges), ranges), p2)
    assert p1.read_bytes() == p2.read_bytes()
    # 17 significant digits survive a text round trip bit-exactly
    row = a.strip().split("\n")[1].split(",")
    assert float(row[2]) == forward(spec, sample_neighbors(x, cfg, ranges)[0]).output[0]


# ---------------------------------------------------------------- jacobian oracle

def test_fd_jacobian_identity_network():
    spec = ModelSpec(input_dim=3, layers=(DenseLayer(np.eye(3), np.zeros(3), "identity"),))
    np.testing.assert_allclose(fd_jacobian(spec, np.zeros(3)), np.eye(3), atol=1e-12)


def test_fd_jacobian_affine_network_any_step():
    spec, w, _ = affine_model(seed=2)
    for step in (0.5, 1e-3, 1e-6):  # powers of two and small steps alike
        np.testing.assert_allclose(fd_jacobian(spec, np.ones(3), step=step), w, atol=1e-9)


def test_fd_jacobian_sigmoid_unit():
    w = np.array([[0.7, -0.4]])
    x = np.array([0.4, 0.7])
    b = np.array([-(w[0] @ x)])  # pre-activation exactly 0
    spec = ModelSpec(input_dim=2, layers=(DenseLayer(w, b, "sigmoid"),))
    np.testing.assert_allclose(fd_jacobian(spec, x), 0.25 * w, atol=1e-8)


def test_fd_jacobian_matches_surrogate_slope_on_smooth_model():
    spec, x = smooth_random_model(3)
    exp = frontprop(spec, x)
    np.testing.assert_allclose(exp.affine.coefficients, fd_jacobian(spec, x, step=1e-5),
                               rtol=1e-5, atol=1e-8)


def test_max_relative_deviation_floor():
    a = np.array([[1.0, 0.0]])
    b = np.array([[1.0, 1e-6]])
    # tiny absolute error near zero stays small thanks to the floor
    assert max_relative_deviation(a, b) == pytest.approx(1e-6 / (1e-6 + 1e-3))
    assert max_relative_deviation(a, a) == 0.0


# ---------------------------------------------------------------- baseline

def test_baseline_recovers_affine_model():
    spec, w, b = affine_model(seed=3)
    x = np.array([0.5, 0.5, 0.5])
    cfg = PerturbationConfig(proximity_threshold=0.2, count=100, seed=11)
    surrogate, n_passes = baseline_surrogate(spec, x, cfg, unit_ranges(3))
    assert n_passes == 100
    np.testing.assert_allclose(surrogate.coefficients, w, atol=1e-8)
    np.testing.assert_allclose(surrogate.intercept, b, atol=1e-8)


def test_baseline_costs_one_pass_per_neighbor():
    spec, x = smooth_random_model(4)
    ranges = np.stack([x - 1.0, x + 1.0], axis=1)
    cfg = PerturbationConfig(proximity_threshold=0.1, count=60, seed=12)
    before = forward_pass_count()
    _, n_passes = baseline_surrogate(spec, x, cfg, ranges)
    assert forward_pass_count() - before == 60 == n_passes


def test_baseline_depends_on_seed():
    spec, x = smooth_random_model(5)
    ranges = np.stack([x - 1.0, x + 1.0], axis=1)
    a, _ = baseline_surrogate(spec, x, PerturbationConfig(0.1, count=80, seed=1), ranges)
    b, _ = baseline_surrogate(spec, x, PerturbationConfig(0.1, count=80, seed=2), ranges)
    assert np.abs(a.coefficients - b.coefficients).max() > 1e-12


def test_baseline_needs_enough_samples():
    spec, _, _ = affine_model()
    cfg = PerturbationConfig(proximity_threshold=0.1, count=3, seed=1)  # 3 < 3 + 1
    with pytest.raises(ValueError, match="count"):
        baseline_surrogate(spec, np.zeros(3), cfg, unit_ranges(3))


def test_baseline_rejects_degenerate_design():
    spec, _, _ = affine_model()
    cfg = PerturbationConfig(proximity_threshold=0.0, count=50, seed=1)  # all rows equal
    with pytest.raises(ValueError, match="rank"):
        baseline_surrogate(spec, np.full(3, 0.5), cfg, unit_ranges(3))


# ---------------------------------------------------------------- metrics

def _records_from_pairs(pairs):
    from frontprop.validation import ScatterRecord
    return [
        ScatterRecord(
            index=i,
            neighbor=np.zeros(1),
            nn_output=np.atleast_1d(np.asarray(nn, dtype=float)),
            surrogate_output=np.atleast_1d(np.asarray(lin, dtype=float)),
            distance=0.0,
        )
        for i, (nn, lin) in enumerate(pairs)
    ]


def test_metrics_perfect_agreement():
    report = fidelity_metrics(_records_from_pairs([(0.2, 0.2), (0.8, 0.8), (0.5, 0.5)]))
    assert report.max_abs_error == (0.0,)
    assert report.mean_abs_error == (0.0,)
    assert report.r_squared == (1.0,)


def test_metrics_constant_offset():
    report = fidelity_metrics(_records_from_pairs([(0.0, 0.1), (1.0, 1.1), (0.5, 0.6)]))
    assert report.max_abs_error[0] == pytest.approx(0.1)
    assert report.mean_abs_error[0] == pytest.approx(0.1)


def test_metrics_r_squared_undefined_for_constant_truth():
    report = fidelity_metrics(_records_from_pairs([(0.5, 0.4), (0.5, 0.6)]))
    assert report.r_squared == (None,)
    assert "undefined" in report.format()


def test_metrics_per_output_dimension():
    from frontprop.validation import ScatterRecord
    records = [
        ScatterRecord(0, np.zeros(1), np.array([1.0, 10.0]), np.array([1.0, 12.0]), 0.0),
        ScatterRecord(1, np.zeros(1), np.array([2.0, 20.0]), np.array([2.0, 18.0]), 0.1),
    ]
    report = fidelity_metrics(records)
    assert report.max_abs_error == (0.0, 2.0)
    assert len(report.r_squared) == 2


def test_metrics_need_records():
    with pytest.raises(ValueError):
        fidelity_metrics([])
