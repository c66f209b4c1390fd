"""One forward pass versus a thousand.

The classic way to get a local linear surrogate is to perturb the input
many times, run the network on every perturbation, and fit the cloud by
least squares.  The propagation engine gets the exact tangent map out of
a single instrumented forward pass.  This script measures both on the
same wide network and scores them on held-out neighbors.

Run from the repository root:

    python3 demos/baseline_comparison.py
"""

import time

import numpy as np

from frontprop import (
    DenseLayer,
    DropoutLayer,
    ModelSpec,
    PerturbationConfig,
    baseline_surrogate,
    forward,
    forward_pass_count,
    frontprop,
    sample_neighbors,
)


def build_wide_network(seed=0):
    rng = np.random.default_rng(seed)

    def dense(units, fan_in, activation):
        limit = np.sqrt(6.0 / (fan_in + units))
        return DenseLayer(
            weights=rng.uniform(-limit, limit, size=(units, fan_in)),
            bias=np.zeros(units),
            activation=activation,
        )

    return ModelSpec(
        input_dim=20,
        layers=(
            dense(300, 20, "relu"),
            DropoutLayer(0.2),
            dense(300, 300, "relu"),
            DropoutLayer(0.2),
            dense(20, 300, "relu"),
            dense(1, 20, "sigmoid"),
        ),
        feature_ranges=np.stack([np.zeros(20), np.ones(20)], axis=1),
    )


def main():
    model = build_wide_network()
    x = np.random.default_rng(11).uniform(0.0, 1.0, size=20)
    config = PerturbationConfig(proximity_threshold=0.1, count=1000, seed=42)

    # warm-up, then measure with the pass counter running
    frontprop(model, x)
    before = forward_pass_count()
    t0 = time.perf_counter()
    explanation = frontprop(model, x)
    engine_time = time.perf_counter() - t0
    engine_passes = forward_pass_count() - before

    before = forward_pass_count()
    t0 = time.perf_counter()
    fitted, _ = baseline_surrogate(model, x, config, model.feature_ranges)
    baseline_time = time.perf_counter() - t0
    baseline_passes = forward_pass_count() - before

    # score both surrogates on neighbors neither has seen
    heldout_config = PerturbationConfig(proximity_threshold=0.1, count=1000, seed=43)
    heldout = sample_neighbors(x, heldout_config, model.feature_ranges)
    truth = np.stack([forward(model, nb).output for nb in heldout])

    print(f"{'method':<12} {'passes':>8} {'wall_s':>10} {'max|err|':>12} {'mean|err|':>12}")
    for label, surrogate, passes, wall in (
        ("frontprop", explanation.affine, engine_passes, engine_time),
        ("baseline", fitted, baseline_passes, baseline_time),
    ):
        predicted = np.stack([surrogate(nb) for nb in heldout])
        err = np.abs(predicted - truth)
        print(f"{label:<12} {passes:>8} {wall:>10.6f} {err.max():>12.4e} {err.mean():>12.4e}")

    print()
    print(f"speedup: {baseline_time / engine_time:.0f}x "
          f"({baseline_passes} network evaluations versus {engine_passes})")
    print("the fit also moves with its sampling seed; the extraction never does")

    # the same comparison via the command line:
    #   frontprop compare-baseline --model model.json --instances instances.json \
    #       --points 1000 --seed 42


if __name__ == "__main__":
    main()
