"""Sweep harness: box statistics, robustness measure, determinism, output."""

import json

import numpy as np
import pytest

from nnsb.harness import (
    CSV_SUMMARY_HEADER,
    CSV_TRIAL_HEADER,
    BoxStats,
    SweepConfig,
    box_stats,
    robustness,
    run_sweep,
    sweep_result_from_means,
    sweep_to_csv,
    sweep_to_json,
    write_sweep,
)

# Published per-point mean accuracies for the 16-bit binary expansion
# MNIST experiment, RBER 0 .. 0.014 in steps of 0.001.
MNIST_MEANS = [
    0.9959, 0.9952, 0.9945, 0.9937, 0.9924,
    0.9906, 0.9885, 0.9847, 0.9816, 0.9754,
    0.96952, 0.9576, 0.94875, 0.9339, 0.9224,
]
MNIST_GRID = [i * 0.001 for i in range(15)]
MNIST_BASELINE = 0.9961


class TestBoxStats:
    def test_single_sample(self):
        b = box_stats([5.0])
        assert (b.mean, b.median, b.q1, b.q3) == (5, 5, 5, 5)
        assert (b.whisker_low, b.whisker_high) == (5, 5)
        assert b.outliers == ()

    def test_outlier_flagged(self):
        b = box_stats([1.0, 2.0, 3.0, 4.0, 100.0])
        assert b.outliers == (100.0,)
        assert b.whisker_high == 4.0
        assert b.whisker_low == 1.0

    def test_uniform_hundred(self):
        b = box_stats(list(range(100)))
        assert (b.q1, b.median, b.q3) == (24.75, 49.5, 74.25)

    def test_matches_numpy_reference(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            samples = rng.normal(size=int(rng.integers(1, 60))).tolist()
            b = box_stats(samples)
            assert abs(b.q1 - np.percentile(samples, 25)) < 1e-12
            assert abs(b.median - np.percentile(samples, 50)) < 1e-12
            assert abs(b.q3 - np.percentile(samples, 75)) < 1e-12
            assert abs(b.mean - np.mean(samples)) < 1e-12

    def test_invariants_random(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            samples = rng.standard_cauchy(size=int(rng.integers(1, 40))).tolist()
            b = box_stats(samples)
            assert b.q1 <= b.median <= b.q3
            assert min(samples) <= b.whisker_low <= b.whisker_high <= max(samples)
            iqr = b.q3 - b.q1
            for o in b.outliers:
                assert o < b.q1 - 1.5 * iqr or o > b.q3 + 1.5 * iqr

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            box_stats([])

    def test_quartile_order_enforced(self):
        with pytest.raises(ValueError):
            BoxStats(0, 1.0, 2.0, 0.5, 0, 1, ())


class TestRobustness:
    def test_published_mnist_table(self):
        result = sweep_result_from_means(MNIST_GRID, MNIST_MEANS, MNIST_BASELINE)
        assert robustness(result, 0.95) == 0.012

    def test_direct_definition(self):
        result = sweep_result_from_means([0.0, 0.001, 0.002], [0.99, 0.98, 0.90], 0.99)
        assert robustness(result, 0.95) == 0.001

    def test_all_below_threshold_is_undefined(self):
        result = sweep_result_from_means([0.0, 0.001, 0.002], [0.99, 0.50, 0.40], 0.99)
        assert robustness(result, 0.95) is None

    def test_non_increasing_in_x(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            means = np.clip(1.0 - np.sort(rng.uniform(0, 0.6, 6)), 0, 1).tolist()
            grid = np.sort(rng.uniform(1e-4, 0.2, 6)).tolist()
            result = sweep_result_from_means(grid, means, 1.0)
            values = []
            for x in (0.5, 0.7, 0.9, 0.99, 1.0):
                r = robustness(result, x)
                values.append(-1.0 if r is None else r)
            assert all(a >= b for a, b in zip(values, values[1:]))

    def test_x_validation(self):
        result = sweep_result_from_means([0.001], [0.9], 1.0)
        for bad in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                robustness(result, bad)


class TestSweepConfigValidation:
    def test_grid_must_ascend(self):
        with pytest.raises(ValueError):
            SweepConfig(rber_grid=(0.1, 0.1))
        with pytest.raises(ValueError):
            SweepConfig(rber_grid=(0.2, 0.1))

    def test_grid_bounds(self):
        with pytest.raises(ValueError):
            SweepConfig(rber_grid=(-0.1, 0.5))
        with pytest.raises(ValueError):
            SweepConfig(rber_grid=(0.5, 1.5))
        with pytest.raises(ValueError):
            SweepConfig(rber_grid=())

    def test_trials_and_x(self):
        with pytest.raises(ValueError):
            SweepConfig(rber_grid=(0.1,), trials=0)
        with pytest.raises(ValueError):
            SweepConfig(rber_grid=(0.1,), x=0.0)


class TestRunSweep:
    def test_zero_grid_samples_equal_baseline(self, toy, toy_bundle16):
        _, heldout = toy
        config = SweepConfig(rber_grid=(0.0,), trials=5, master_seed=3)
        result = run_sweep(toy_bundle16, heldout, config)
        assert all(a == result.baseline_accuracy for a in result.points[0].accuracies)
        assert result.points[0].mean_accuracy == result.baseline_accuracy
        assert result.points[0].flips == (0,) * 5

    def test_deterministic_output(self, toy, toy_bundle16):
        _, heldout = toy
        config = SweepConfig(rber_grid=(0.0, 0.01, 0.05), trials=4, master_seed=11)
        r1 = run_sweep(toy_bundle16, heldout, config)
        r2 = run_sweep(toy_bundle16, heldout, config)
        assert sweep_to_csv(r1) == sweep_to_csv(r2)
        assert sweep_to_json(r1) == sweep_to_json(r2)

    def test_sample_counts_and_metadata(self, toy, toy_bundle16):
        _, heldout = toy
        config = SweepConfig(rber_grid=(0.0, 0.02), trials=3, master_seed=1)
        result = run_sweep(toy_bundle16, heldout, config)
        assert all(len(pt.accuracies) == 3 for pt in result.points)
        assert result.metadata["codec"] == "binary"
        assert "splitmix64" in result.metadata["seed_derivation"]

    def test_csv_layout(self, toy, toy_bundle16, tmp_path):
        _, heldout = toy
        config = SweepConfig(rber_grid=(0.0, 0.03), trials=3, master_seed=2)
        result = run_sweep(toy_bundle16, heldout, config)
        csv_path = tmp_path / "r.csv"
        write_sweep(result, csv_path)
        text = csv_path.read_text()
        sections = text.split("\n\n")
        assert len(sections) == 2
        trial_lines = sections[0].strip().splitlines()
        summary_lines = sections[1].strip().splitlines()
        assert trial_lines[0] == CSV_TRIAL_HEADER
        assert summary_lines[0] == CSV_SUMMARY_HEADER
        assert len(trial_lines) == 1 + 2 * 3
        assert len(summary_lines) == 1 + 2
        # rows parse back to the recorded samples
        rber, trial, acc, flips = trial_lines[1].split(",")
        assert float(rber) == 0.0 and int(trial) == 0
        assert float(acc) == result.points[0].accuracies[0]
        assert int(flips) == result.points[0].flips[0]

        doc = json.loads((tmp_path / "r.json").read_text())
        assert doc["config"]["trials"] == 3
        assert doc["baseline_accuracy"] == result.baseline_accuracy
        assert len(doc["points"]) == 2

    def test_filtered_sweep(self, toy, toy_bundle16):
        _, heldout = toy
        config = SweepConfig(
            rber_grid=(0.05,), trials=2, master_seed=5, tensor_filter=frozenset({"fc1.b"})
        )
        result = run_sweep(toy_bundle16, heldout, config)
        # only the tiny bias vector is corrupted; flips stay small
        assert max(result.points[0].flips) <= toy_bundle16.tensors["fc1.b"].bit_count
