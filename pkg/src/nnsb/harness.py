"""RBER sweeps: repeated corruption trials, box statistics, robustness.

A sweep evaluates a bundle's accuracy under independent corruption trials
at each raw bit-error rate of an ascending grid.  Trial t at grid point i
uses the channel trial index i*trials + t, so every (point, trial) cell
draws from its own stream and the whole sweep is reproducible from the
master seed.

The robustness measure is read off the grid: the largest grid point whose
mean accuracy is still at least x times the uncorrupted baseline A.  When
even the smallest positive point fails, robustness is undefined (None) --
distinct from being zero, which the grid cannot resolve.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .bundle import LabeledDataset, ModelBundle
from .channel import SEED_DERIVATION, BscChannel, InjectionTarget, corrupt_bundle
from .engine import evaluate_accuracy


@dataclass(frozen=True)
class SweepConfig:
    rber_grid: tuple[float, ...]
    trials: int = 40
    master_seed: int = 0
    top_k: int = 1
    tensor_filter: frozenset[str] | None = None
    x: float = 0.95

    def __post_init__(self):
        grid = tuple(float(p) for p in self.rber_grid)
        if not grid:
            raise ValueError("rber grid must be non-empty")
        if any(not 0.0 <= p <= 1.0 for p in grid):
            raise ValueError(f"rber grid values must lie in [0, 1]: {grid}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError(f"rber grid must be strictly ascending: {grid}")
        object.__setattr__(self, "rber_grid", grid)
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")
        if not 0.0 < self.x <= 1.0:
            raise ValueError(f"x must be in (0, 1], got {self.x}")
        if self.tensor_filter is not None:
            object.__setattr__(self, "tensor_filter", frozenset(self.tensor_filter))


@dataclass(frozen=True)
class BoxStats:
    """Five-number box summary with 1.5-IQR whiskers and outliers."""

    mean: float
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...]

    def __post_init__(self):
        if not self.q1 <= self.median <= self.q3:
            raise ValueError("quartiles out of order")


def _mean(samples: list[float]) -> float:
    # Constant samples short-circuit so zero-error grid points compare
    # exactly against the baseline.
    if all(s == samples[0] for s in samples):
        return samples[0]
    return math.fsum(samples) / len(samples)


def _quantile(sorted_samples: list[float], p: float) -> float:
    """Linear interpolation between order statistics (the "type 7" rule)."""
    n = len(sorted_samples)
    if n == 1:
        return sorted_samples[0]
    h = (n - 1) * p
    lo = math.floor(h)
    hi = min(lo + 1, n - 1)
    frac = h - lo
    return sorted_samples[lo] + (sorted_samples[hi] - sorted_samples[lo]) * frac


def box_stats(samples: list[float]) -> BoxStats:
    """Box summary of a sample; whiskers reach the most extreme samples
    within 1.5 interquartile ranges of the quartiles."""
    samples = [float(s) for s in samples]
    if not samples:
        raise ValueError("box stats need at least one sample")
    ordered = sorted(samples)
    q1 = _quantile(ordered, 0.25)
    med = _quantile(ordered, 0.50)
    q3 = _quantile(ordered, 0.75)
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = [s for s in ordered if lo_fence <= s <= hi_fence]
    outliers = tuple(s for s in ordered if s < lo_fence or s > hi_fence)
    return BoxStats(
        mean=_mean(samples),
        median=med,
        q1=q1,
        q3=q3,
        whisker_low=inside[0],
        whisker_high=inside[-1],
        outliers=outliers,
    )


@dataclass(frozen=True)
class SweepPoint:
    rber: float
    accuracies: tuple[float, ...]
    flips: tuple[int, ...]
    box: BoxStats

    @property
    def mean_accuracy(self) -> float:
        return self.box.mean


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    baseline_accuracy: float
    points: tuple[SweepPoint, ...]
    metadata: dict[str, str] = field(default_factory=dict)

    @property
    def mean_accuracies(self) -> tuple[float, ...]:
        return tuple(pt.mean_accuracy for pt in self.points)


def sweep_result_from_means(
    rber_grid: list[float], means: list[float], baseline_accuracy: float, x: float = 0.95
) -> SweepResult:
    """Wrap published per-point mean accuracies as a single-sample sweep,
    e.g. to read a robustness measure off a table of results."""
    if len(rber_grid) != len(means):
        raise ValueError("grid and means must have equal length")
    config = SweepConfig(rber_grid=tuple(rber_grid), trials=1, x=x)
    points = tuple(
        SweepPoint(p, (m,), (0,), box_stats([m])) for p, m in zip(rber_grid, means)
    )
    return SweepResult(config, baseline_accuracy, points, {"source": "means-fixture"})


def run_sweep(
    bundle: ModelBundle, dataset: LabeledDataset, config: SweepConfig
) -> SweepResult:
    """Corrupt-and-evaluate over the full (grid x trials) matrix."""
    baseline = evaluate_accuracy(bundle, dataset, config.top_k)
    points = []
    for pi, rber in enumerate(config.rber_grid):
        channel = BscChannel(rber, config.master_seed)
        accuracies = []
        flips = []
        for t in range(config.trials):
            target = InjectionTarget(
                tensor_filter=config.tensor_filter,
                trial_index=pi * config.trials + t,
            )
            try:
                corrupted, n_flips = corrupt_bundle(bundle, channel, target)
                acc = evaluate_accuracy(corrupted, dataset, config.top_k)
            except Exception as err:
                raise RuntimeError(
                    f"sweep failed at rber={rber} trial={t}: {err}"
                ) from err
            accuracies.append(acc)
            flips.append(n_flips)
        points.append(
            SweepPoint(rber, tuple(accuracies), tuple(flips), box_stats(accuracies))
        )
    metadata = {
        "seed_derivation": SEED_DERIVATION,
        "codec": bundle.metadata.get("codec", ""),
        "q": bundle.metadata.get("q", ""),
        "parity": bundle.metadata.get("parity", ""),
    }
    return SweepResult(config, baseline, tuple(points), metadata)


def robustness(result: SweepResult, x: float | None = None) -> float | None:
    """Largest grid point whose mean accuracy is >= baseline * x.

    Positive grid points only; None when no positive point qualifies
    (below-grid-resolution robustness, reported distinctly from 0).
    """
    if x is None:
        x = result.config.x
    if not 0.0 < x <= 1.0:
        raise ValueError(f"x must be in (0, 1], got {x}")
    if not result.points:
        raise ValueError("empty sweep result")
    threshold = result.baseline_accuracy * x
    qualifying = [
        pt.rber for pt in result.points if pt.rber > 0 and pt.mean_accuracy >= threshold
    ]
    return max(qualifying) if qualifying else None


# --- output ------------------------------------------------------------------

CSV_TRIAL_HEADER = "rber,trial,accuracy,flips"
CSV_SUMMARY_HEADER = "rber,mean,median,q1,q3,whisker_low,whisker_high,outlier_count"


def sweep_to_csv(result: SweepResult) -> str:
    """Per-trial rows, a blank line, then the per-point summary block."""
    lines = [CSV_TRIAL_HEADER]
    for pt in result.points:
        for t, (acc, fl) in enumerate(zip(pt.accuracies, pt.flips)):
            lines.append(f"{pt.rber!r},{t},{acc!r},{fl}")
    lines.append("")
    lines.append(CSV_SUMMARY_HEADER)
    for pt in result.points:
        b = pt.box
        lines.append(
            f"{pt.rber!r},{b.mean!r},{b.median!r},{b.q1!r},{b.q3!r},"
            f"{b.whisker_low!r},{b.whisker_high!r},{len(b.outliers)}"
        )
    return "\n".join(lines) + "\n"


def sweep_to_json(result: SweepResult) -> str:
    r = robustness(result)
    doc = {
        "config": {
            "rber_grid": list(result.config.rber_grid),
            "trials": result.config.trials,
            "master_seed": result.config.master_seed,
            "top_k": result.config.top_k,
            "tensor_filter": sorted(result.config.tensor_filter)
            if result.config.tensor_filter
            else None,
            "x": result.config.x,
        },
        "baseline_accuracy": result.baseline_accuracy,
        "robustness": r,
        "metadata": dict(sorted(result.metadata.items())),
        "points": [
            {
                "rber": pt.rber,
                "accuracies": list(pt.accuracies),
                "flips": list(pt.flips),
                "box": {
                    "mean": pt.box.mean,
                    "median": pt.box.median,
                    "q1": pt.box.q1,
                    "q3": pt.box.q3,
                    "whisker_low": pt.box.whisker_low,
                    "whisker_high": pt.box.whisker_high,
                    "outliers": list(pt.box.outliers),
                },
            }
            for pt in result.points
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_sweep(result: SweepResult, csv_path: str | Path, json_path: str | Path | None = None):
    csv_path = Path(csv_path)
    csv_path.write_text(sweep_to_csv(result))
    if json_path is None:
        json_path = csv_path.with_suffix(".json")
    Path(json_path).write_text(sweep_to_json(result))
