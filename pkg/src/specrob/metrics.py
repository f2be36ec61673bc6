"""Corruption accuracy tables, mean corruption error, and scatter fits.

mCE follows the benchmark convention: average over corruptions of the
model's summed-over-severity error divided by the baseline's. The scatter
fit regresses per-corruption accuracy change (percentage points vs the
baseline) on the corruption's high-frequency energy fraction.
"""

from dataclasses import dataclass, field

import numpy as np

from .corruptions import SEVERITIES, CorruptionSpec, apply_corruption_batch

__all__ = [
    "CorruptionRow",
    "MetricsReport",
    "mce",
    "evaluate_error_grid",
    "accuracy_table",
    "scatter_fit",
    "scatter_points",
]


@dataclass(frozen=True)
class CorruptionRow:
    corruption: str
    severity: int
    error: float


@dataclass
class MetricsReport:
    rows: list = field(default_factory=list)
    corruptions: list = field(default_factory=list)
    severities: tuple = SEVERITIES
    clean_error: float | None = None
    mce_value: float | None = None

    @property
    def error_grid(self) -> np.ndarray:
        """(K, S) error rates in suite order."""
        grid = np.empty((len(self.corruptions), len(self.severities)))
        lookup = {(r.corruption, r.severity): r.error for r in self.rows}
        for k, name in enumerate(self.corruptions):
            for s, sev in enumerate(self.severities):
                grid[k, s] = lookup[(name, sev)]
        return grid

    @property
    def per_corruption_accuracy(self) -> dict:
        grid = self.error_grid
        return {
            name: float(1.0 - grid[k].mean())
            for k, name in enumerate(self.corruptions)
        }

    @property
    def average_accuracy(self) -> float:
        return float(1.0 - self.error_grid.mean())


def mce(f_errors, f0_errors) -> float:
    """Mean corruption error of f relative to baseline f0 over a (K, S) grid."""
    f_errors = np.asarray(f_errors, dtype=np.float64)
    f0_errors = np.asarray(f0_errors, dtype=np.float64)
    if f_errors.shape != f0_errors.shape or f_errors.ndim != 2:
        raise ValueError("error grids must share a (K, S) shape")
    f0_sums = f0_errors.sum(axis=1)
    if np.any(f0_sums <= 0):
        bad = int(np.argmin(f0_sums))
        raise ValueError(f"undefined ratio: baseline error sums to 0 for row {bad}")
    return float(np.mean(f_errors.sum(axis=1) / f0_sums))


def _error_rate(model, images, labels, batch_size=512):
    wrong = 0
    for start in range(0, images.shape[0], batch_size):
        pred = model.predict(images[start : start + batch_size])
        wrong += int(np.count_nonzero(pred != labels[start : start + batch_size]))
    return wrong / images.shape[0]


def evaluate_error_grid(
    model, images, labels, corruption_names, severities=SEVERITIES, seed=0
) -> np.ndarray:
    """(K, S) test error of `model` under each corruption and severity."""
    images = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels)
    if images.shape[0] == 0:
        raise ValueError("empty evaluation dataset")
    grid = np.empty((len(corruption_names), len(severities)))
    for k, name in enumerate(corruption_names):
        for s, sev in enumerate(severities):
            corrupted = apply_corruption_batch(images, CorruptionSpec(name, sev, seed))
            grid[k, s] = _error_rate(model, corrupted, labels)
    return grid


def accuracy_table(
    model, dataset, corruption_names, severities=SEVERITIES, seed=0
) -> MetricsReport:
    """Full per-corruption/severity error table plus the clean error."""
    images = np.asarray(dataset.images, dtype=np.float64)
    labels = np.asarray(dataset.labels)
    grid = evaluate_error_grid(model, images, labels, corruption_names, severities, seed)
    rows = [
        CorruptionRow(name, sev, float(grid[k, s]))
        for k, name in enumerate(corruption_names)
        for s, sev in enumerate(severities)
    ]
    return MetricsReport(
        rows=rows,
        corruptions=list(corruption_names),
        severities=tuple(severities),
        clean_error=_error_rate(model, images, labels),
    )


def scatter_fit(points) -> tuple[float, float]:
    """OLS line fit; returns (slope k, RMS residual r)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("need at least two (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    if np.ptp(x) == 0:
        raise ValueError("degenerate fit: all x values are equal")
    slope, intercept = np.polyfit(x, y, 1)
    residuals = y - (slope * x + intercept)
    return float(slope), float(np.sqrt(np.mean(residuals**2)))


def scatter_points(report: MetricsReport, baseline: MetricsReport, energies: dict):
    """Per-corruption (energy fraction, accuracy delta in points) pairs.

    `energies` maps corruption name to its high-frequency energy fraction;
    the accuracy delta is (model - baseline) severity-averaged accuracy
    in percentage points.
    """
    if report.corruptions != baseline.corruptions:
        raise ValueError("reports cover different corruption sets")
    acc_f = report.per_corruption_accuracy
    acc_f0 = baseline.per_corruption_accuracy
    missing = [name for name in report.corruptions if name not in energies]
    if missing:
        raise ValueError(f"missing energy fractions for: {missing}")
    return [
        (float(energies[name]), 100.0 * (acc_f[name] - acc_f0[name]))
        for name in report.corruptions
    ]
