"""CSV serialization: the canonical numeric output format.

All floats are written with repr-faithful %.17g formatting so that CSVs
round-trip exactly and reruns are byte-comparable.
"""

import csv
import json

import numpy as np

from ..heatmap import HeatMap
from ..metrics import CorruptionRow, MetricsReport

__all__ = [
    "save_matrix_csv",
    "load_matrix_csv",
    "save_heatmap",
    "load_heatmap",
    "save_report",
    "load_report",
    "save_bandcurve_csv",
    "save_energy_csv",
    "load_energy_csv",
]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_matrix_csv(path, grid) -> None:
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 2:
        raise ValueError("expected a 2D grid")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in grid:
            writer.writerow([_fmt(v) for v in row])


def load_matrix_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    return np.asarray(rows, dtype=np.float64)


def save_heatmap(base_path, heatmap: HeatMap) -> None:
    """Write <base>.csv (the grid) and <base>.json (metadata)."""
    save_matrix_csv(str(base_path) + ".csv", heatmap.grid)
    meta = {
        "kind": heatmap.kind,
        "norm": heatmap.norm,
        "sample_count": heatmap.sample_count,
        "model_id": heatmap.model_id,
        "layer": heatmap.layer,
        "window": heatmap.window,
    }
    with open(str(base_path) + ".json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_heatmap(base_path) -> HeatMap:
    grid = load_matrix_csv(str(base_path) + ".csv")
    with open(str(base_path) + ".json") as fh:
        meta = json.load(fh)
    return HeatMap(
        grid=grid,
        kind=meta["kind"],
        norm=meta["norm"],
        sample_count=meta["sample_count"],
        model_id=meta["model_id"],
        layer=meta.get("layer"),
        window=meta.get("window"),
    )


def save_report(path, report: MetricsReport, baseline: MetricsReport | None = None):
    """corruption,severity,error[,baseline_error] rows."""
    base_lookup = {}
    if baseline is not None:
        base_lookup = {(r.corruption, r.severity): r.error for r in baseline.rows}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["corruption", "severity", "error"]
        if baseline is not None:
            header.append("baseline_error")
        writer.writerow(header)
        for row in report.rows:
            out = [row.corruption, str(row.severity), _fmt(row.error)]
            if baseline is not None:
                out.append(_fmt(base_lookup[(row.corruption, row.severity)]))
            writer.writerow(out)


def load_report(path) -> tuple[MetricsReport, MetricsReport | None]:
    """Inverse of save_report; the baseline is None when absent."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        has_baseline = "baseline_error" in header
        rows, base_rows, names = [], [], []
        for rec in reader:
            if not rec:
                continue
            name, sev = rec[0], int(rec[1])
            rows.append(CorruptionRow(name, sev, float(rec[2])))
            if has_baseline:
                base_rows.append(CorruptionRow(name, sev, float(rec[3])))
            if name not in names:
                names.append(name)
    severities = tuple(sorted({r.severity for r in rows}))
    report = MetricsReport(rows=rows, corruptions=names, severities=severities)
    if not has_baseline:
        return report, None
    return report, MetricsReport(rows=base_rows, corruptions=names, severities=severities)


def save_bandcurve_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "bandwidth", "norm", "error_rate"])
        for row in rows:
            writer.writerow(
                [row["mode"], str(row["bandwidth"]), _fmt(row["norm"]), _fmt(row["error_rate"])]
            )


def save_energy_csv(path, energies: dict) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["corruption", "energy_fraction"])
        for name, value in energies.items():
            writer.writerow([name, _fmt(value)])


def load_energy_csv(path) -> dict:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        return {rec[0]: float(rec[1]) for rec in reader if rec}
