"""Trajectory/loop/sweep CSV files and JSON run reports."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from lvreg.analyze import RegimeReport
from lvreg.integrate import Trajectory

REPORT_VERSION = "1"
REPORT_FIELDS = ("scenario", "method", "label", "fits", "peaks", "metrics", "terminated_early", "version")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Header ``t,H,P``; one row per sample, 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("t,H,P\n")
        for t, (hh, pp) in zip(traj.times, traj.states):
            fh.write(f"{fmt(t)},{fmt(hh)},{fmt(pp)}\n")


def read_trajectory_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(times, states)`` from a file written by :func:`write_trajectory_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["t", "H", "P"]:
            raise ValueError(f"{path}: expected header t,H,P, got {','.join(header)}")
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.array(rows, dtype=float).reshape(-1, 3)
    return data[:, 0], data[:, 1:]


def write_loop_csv(result, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("t,setpoint,y,u\n")
        for t, sp, y, u in zip(result.times, result.setpoint, result.y, result.u):
            fh.write(f"{fmt(t)},{fmt(sp)},{fmt(y)},{fmt(u)}\n")


def write_sweep_csv(result, path) -> None:
    """One row per cell: swept coordinates, label, best_r2, peak_count, diverged."""
    cols = [*result.swept, "label", "best_r2", "peak_count", "diverged"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in result.rows():
            out = []
            for c in cols:
                v = row[c]
                if isinstance(v, bool):
                    out.append("true" if v else "false")
                elif isinstance(v, float):
                    out.append(fmt(v))
                elif v is None:
                    out.append("")
                else:
                    out.append(v)
            writer.writerow(out)


def jsonable(value):
    """Recursively replace non-finite floats with None and numpy scalars with Python ones."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def make_report(
    scenario: dict,
    method: str,
    label: str | None = None,
    report: RegimeReport | None = None,
    metrics: dict | None = None,
    terminated_early=None,
) -> dict:
    out = {
        "scenario": scenario,
        "method": method,
        "label": label,
        "fits": [f.to_dict() for f in report.fits] if report else [],
        "peaks": [p.to_dict() for p in report.peaks] if report else [],
        "metrics": dict(metrics or {}),
        "terminated_early": None,
        "version": REPORT_VERSION,
    }
    if report is not None:
        out["metrics"].setdefault("evidence", report.evidence())
    if terminated_early is not None:
        out["terminated_early"] = {
            "index": terminated_early.index,
            "cause": terminated_early.cause,
            "detail": terminated_early.detail,
        }
    return jsonable(out)


def write_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n", encoding="utf-8")
