"""Coefficient-space sweeps: simulate and classify every cell of a grid."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from lvreg.analyze import ClassifierThresholds, Regime, classify
from lvreg.dynamics import InitialCondition, LVParams
from lvreg.integrate import IntegrationConfig, Method, simulate

#: Sweepable coordinates, in grid (row-major) order.
AXES = ("r", "a", "b", "m", "h", "H0", "P0")


class GridTooLarge(ValueError):
    """The grid has more cells than the configured cap."""


@dataclass(frozen=True)
class Axis:
    """``count`` points from ``min`` to ``max``, linear or geometric."""

    min: float
    max: float
    count: int
    log: bool = False

    def __post_init__(self) -> None:
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"axis count must be an integer >= 2, got {self.count}")
        if not self.min < self.max:
            raise ValueError(f"axis needs min < max, got {self.min} >= {self.max}")
        if self.log and self.min <= 0:
            raise ValueError("log-spaced axis needs min > 0")

    def values(self) -> np.ndarray:
        if self.log:
            return np.geomspace(self.min, self.max, int(self.count))
        return np.linspace(self.min, self.max, int(self.count))


@dataclass(frozen=True)
class SweepSpec:
    """Grid definition.

    ``fixed`` supplies every coordinate in :data:`AXES` that is not swept.
    Each cell runs ``round(t_end / h)`` steps of ``method``.
    """

    axes: dict[str, Axis]
    fixed: dict[str, float]
    t_end: float
    method: Method = Method.RK4
    thresholds: ClassifierThresholds = field(default_factory=ClassifierThresholds)
    max_cells: int = 100_000
    divergence_bound: float = 1e12

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", Method.parse(self.method))
        unknown = (set(self.axes) | set(self.fixed)) - set(AXES)
        if unknown:
            raise ValueError(f"unknown sweep coordinates: {sorted(unknown)}")
        both = set(self.axes) & set(self.fixed)
        if both:
            raise ValueError(f"coordinates both swept and fixed: {sorted(both)}")
        missing = set(AXES) - set(self.axes) - set(self.fixed)
        if missing:
            raise ValueError(f"missing values for: {sorted(missing)}")
        if not self.t_end > 0:
            raise ValueError("t_end must be > 0")

    @property
    def swept(self) -> tuple[str, ...]:
        return tuple(name for name in AXES if name in self.axes)

    @property
    def n_cells(self) -> int:
        return math.prod(int(self.axes[name].count) for name in self.swept)


@dataclass(frozen=True)
class CellResult:
    coords: dict[str, float]
    label: Regime
    best_r2: float | None
    peak_count: int
    diverged: bool


@dataclass(frozen=True)
class SweepResult:
    swept: tuple[str, ...]
    cells: tuple[CellResult, ...]

    def labels(self) -> list[str]:
        return [c.label.value for c in self.cells]

    def rows(self) -> list[dict]:
        return [
            {
                **{name: c.coords[name] for name in self.swept},
                "label": c.label.value,
                "best_r2": c.best_r2,
                "peak_count": c.peak_count,
                "diverged": c.diverged,
            }
            for c in self.cells
        ]


def cells(spec: SweepSpec) -> list[dict[str, float]]:
    """Full coordinate dict of every cell, in row-major order over :data:`AXES`."""
    names = spec.swept
    grids = [spec.axes[name].values() for name in names]
    out = []
    for combo in itertools.product(*grids):
        point = dict(spec.fixed)
        point.update({name: float(v) for name, v in zip(names, combo)})
        out.append({name: float(point[name]) for name in AXES})
    return out


def evaluate_cell(coords: dict[str, float], spec: SweepSpec) -> CellResult:
    """Simulate and classify one grid point."""
    params = LVParams(coords["r"], coords["a"], coords["b"], coords["m"])
    ic = InitialCondition(h0=coords["H0"], p0=coords["P0"])
    cfg = IntegrationConfig.for_horizon(coords["h"], spec.t_end, spec.method, divergence_bound=spec.divergence_bound)
    report = classify(simulate(ic, params, cfg), params, spec.thresholds)
    return CellResult(
        coords=coords,
        label=report.label,
        best_r2=report.best_r2,
        peak_count=report.peak_count,
        diverged=report.label is Regime.DIVERGED,
    )


def _evaluate(args):
    return evaluate_cell(*args)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Evaluate every cell; ``workers > 1`` fans out over processes.

    Results are assembled in grid order whatever the completion order.

    Raises:
        GridTooLarge: more than ``spec.max_cells`` cells.
    """
    if spec.n_cells > spec.max_cells:
        raise GridTooLarge(f"{spec.n_cells} cells exceed the cap of {spec.max_cells}")
    points = cells(spec)
    if workers is None or workers <= 1 or len(points) == 1:
        results = [evaluate_cell(p, spec) for p in points]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate, [(p, spec) for p in points], chunksize=max(1, len(points) // (4 * workers))))
    return SweepResult(swept=spec.swept, cells=tuple(results))
