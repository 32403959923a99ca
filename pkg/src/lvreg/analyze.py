"""Trajectory shape analysis: windowed linear fits, peaks, regime labels, convergence order."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from lvreg.dynamics import InitialCondition, LVParams, NoInteriorFixedPoint, equilibrium
from lvreg.integrate import IntegrationConfig, Method, Trajectory, reference_trajectory, simulate


class WindowTooSmall(ValueError):
    """Fewer than three samples fall inside a fit window."""


class UnstableStep(RuntimeError):
    """A step size in an order study diverged."""


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float
    max_abs_residual: float
    window: tuple[float, float]
    n_samples: int
    series: str = ""

    def at(self, t: float) -> float:
        return self.intercept + self.slope * t

    @property
    def midpoint_value(self) -> float:
        """Fitted value at the centre of the window."""
        return self.at(0.5 * (self.window[0] + self.window[1]))

    def to_dict(self) -> dict:
        return {
            "series": self.series,
            "window": list(self.window),
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "max_abs_residual": self.max_abs_residual,
            "n_samples": self.n_samples,
        }


def fit_samples(t, y, series: str = "") -> LinearFit:
    """Ordinary least squares of ``y`` against ``t``.

    ``r_squared`` is ``1 - SSres/SStot``; when ``SStot == 0`` it is 1 if the
    residuals vanish too and 0 otherwise.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError("t and y must be 1-D arrays of equal length")
    if t.size < 3:
        raise WindowTooSmall(f"need at least 3 samples, got {t.size}")
    tc = t - t.mean()
    # an exactly constant series must not pick up rounding noise from its mean
    yc = y - y.mean() if np.ptp(y) > 0 else np.zeros_like(y)
    sxx = float(np.dot(tc, tc))
    if sxx == 0.0:
        raise WindowTooSmall("all sample times coincide")
    slope = float(np.dot(tc, yc)) / sxx
    intercept = float(y.mean() - slope * t.mean())
    resid = yc - slope * tc
    # R^2 is scale free; normalising keeps tiny series out of the subnormal range
    scale = float(np.max(np.abs(yc))) or 1.0
    ss_res = float(np.dot(resid / scale, resid / scale))
    ss_tot = float(np.dot(yc / scale, yc / scale))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return LinearFit(
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        max_abs_residual=float(np.max(np.abs(resid))),
        window=(float(t[0]), float(t[-1])),
        n_samples=int(t.size),
        series=series,
    )


def _index_range(traj: Trajectory, window: tuple[float, float]) -> tuple[int, int]:
    t_start, t_end = window
    n = len(traj)
    lo = max(0, math.ceil((t_start - traj.t0) / traj.h - 1e-9))
    hi = min(n - 1, math.floor((t_end - traj.t0) / traj.h + 1e-9))
    return lo, hi


def fraction_window(traj: Trajectory, start: float, end: float = 1.0) -> tuple[float, float]:
    """Time window covering the ``[start, end]`` fraction of the run's horizon."""
    span = traj.t_end - traj.t0
    return (traj.t0 + start * span, traj.t0 + end * span)


def fit_linear(traj: Trajectory, series: str, window: tuple[float, float]) -> LinearFit:
    """Least-squares line through ``series`` (``"H"`` or ``"P"``) over a time window.

    Raises:
        WindowTooSmall: fewer than three samples inside ``window``.
    """
    lo, hi = _index_range(traj, window)
    if hi - lo + 1 < 3:
        raise WindowTooSmall(f"window {window} holds {max(0, hi - lo + 1)} samples, need 3")
    values = traj.series(series)[lo : hi + 1]
    return fit_samples(traj.times[lo : hi + 1], values, series=series.upper())


@dataclass(frozen=True)
class Peak:
    index: int
    time: float
    value: float
    series: str
    prominence: float

    def to_dict(self) -> dict:
        return {
            "series": self.series,
            "index": self.index,
            "time": self.time,
            "value": self.value,
            "prominence": self.prominence,
        }


def local_maxima(values) -> np.ndarray:
    """Indices of 3-point local maxima; a plateau reports its first sample."""
    x = np.asarray(values, dtype=float)
    if x.size < 3:
        return np.empty(0, dtype=int)
    d = np.diff(x)
    moves = np.flatnonzero(d != 0)
    rising = d[moves] > 0
    # a rise followed (after any plateau) by a fall
    top = rising[:-1] & ~rising[1:]
    return moves[:-1][top] + 1


def prominences(values, candidates) -> np.ndarray:
    """Height of each candidate above the higher of its two adjacent valleys.

    Valleys are the minima between a candidate and its neighbouring
    candidates (or the series ends).
    """
    x = np.asarray(values, dtype=float)
    idx = np.asarray(candidates, dtype=int)
    if idx.size == 0:
        return np.empty(0)
    bounds = np.concatenate(([0], idx, [x.size - 1]))
    gaps = np.array([x[bounds[k] : bounds[k + 1] + 1].min() for k in range(bounds.size - 1)])
    return x[idx] - np.maximum(gaps[:-1], gaps[1:])


def _peaks_from(traj: Trajectory, series: str, idx: np.ndarray, prom: np.ndarray) -> list[Peak]:
    vals = traj.series(series)
    name = series.upper()
    return [
        Peak(index=int(i), time=traj.t0 + int(i) * traj.h, value=float(vals[i]), series=name, prominence=float(p))
        for i, p in zip(idx, prom)
    ]


def filter_peaks(traj: Trajectory, peaks: list[Peak], min_prominence: float) -> list[Peak]:
    """Keep the peaks rising at least ``min_prominence`` above their adjacent valleys.

    Valleys are measured between the given peaks, so filtering the full
    prominence-0 set matches a direct :func:`find_peaks` call.
    """
    if min_prominence < 0:
        raise ValueError("min_prominence must be >= 0")
    if not peaks:
        return []
    series = peaks[0].series
    idx = np.array([p.index for p in peaks], dtype=int)
    prom = prominences(traj.series(series), idx)
    keep = prom >= min_prominence
    return _peaks_from(traj, series, idx[keep], prom[keep])


def find_peaks(traj: Trajectory, series: str, min_prominence: float = 0.0) -> list[Peak]:
    if min_prominence < 0:
        raise ValueError("min_prominence must be >= 0")
    values = traj.series(series)
    idx = local_maxima(values)
    prom = prominences(values, idx)
    keep = prom >= min_prominence
    return _peaks_from(traj, series, idx[keep], prom[keep])


class Regime(str, enum.Enum):
    EQUILIBRIUM = "EQUILIBRIUM"
    OSCILLATORY = "OSCILLATORY"
    GROWING_OSCILLATION = "GROWING_OSCILLATION"
    NEAR_LINEAR = "NEAR_LINEAR"
    COLLAPSED = "COLLAPSED"
    DIVERGED = "DIVERGED"


@dataclass(frozen=True)
class ClassifierThresholds:
    """Knobs of :func:`classify`.

    ``min_prominence`` is a fraction of the H series range. The window
    fractions locate the "beginning" fit, the linearity window and the
    collapse window within the run's time horizon.
    """

    eps_eq: float = 1e-6
    eps_collapse: float = 1e-3
    r2_min: float = 0.999
    growth_min: float = 0.01
    min_prominence: float = 0.01
    beginning_fraction: float = 0.1
    linear_fraction: float = 0.5
    collapse_fraction: float = 0.25

    def __post_init__(self) -> None:
        for name in ("eps_eq", "eps_collapse", "growth_min", "min_prominence"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        if not 0 <= self.r2_min <= 1:
            raise ValueError(f"r2_min must lie in [0, 1], got {self.r2_min}")
        for name in ("beginning_fraction", "linear_fraction", "collapse_fraction"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {value}")


@dataclass(frozen=True)
class RegimeReport:
    label: Regime
    fits: tuple[LinearFit, ...] = ()
    peaks: tuple[Peak, ...] = ()
    best_r2: float | None = None
    equilibrium_deviation: float | None = None
    h_final_max: float | None = None
    h_collapsed: bool = False
    negative_population: bool = False
    low_confidence: bool = False
    notes: tuple[str, ...] = field(default=())

    @property
    def peak_count(self) -> int:
        return len(self.peaks)

    def evidence(self) -> dict:
        return {
            "best_r2": self.best_r2,
            "peak_count": self.peak_count,
            "equilibrium_deviation": self.equilibrium_deviation,
            "h_final_max": self.h_final_max,
            "h_collapsed": self.h_collapsed,
            "negative_population": self.negative_population,
            "low_confidence": self.low_confidence,
            "notes": list(self.notes),
        }


def _fixed_point_deviation(traj: Trajectory, params: LVParams) -> float:
    # per-component relative deviation; absolute where the fixed-point coordinate is 0
    points = [(0.0, 0.0)]
    try:
        eq = equilibrium(params)
        points.append((eq.h, eq.p))
    except NoInteriorFixedPoint:
        pass
    best = math.inf
    for ph, pp in points:
        dh = np.abs(traj.H - ph) / (abs(ph) if ph != 0 else 1.0)
        dp = np.abs(traj.P - pp) / (abs(pp) if pp != 0 else 1.0)
        best = min(best, float(max(dh.max(), dp.max())))
    return best


def _growing(peaks: list[Peak], growth_min: float) -> bool:
    amps = [p.value for p in peaks]
    for prev, cur in zip(amps, amps[1:]):
        if prev <= 0 or (cur - prev) / prev <= growth_min:
            return False
    return True


def classify(traj: Trajectory, params: LVParams, thresholds: ClassifierThresholds | None = None) -> RegimeReport:
    """Label a trajectory; the first matching rule wins.

    Rules, in order: DIVERGED (run aborted), EQUILIBRIUM (never leaves a
    fixed point by more than ``eps_eq``), NEAR_LINEAR (P fit over the final
    ``linear_fraction`` of the horizon reaches ``r2_min``), COLLAPSED
    (``|H| < eps_collapse`` throughout the final ``collapse_fraction``),
    GROWING_OSCILLATION (at least three H peaks, each higher than the last
    by more than ``growth_min`` relative), OSCILLATORY otherwise. Fewer than
    three peaks still yields OSCILLATORY, flagged ``low_confidence``.
    """
    th = thresholds or ClassifierThresholds()
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    notes: list[str] = []
    negative = bool((traj.states < 0).any())
    if negative:
        notes.append("negative population encountered")

    peaks: list[Peak] = []
    h_range = float(traj.H.max() - traj.H.min())
    if len(traj) >= 3:
        peaks = find_peaks(traj, "H", th.min_prominence * h_range)

    fits: list[LinearFit] = []
    best_r2 = None
    for label, start in (("beginning", 0.0), ("final", 1.0 - th.linear_fraction)):
        end = th.beginning_fraction if label == "beginning" else 1.0
        try:
            fit = fit_linear(traj, "P", fraction_window(traj, start, end))
        except WindowTooSmall:
            notes.append(f"{label} P window too short to fit")
            continue
        fits.append(fit)
        if label == "final":
            best_r2 = fit.r_squared

    lo, _ = _index_range(traj, fraction_window(traj, 1.0 - th.collapse_fraction))
    h_final_max = float(np.abs(traj.H[lo:]).max())
    h_collapsed = h_final_max < th.eps_collapse
    deviation = _fixed_point_deviation(traj, params)

    def report(label: Regime, low_confidence: bool = False) -> RegimeReport:
        return RegimeReport(
            label=label,
            fits=tuple(fits),
            peaks=tuple(peaks),
            best_r2=best_r2,
            equilibrium_deviation=deviation,
            h_final_max=h_final_max,
            h_collapsed=h_collapsed,
            negative_population=negative,
            low_confidence=low_confidence,
            notes=tuple(notes),
        )

    if traj.terminated_early is not None:
        notes.append(f"run aborted at sample {traj.terminated_early.index}: {traj.terminated_early.detail}")
        return report(Regime.DIVERGED)
    if deviation < th.eps_eq:
        return report(Regime.EQUILIBRIUM)
    if best_r2 is not None and best_r2 >= th.r2_min:
        if h_collapsed:
            notes.append("H collapsed over the final window")
        return report(Regime.NEAR_LINEAR)
    if h_collapsed:
        return report(Regime.COLLAPSED)
    if len(peaks) >= 3:
        if _growing(peaks, th.growth_min):
            return report(Regime.GROWING_OSCILLATION)
        return report(Regime.OSCILLATORY)
    notes.append(f"only {len(peaks)} H peak(s) detected")
    return report(Regime.OSCILLATORY, low_confidence=True)


def endpoint_errors(
    method: Method | str, ic: InitialCondition, params: LVParams, t_end: float, h_list
) -> np.ndarray:
    """Max-norm endpoint error at each step size against :func:`reference_trajectory`.

    Raises:
        UnstableStep: a run at one of the step sizes diverged.
    """
    method = Method.parse(method)
    span = t_end - ic.t0
    ref = reference_trajectory(ic, params, t_end).states[-1]
    errors = []
    for h in h_list:
        n = int(round(span / h))
        if n < 1 or abs(n * h - span) > 1e-9 * span:
            raise ValueError(f"step {h} does not divide the span {span}")
        traj = simulate(ic, params, IntegrationConfig(h=h, n_steps=n, method=method))
        if traj.terminated_early is not None:
            raise UnstableStep(f"{method.value} diverged at h={h}")
        errors.append(float(np.max(np.abs(traj.states[-1] - ref))))
    return np.array(errors)


def estimate_order(method: Method | str, ic: InitialCondition, params: LVParams, t_end: float, h_list) -> float:
    """Slope of log(endpoint error) against log(h)."""
    hs = [float(h) for h in h_list]
    if len(set(hs)) < 3:
        raise ValueError("need at least three distinct step sizes")
    errors = endpoint_errors(method, ic, params, t_end, hs)
    if np.any(errors <= 0):
        raise ValueError("an endpoint error is exactly zero; order is undefined")
    return fit_samples(np.log(hs), np.log(errors)).slope
