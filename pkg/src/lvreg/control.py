"""PID baseline versus an LV-derived feedforward drive on a first-order plant.

The feedforward reading: in the stiff near-linear regime the predator series
P(t) rises quickly to a slowly drifting plateau, so ``g * P(t)`` is usable as
an open-loop soft-start actuation signal. Both drives act on the same
zero-order-hold plant and are scored with the same metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from lvreg.analyze import LinearFit, fit_linear, fraction_window
from lvreg.dynamics import InitialCondition, LVParams
from lvreg.integrate import IntegrationConfig, Method, Trajectory, simulate


class NonFiniteLoop(ArithmeticError):
    """Output or control went non-finite during a loop run."""


class Diverged(RuntimeError):
    """The LV simulation behind a feedforward signal diverged."""


class ZeroPlateau(ValueError):
    """Gain calibration against a zero plateau."""


@dataclass(frozen=True)
class PIDParams:
    kp: float = 1.0
    ki: float = 0.5
    kd: float = 0.0
    u_min: float = -math.inf
    u_max: float = math.inf

    def __post_init__(self) -> None:
        for name in ("kp", "ki", "kd"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.u_min < self.u_max:
            raise ValueError(f"u_min must be < u_max, got {self.u_min} >= {self.u_max}")


@dataclass(frozen=True)
class PIDState:
    integral: float = 0.0
    prev_error: float | None = None


@dataclass(frozen=True)
class PlantFO:
    """First-order lag ``tau * dy/dt = K*u - y``."""

    K: float = 2.0
    tau: float = 1.0
    y0: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.K) and self.K != 0):
            raise ValueError(f"K must be finite and nonzero, got {self.K}")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be > 0, got {self.tau}")


def pid_step(state: PIDState, e: float, dt: float, params: PIDParams) -> tuple[float, PIDState]:
    """One parallel-form PID update.

    The rectangle-rule integral is advanced before the output is formed,
    except when the unclamped output is saturated and ``e`` pushes it
    further in (conditional integration). The derivative term is zero on the
    first call, when there is no previous error.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    deriv = 0.0 if state.prev_error is None else (e - state.prev_error) / dt
    integral = state.integral + e * dt
    u_raw = params.kp * e + params.ki * integral + params.kd * deriv
    drive = e * params.ki
    if (u_raw > params.u_max and drive > 0) or (u_raw < params.u_min and drive < 0):
        integral = state.integral
        u_raw = params.kp * e + params.ki * integral + params.kd * deriv
    u = min(max(u_raw, params.u_min), params.u_max)
    return u, PIDState(integral=integral, prev_error=e)


def plant_step(y: float, u: float, dt: float, plant: PlantFO) -> float:
    """Exact zero-order-hold update of the first-order plant."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    target = plant.K * u
    return target + (y - target) * math.exp(-dt / plant.tau)


@dataclass(frozen=True)
class LoopMetrics:
    iae: float
    ise: float
    overshoot_pct: float
    settling_time: float | None
    steady_state_error: float

    @property
    def settled(self) -> bool:
        return self.settling_time is not None

    def to_dict(self) -> dict:
        return {
            "iae": self.iae,
            "ise": self.ise,
            "overshoot_pct": self.overshoot_pct,
            "settling_time": self.settling_time,
            "steady_state_error": self.steady_state_error,
        }


@dataclass(frozen=True, eq=False)
class LoopResult:
    dt: float
    setpoint: np.ndarray
    y: np.ndarray
    u: np.ndarray
    metrics: LoopMetrics
    label: str = ""

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.y.size) * self.dt

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LoopResult):
            return NotImplemented
        return (
            self.dt == other.dt
            and self.metrics == other.metrics
            and all(np.array_equal(x, z) for x, z in ((self.setpoint, other.setpoint), (self.y, other.y), (self.u, other.u)))
        )


def loop_metrics(setpoint, y, dt: float, band: float = 0.02) -> LoopMetrics:
    """Tracking metrics for sampled ``setpoint`` and output ``y``.

    IAE and ISE use the rectangle rule. Overshoot is measured past the final
    setpoint in the direction of the step from ``y[0]``, as a percentage of
    the step size. Settling time is the first sample time after which
    ``|y - sp| <= band * |sp|`` holds to the end; ``None`` if the last
    sample is outside the band.
    """
    sp = np.asarray(setpoint, dtype=float)
    y = np.asarray(y, dtype=float)
    e = sp - y
    iae = float(np.sum(np.abs(e)) * dt)
    ise = float(np.sum(e * e) * dt)
    final_sp = float(sp[-1])
    step = final_sp - float(y[0])
    if step != 0:
        excess = np.max((y - final_sp) * np.sign(step))
        overshoot = max(0.0, float(excess) / abs(step) * 100.0)
    else:
        overshoot = 0.0
    inside = np.abs(e) <= band * np.abs(sp)
    settling = None
    if inside[-1]:
        outside = np.flatnonzero(~inside)
        first = 0 if outside.size == 0 else int(outside[-1]) + 1
        settling = first * dt
    return LoopMetrics(
        iae=iae,
        ise=ise,
        overshoot_pct=overshoot,
        settling_time=settling,
        steady_state_error=float(abs(e[-1])),
    )


Setpoint = float | Callable[[float], float]


def _setpoint_samples(setpoint: Setpoint, n: int, dt: float) -> np.ndarray:
    if callable(setpoint):
        return np.array([float(setpoint(k * dt)) for k in range(n)])
    return np.full(n, float(setpoint))


def _n_samples(dt: float, t_end: float) -> int:
    if not dt > 0 or not t_end > 0:
        raise ValueError("dt and t_end must be > 0")
    return int(round(t_end / dt)) + 1


def run_pid_loop(plant: PlantFO, pid: PIDParams, setpoint: Setpoint, dt: float, t_end: float) -> LoopResult:
    """Closed loop: measure y, form the error, update the PID, advance the plant.

    Samples are taken at ``k*dt`` for ``k = 0 .. round(t_end/dt)``; ``u[k]``
    is held over ``[k*dt, (k+1)*dt)``.

    Raises:
        NonFiniteLoop: if y or u stops being finite.
    """
    n = _n_samples(dt, t_end)
    sp = _setpoint_samples(setpoint, n, dt)
    y = np.empty(n)
    u = np.empty(n)
    state = PIDState()
    yk = plant.y0
    for k in range(n):
        y[k] = yk
        uk, state = pid_step(state, float(sp[k]) - yk, dt, pid)
        if not (math.isfinite(uk) and math.isfinite(yk)):
            raise NonFiniteLoop(f"loop went non-finite at t={k * dt}")
        u[k] = uk
        yk = plant_step(yk, uk, dt, plant)
    return LoopResult(dt=dt, setpoint=sp, y=y, u=u, metrics=loop_metrics(sp, y, dt), label="pid")


def run_open_loop(plant: PlantFO, u, setpoint: Setpoint, dt: float) -> LoopResult:
    """Drive the plant with a precomputed signal sampled at ``dt``."""
    u = np.asarray(u, dtype=float)
    n = u.size
    sp = _setpoint_samples(setpoint, n, dt)
    y = np.empty(n)
    yk = plant.y0
    for k in range(n):
        y[k] = yk
        yk = plant_step(yk, float(u[k]), dt, plant)
        if not math.isfinite(yk):
            raise NonFiniteLoop(f"open loop went non-finite at t={k * dt}")
    return LoopResult(dt=dt, setpoint=sp, y=y, u=u.copy(), metrics=loop_metrics(sp, y, dt), label="lv")


@dataclass(frozen=True)
class LVSetup:
    """LV system used as a signal generator; defaults are the stiff near-linear regime."""

    params: LVParams = field(default_factory=lambda: LVParams(r=1000.0, a=1000.0, b=100.0, m=1e-5))
    ic: InitialCondition = field(default_factory=lambda: InitialCondition(h0=1.0, p0=1.0))
    h: float = 0.003
    method: Method = Method.RK4
    plateau_fraction: float = 0.5
    gain: float | None = None


def _lv_trajectory(params: LVParams, ic: InitialCondition, h: float, n_steps: int, method) -> Trajectory:
    traj = simulate(ic, params, IntegrationConfig(h=h, n_steps=n_steps, method=method))
    if traj.terminated_early is not None:
        raise Diverged(f"LV simulation diverged at sample {traj.terminated_early.index} ({traj.terminated_early.detail})")
    return traj


def lv_feedforward_signal(
    params: LVParams, ic: InitialCondition, h: float, n_steps: int, g: float, method: Method | str = Method.RK4
) -> np.ndarray:
    """``g * P(t)`` sampled on the LV grid ``t0 + i*h``.

    Raises:
        Diverged: the underlying simulation diverged.
    """
    traj = _lv_trajectory(params, ic, h, n_steps, method)
    return g * traj.P


def plateau_fit(traj: Trajectory, fraction: float = 0.5) -> LinearFit:
    """Linear fit of P over the final ``fraction`` of the run."""
    return fit_linear(traj, "P", fraction_window(traj, 1.0 - fraction))


def calibrate_gain(plant: PlantFO, setpoint: float, p_plateau: float) -> float:
    """Gain that maps the P plateau onto the setpoint at DC."""
    if p_plateau == 0:
        raise ZeroPlateau("P plateau is zero; no finite gain reaches the setpoint")
    return setpoint / (plant.K * p_plateau)


def resample_hold(values, h: float, dt: float, n: int) -> np.ndarray:
    """Sample-and-hold ``values`` (spaced ``h``) at times ``k*dt``, ``k < n``."""
    values = np.asarray(values, dtype=float)
    idx = np.floor(np.arange(n) * dt / h + 1e-9).astype(int)
    return values[np.minimum(idx, values.size - 1)]


@dataclass(frozen=True, eq=False)
class Comparison:
    pid: LoopResult
    lv: LoopResult | None
    gain: float | None
    p_plateau: float | None
    lv_error: str | None = None

    def table(self) -> list[dict]:
        """One row per metric with both sides side by side. No winner is picked."""
        pid_m = self.pid.metrics.to_dict()
        lv_m = self.lv.metrics.to_dict() if self.lv is not None else {}
        return [{"metric": k, "pid": pid_m[k], "lv": lv_m.get(k)} for k in pid_m]

    def format_table(self) -> str:
        def cell(v) -> str:
            if v is None:
                return "-"
            return f"{v:.6g}"

        lines = [f"{'metric':<20}{'pid':>14}{'lv':>14}"]
        for row in self.table():
            lines.append(f"{row['metric']:<20}{cell(row['pid']):>14}{cell(row['lv']):>14}")
        if self.lv_error:
            lines.append(f"lv: {self.lv_error}")
        return "\n".join(lines)


def compare(
    plant: PlantFO,
    pid: PIDParams,
    lv_setup: LVSetup,
    setpoint: float,
    dt: float,
    t_end: float,
) -> Comparison:
    """Run the PID loop and the LV feedforward drive under identical conditions.

    The LV side is simulated over ``t_end`` at its own step ``lv_setup.h``,
    calibrated from the P plateau (unless ``lv_setup.gain`` is given) and
    sample-and-held onto the loop grid. An LV divergence is recorded in
    ``lv_error`` and the PID side is still returned.
    """
    pid_result = run_pid_loop(plant, pid, setpoint, dt, t_end)
    n = pid_result.y.size
    n_lv = max(1, math.ceil(t_end / lv_setup.h))
    try:
        traj = _lv_trajectory(lv_setup.params, lv_setup.ic, lv_setup.h, n_lv, lv_setup.method)
    except Diverged as exc:
        return Comparison(pid=pid_result, lv=None, gain=None, p_plateau=None, lv_error=f"Diverged: {exc}")
    plateau = plateau_fit(traj, lv_setup.plateau_fraction).midpoint_value
    if lv_setup.gain is not None:
        g = lv_setup.gain
    elif setpoint == 0:
        g = 0.0
    else:
        g = calibrate_gain(plant, setpoint, plateau)
    u = resample_hold(g * traj.P, lv_setup.h, dt, n)
    lv_result = run_open_loop(plant, u, setpoint, dt)
    return Comparison(pid=pid_result, lv=lv_result, gain=g, p_plateau=plateau)
