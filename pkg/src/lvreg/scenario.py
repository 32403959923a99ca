"""Scenario bundles and their flat ``section.key = value`` text format.

Example::

    # comments and blank lines are ignored
    preset = paper-fig3          # optional; later keys override it
    params.m = 2e-5
    integration.n_steps = 20000
    thresholds.r2_min = 0.99
    sweep.r = 100, 10000, 5, log

Numbers use a decimal point. Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from types import MappingProxyType

from lvreg.analyze import ClassifierThresholds
from lvreg.control import LVSetup, PIDParams, PlantFO
from lvreg.dynamics import InitialCondition, LVParams
from lvreg.integrate import IntegrationConfig, Method
from lvreg.sweep import AXES, Axis, SweepSpec


class ConfigError(ValueError):
    """Base class for scenario problems; the CLI maps it to exit code 2."""


class ParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"field {key!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class ValidationError(ConfigError):
    def __init__(self, message: str, key: str | None = None):
        self.key = key
        super().__init__(f"field {key!r}: {message}" if key else message)


@dataclass(frozen=True)
class ControlSetup:
    plant: PlantFO = field(default_factory=PlantFO)
    pid: PIDParams = field(default_factory=PIDParams)
    setpoint: float = 1.0
    dt: float = 0.01
    t_end: float = 20.0
    lv_h: float | None = None
    lv_gain: float | None = None


@dataclass(frozen=True)
class SweepSetup:
    axes: tuple[tuple[str, Axis], ...] = ()
    t_end: float | None = None
    max_cells: int = 100_000


@dataclass(frozen=True)
class Scenario:
    name: str
    params: LVParams
    ic: InitialCondition
    integration: IntegrationConfig
    thresholds: ClassifierThresholds = field(default_factory=ClassifierThresholds)
    control: ControlSetup | None = None
    sweep: SweepSetup | None = None

    @property
    def t_end(self) -> float:
        return self.ic.t0 + self.integration.n_steps * self.integration.h

    def lv_setup(self) -> LVSetup:
        """Feedforward generator for control comparisons: this scenario's LV system."""
        ctl = self.control or ControlSetup()
        return LVSetup(
            params=self.params,
            ic=self.ic,
            h=ctl.lv_h if ctl.lv_h is not None else self.integration.h,
            method=self.integration.method,
            plateau_fraction=self.thresholds.linear_fraction,
            gain=ctl.lv_gain,
        )

    def sweep_spec(self) -> SweepSpec:
        """Sweep over this scenario's values; without a ``sweep`` section it is a single cell."""
        setup = self.sweep or SweepSetup()
        axes = dict(setup.axes)
        base = {
            "r": self.params.r,
            "a": self.params.a,
            "b": self.params.b,
            "m": self.params.m,
            "h": self.integration.h,
            "H0": self.ic.h0,
            "P0": self.ic.p0,
        }
        return SweepSpec(
            axes=axes,
            fixed={k: v for k, v in base.items() if k not in axes},
            t_end=setup.t_end if setup.t_end is not None else self.integration.n_steps * self.integration.h,
            method=self.integration.method,
            thresholds=self.thresholds,
            max_cells=setup.max_cells,
            divergence_bound=self.integration.divergence_bound,
        )


PAPER_FIG2 = Scenario(
    name="paper-fig2",
    params=LVParams(r=0.2, a=0.8, b=1.03, m=0.04),
    ic=InitialCondition(h0=10.0, p0=2.0),
    integration=IntegrationConfig(h=0.25, n_steps=2000, method=Method.EULER),
)

PAPER_FIG3 = Scenario(
    name="paper-fig3",
    params=LVParams(r=1000.0, a=1000.0, b=100.0, m=0.00001),
    ic=InitialCondition(h0=1.0, p0=1.0),
    integration=IntegrationConfig(h=0.003, n_steps=10000, method=Method.RK4),
)

PRESETS = MappingProxyType({s.name: s for s in (PAPER_FIG2, PAPER_FIG3)})

_THRESHOLD_KEYS = tuple(f.name for f in dataclasses.fields(ClassifierThresholds))

_FLOAT_KEYS = {
    "params.r", "params.a", "params.b", "params.m",
    "ic.t0", "ic.h0", "ic.p0",
    "integration.h", "integration.divergence_bound",
    *(f"thresholds.{k}" for k in _THRESHOLD_KEYS),
    "control.setpoint", "control.dt", "control.t_end", "control.lv_h", "control.lv_gain",
    "plant.K", "plant.tau", "plant.y0",
    "pid.kp", "pid.ki", "pid.kd", "pid.u_min", "pid.u_max",
    "sweep.t_end",
}  # fmt: skip
_INT_KEYS = {"integration.n_steps", "sweep.max_cells"}
_STR_KEYS = {"name", "integration.method"}
_AXIS_KEYS = {f"sweep.{a}" for a in AXES}
KNOWN_KEYS = frozenset(_FLOAT_KEYS | _INT_KEYS | _STR_KEYS | _AXIS_KEYS | {"preset"})

_REQUIRED = ("params.r", "params.a", "params.b", "params.m", "ic.h0", "ic.p0", "integration.h")


def _number(text: str, key: str, line: int | None) -> float:
    try:
        return float(text)
    except ValueError:
        hint = " (use a decimal point, not a comma)" if "," in text else ""
        raise ParseError(f"not a number: {text!r}{hint}", line, key) from None


def _integer(text: str, key: str, line: int | None) -> int:
    try:
        return int(text)
    except ValueError:
        value = _number(text, key, line)
        if not value.is_integer():
            raise ParseError(f"not an integer: {text!r}", line, key) from None
        return int(value)


def _axis(text: str, key: str, line: int | None) -> Axis:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) not in (3, 4):
        raise ParseError("expected 'min, max, count[, log|lin]'", line, key)
    spacing = parts[3].lower() if len(parts) == 4 else "lin"
    if spacing not in ("lin", "log"):
        raise ParseError(f"spacing must be 'lin' or 'log', got {parts[3]!r}", line, key)
    lo, hi = _number(parts[0], key, line), _number(parts[1], key, line)
    count = _integer(parts[2], key, line)
    try:
        return Axis(lo, hi, count, log=spacing == "log")
    except ValueError as exc:
        raise ValidationError(str(exc), key) from None


def _read_pairs(text: str) -> tuple[str | None, dict[str, tuple[str, int]]]:
    preset = None
    pairs: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ParseError("unknown key", lineno, key)
        if not value:
            raise ParseError("empty value", lineno, key)
        if key in pairs or (key == "preset" and preset is not None):
            raise ParseError("duplicate key", lineno, key)
        if key == "preset":
            preset = value
        else:
            pairs[key] = (value, lineno)
    return preset, pairs


def to_mapping(s: Scenario) -> dict[str, object]:
    """Flat ``key -> value`` view of a scenario (the inverse of :func:`from_mapping`)."""
    out: dict[str, object] = {
        "name": s.name,
        "params.r": s.params.r,
        "params.a": s.params.a,
        "params.b": s.params.b,
        "params.m": s.params.m,
        "ic.t0": s.ic.t0,
        "ic.h0": s.ic.h0,
        "ic.p0": s.ic.p0,
        "integration.h": s.integration.h,
        "integration.n_steps": s.integration.n_steps,
        "integration.method": s.integration.method.value,
        "integration.divergence_bound": s.integration.divergence_bound,
    }
    for k in _THRESHOLD_KEYS:
        out[f"thresholds.{k}"] = getattr(s.thresholds, k)
    if s.control is not None:
        c = s.control
        out.update({
            "control.setpoint": c.setpoint,
            "control.dt": c.dt,
            "control.t_end": c.t_end,
            "plant.K": c.plant.K,
            "plant.tau": c.plant.tau,
            "plant.y0": c.plant.y0,
            "pid.kp": c.pid.kp,
            "pid.ki": c.pid.ki,
            "pid.kd": c.pid.kd,
            "pid.u_min": c.pid.u_min,
            "pid.u_max": c.pid.u_max,
        })  # fmt: skip
        if c.lv_h is not None:
            out["control.lv_h"] = c.lv_h
        if c.lv_gain is not None:
            out["control.lv_gain"] = c.lv_gain
    if s.sweep is not None:
        for name, axis in s.sweep.axes:
            out[f"sweep.{name}"] = f"{axis.min!r}, {axis.max!r}, {axis.count}, {'log' if axis.log else 'lin'}"
        if s.sweep.t_end is not None:
            out["sweep.t_end"] = s.sweep.t_end
        out["sweep.max_cells"] = s.sweep.max_cells
    return out


def dump_scenario(s: Scenario) -> str:
    """Serialize with shortest round-trip float reprs; no preset reference."""
    lines = []
    for key, value in to_mapping(s).items():
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"


def _build(values: dict[str, object]) -> Scenario:
    def missing(key: str):
        raise ValidationError("required field is missing", key)

    for key in _REQUIRED:
        if key not in values:
            missing(key)

    def make(key, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except ValueError as exc:
            raise ValidationError(str(exc), key) from None

    params = make("params", LVParams, values["params.r"], values["params.a"], values["params.b"], values["params.m"])
    ic = make("ic", InitialCondition, h0=values["ic.h0"], p0=values["ic.p0"], t0=values.get("ic.t0", 0.0))
    h = values["integration.h"]
    if not (math.isfinite(h) and h > 0):
        raise ValidationError(f"step size must be finite and > 0, got {h}", "integration.h")
    n_steps = values.get("integration.n_steps", 1000)
    if n_steps < 1:
        raise ValidationError(f"must be >= 1, got {n_steps}", "integration.n_steps")
    bound = values.get("integration.divergence_bound", 1e12)
    if not bound > 0:
        raise ValidationError(f"must be > 0, got {bound}", "integration.divergence_bound")
    method = make("integration.method", Method.parse, values.get("integration.method", "rk4"))
    integration = IntegrationConfig(h=h, n_steps=n_steps, method=method, divergence_bound=bound)
    th_values = {k: values[f"thresholds.{k}"] for k in _THRESHOLD_KEYS if f"thresholds.{k}" in values}
    thresholds = make("thresholds", ClassifierThresholds, **th_values)

    control = None
    if any(k.split(".")[0] in ("control", "plant", "pid") for k in values):
        d = ControlSetup()
        plant = make(
            "plant",
            PlantFO,
            K=values.get("plant.K", d.plant.K),
            tau=values.get("plant.tau", d.plant.tau),
            y0=values.get("plant.y0", d.plant.y0),
        )
        pid = make(
            "pid",
            PIDParams,
            kp=values.get("pid.kp", d.pid.kp),
            ki=values.get("pid.ki", d.pid.ki),
            kd=values.get("pid.kd", d.pid.kd),
            u_min=values.get("pid.u_min", d.pid.u_min),
            u_max=values.get("pid.u_max", d.pid.u_max),
        )
        for key in ("control.dt", "control.t_end", "control.lv_h"):
            if key in values and not (math.isfinite(values[key]) and values[key] > 0):
                raise ValidationError(f"must be > 0, got {values[key]}", key)
        control = ControlSetup(
            plant=plant,
            pid=pid,
            setpoint=values.get("control.setpoint", d.setpoint),
            dt=values.get("control.dt", d.dt),
            t_end=values.get("control.t_end", d.t_end),
            lv_h=values.get("control.lv_h"),
            lv_gain=values.get("control.lv_gain"),
        )

    sweep = None
    if any(k.startswith("sweep.") for k in values):
        axes = tuple((name, values[f"sweep.{name}"]) for name in AXES if f"sweep.{name}" in values)
        t_end = values.get("sweep.t_end")
        if t_end is not None and not t_end > 0:
            raise ValidationError(f"must be > 0, got {t_end}", "sweep.t_end")
        max_cells = values.get("sweep.max_cells", SweepSetup.max_cells)
        if max_cells < 1:
            raise ValidationError(f"must be >= 1, got {max_cells}", "sweep.max_cells")
        sweep = SweepSetup(axes=axes, t_end=t_end, max_cells=max_cells)

    return Scenario(
        name=str(values.get("name", "scenario")),
        params=params,
        ic=ic,
        integration=integration,
        thresholds=thresholds,
        control=control,
        sweep=sweep,
    )


def from_mapping(values: dict[str, object]) -> Scenario:
    return _build(dict(values))


def parse_scenario(text: str) -> Scenario:
    """Parse a scenario document.

    Raises:
        ParseError: malformed line, unknown key or unreadable value.
        ValidationError: missing required field or an invariant violation.
    """
    preset_name, pairs = _read_pairs(text)
    values: dict[str, object] = {}
    if preset_name is not None:
        if preset_name not in PRESETS:
            raise ValidationError(f"unknown preset {preset_name!r}; known: {', '.join(PRESETS)}", "preset")
        values.update(to_mapping(PRESETS[preset_name]))
        if "name" not in pairs:
            values["name"] = preset_name
    for key, (raw, lineno) in pairs.items():
        if key in _STR_KEYS:
            values[key] = raw
        elif key in _INT_KEYS:
            values[key] = _integer(raw, key, lineno)
        elif key in _AXIS_KEYS:
            values[key] = _axis(raw, key, lineno)
        else:
            values[key] = _number(raw, key, lineno)
    for key, value in list(values.items()):
        if key in _AXIS_KEYS and isinstance(value, str):
            values[key] = _axis(value, key, None)
    return _build(values)


def load_scenario(ref: str) -> Scenario:
    """Preset name or path to a scenario file."""
    if ref in PRESETS:
        return PRESETS[ref]
    with open(ref, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def with_overrides(s: Scenario, method: str | None = None, steps: int | None = None, thresholds: dict[str, str] | None = None) -> Scenario:
    """Apply CLI-style overrides, re-validating through the text path."""
    values = to_mapping(s)
    if method is not None:
        values["integration.method"] = method
    if steps is not None:
        values["integration.n_steps"] = steps
    for key, raw in (thresholds or {}).items():
        if key not in _THRESHOLD_KEYS:
            raise ParseError(f"unknown threshold; known: {', '.join(_THRESHOLD_KEYS)}", key=key)
        values[f"thresholds.{key}"] = _number(raw, f"thresholds.{key}", None)
    for key, value in list(values.items()):
        if key in _AXIS_KEYS and isinstance(value, str):
            values[key] = _axis(value, key, None)
    return _build(values)
