"""Fixed-step integration: explicit Euler, Heun (improved Euler) and classical RK4.

The stage arithmetic lives in one numba-compiled function shared by
:func:`step` and :func:`simulate`, so a trajectory is bit-identical to
repeated single steps.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from lvreg.dynamics import InitialCondition, LVParams, State


class Method(enum.Enum):
    EULER = "euler"
    HEUN = "heun"
    RK4 = "rk4"

    @classmethod
    def parse(cls, value: "Method | str") -> "Method":
        if isinstance(value, Method):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown method {value!r}; expected one of euler, heun, rk4") from None


EULER, HEUN, RK4 = Method.EULER, Method.HEUN, Method.RK4

_CODES = {Method.EULER: 0, Method.HEUN: 1, Method.RK4: 2}

#: Global order of accuracy of each scheme.
ORDER = {Method.EULER: 1, Method.HEUN: 2, Method.RK4: 4}

# Kernel status codes.
_OK, _BOUND, _NONFINITE = 0, 1, 2


class NonFiniteState(ArithmeticError):
    """A step produced NaN or infinity."""


class NoConvergence(RuntimeError):
    """Step halving hit its floor before the endpoint settled."""


@numba.njit(cache=True)
def _advance(hh, pp, r, a, b, m, dt, code):
    k1h = hh * (r - a * pp)
    k1p = pp * (b * hh - m)
    if code == 0:
        return hh + dt * k1h, pp + dt * k1p
    if code == 1:
        h2 = hh + dt * k1h
        p2 = pp + dt * k1p
        k2h = h2 * (r - a * p2)
        k2p = p2 * (b * h2 - m)
        return hh + 0.5 * dt * (k1h + k2h), pp + 0.5 * dt * (k1p + k2p)
    half = 0.5 * dt
    h2 = hh + half * k1h
    p2 = pp + half * k1p
    k2h = h2 * (r - a * p2)
    k2p = p2 * (b * h2 - m)
    h3 = hh + half * k2h
    p3 = pp + half * k2p
    k3h = h3 * (r - a * p3)
    k3p = p3 * (b * h3 - m)
    h4 = hh + dt * k3h
    p4 = pp + dt * k3p
    k4h = h4 * (r - a * p4)
    k4p = p4 * (b * h4 - m)
    sixth = dt / 6.0
    return (
        hh + sixth * (k1h + 2.0 * k2h + 2.0 * k3h + k4h),
        pp + sixth * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
    )


@numba.njit(cache=True)
def _run(hh, pp, r, a, b, m, dt, n, code, bound, out):
    # out has shape (n + 1, 2); returns (number of valid rows, status)
    out[0, 0] = hh
    out[0, 1] = pp
    for i in range(1, n + 1):
        hh, pp = _advance(hh, pp, r, a, b, m, dt, code)
        if not (math.isfinite(hh) and math.isfinite(pp)):
            return i, _NONFINITE
        if abs(hh) > bound or abs(pp) > bound:
            return i, _BOUND
        out[i, 0] = hh
        out[i, 1] = pp
    return n + 1, _OK


@numba.njit(cache=True)
def _endpoint(hh, pp, r, a, b, m, dt, n, code):
    for _ in range(n):
        hh, pp = _advance(hh, pp, r, a, b, m, dt, code)
    return hh, pp


def step(s: State, params: LVParams, h: float, method: Method | str) -> State:
    """Advance ``s`` by one step of size ``h``.

    Raises:
        NonFiniteState: if the update is NaN or infinite.
    """
    if not h > 0:
        raise ValueError(f"step size must be > 0, got {h}")
    code = _CODES[Method.parse(method)]
    hh, pp = _advance(s.h, s.p, *params.as_tuple(), float(h), code)
    if not (math.isfinite(hh) and math.isfinite(pp)):
        raise NonFiniteState(f"step from ({s.h}, {s.p}) with h={h} produced ({hh}, {pp})")
    return State(hh, pp)


@dataclass(frozen=True)
class IntegrationConfig:
    h: float
    n_steps: int
    method: Method = Method.RK4
    divergence_bound: float = 1e12

    def __post_init__(self) -> None:
        object.__setattr__(self, "method", Method.parse(self.method))
        object.__setattr__(self, "h", float(self.h))
        if not (math.isfinite(self.h) and self.h > 0):
            raise ValueError(f"h must be finite and > 0, got {self.h}")
        if isinstance(self.n_steps, bool) or int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        object.__setattr__(self, "n_steps", int(self.n_steps))
        if not self.divergence_bound > 0:
            raise ValueError(f"divergence_bound must be > 0, got {self.divergence_bound}")

    @classmethod
    def for_horizon(cls, h: float, t_span: float, method: Method | str = Method.RK4, **kw) -> "IntegrationConfig":
        """Config with ``round(t_span / h)`` steps (at least one)."""
        return cls(h=h, n_steps=max(1, int(round(t_span / h))), method=method, **kw)


@dataclass(frozen=True)
class Termination:
    """Why and where a run stopped early.

    ``index`` is the sample index the offending state would have had; the
    trajectory holds exactly ``index`` samples.
    """

    index: int
    cause: str = "DIVERGED"
    detail: str = ""


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Densely sampled run. Sample ``i`` sits at time ``t0 + i*h``."""

    t0: float
    h: float
    states: np.ndarray
    method: Method = Method.RK4
    terminated_early: Termination | None = None
    n_requested: int = field(default=0)

    def __post_init__(self) -> None:
        self.states.setflags(write=False)

    def __len__(self) -> int:
        return self.states.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.t0 == other.t0
            and self.h == other.h
            and self.method == other.method
            and self.terminated_early == other.terminated_early
            and np.array_equal(self.states, other.states)
        )

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self)) * self.h

    @property
    def H(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def P(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def diverged(self) -> bool:
        return self.terminated_early is not None

    @property
    def t_end(self) -> float:
        return self.t0 + (len(self) - 1) * self.h

    def state(self, i: int) -> State:
        return State(*self.states[i])

    def series(self, name: str) -> np.ndarray:
        key = name.upper()
        if key == "H":
            return self.H
        if key == "P":
            return self.P
        raise ValueError(f"series must be 'H' or 'P', got {name!r}")


def simulate(ic: InitialCondition, params: LVParams, cfg: IntegrationConfig) -> Trajectory:
    """Apply :func:`step` ``cfg.n_steps`` times from ``ic``.

    The run stops at the first state that is non-finite or exceeds
    ``cfg.divergence_bound`` in absolute value; that state is not stored and
    the trajectory carries a :class:`Termination` record instead.
    """
    out = np.empty((cfg.n_steps + 1, 2))
    n_valid, status = _run(
        ic.h0, ic.p0, *params.as_tuple(), cfg.h, cfg.n_steps, _CODES[cfg.method], cfg.divergence_bound, out
    )
    term = None
    if status != _OK:
        detail = "non-finite state" if status == _NONFINITE else f"|state| > {cfg.divergence_bound:g}"
        term = Termination(index=int(n_valid), cause="DIVERGED", detail=detail)
    states = out[:n_valid].copy() if n_valid < out.shape[0] else out
    return Trajectory(
        t0=ic.t0, h=cfg.h, states=states, method=cfg.method, terminated_early=term, n_requested=cfg.n_steps
    )


def endpoint(ic: InitialCondition, params: LVParams, h: float, n_steps: int, method: Method | str = RK4) -> State:
    """Final state of a run without storing the samples. Non-finite results raise."""
    hh, pp = _endpoint(ic.h0, ic.p0, *params.as_tuple(), float(h), int(n_steps), _CODES[Method.parse(method)])
    if not (math.isfinite(hh) and math.isfinite(pp)):
        raise NonFiniteState(f"run with h={h}, n={n_steps} ended at ({hh}, {pp})")
    return State(hh, pp)


def reference_trajectory(
    ic: InitialCondition,
    params: LVParams,
    t_end: float,
    *,
    tol: float = 1e-10,
    h_start: float = 0.01,
    h_floor: float = 1e-9,
    max_samples: int = 10_000_000,
) -> Trajectory:
    """High-accuracy RK4 run to ``t_end`` by successive step halving.

    The step starts at ``h_start`` (shrunk so that it divides the span) and
    is halved until the endpoint moves by less than ``tol`` in max-norm
    between two successive runs; the finer run is returned. Runs that blow
    up count as unconverged.

    Raises:
        NoConvergence: if the step drops below ``h_floor`` or the dense
            result would exceed ``max_samples`` samples.
    """
    span = t_end - ic.t0
    if not span > 0:
        raise ValueError(f"t_end must exceed t0={ic.t0}, got {t_end}")
    n = max(1, math.ceil(span / h_start))
    prev: State | None = None
    while True:
        h = span / n
        if h < h_floor:
            raise NoConvergence(f"step fell below {h_floor:g} without meeting tol={tol:g}")
        if n + 1 > max_samples:
            raise NoConvergence(f"{n + 1} samples needed, above max_samples={max_samples}")
        try:
            cur = endpoint(ic, params, h, n, RK4)
        except NonFiniteState:
            cur = None
        if cur is not None and prev is not None:
            if max(abs(cur.h - prev.h), abs(cur.p - prev.p)) < tol:
                return simulate(ic, params, IntegrationConfig(h=h, n_steps=n, method=RK4, divergence_bound=math.inf))
        prev = cur
        n *= 2
