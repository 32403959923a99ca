"""Lotka-Volterra vector field, fixed points and first integral.

The system is::

    dH/dt = r*H - a*H*P
    dP/dt = b*H*P - m*P

with H the prey and P the predator population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class NoInteriorFixedPoint(ValueError):
    """Raised when a == 0 or b == 0, leaving the origin as the only fixed point."""


class DomainError(ValueError):
    """Raised when a population is non-positive where a logarithm is needed."""


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class LVParams:
    """Coefficients of the system.

    Attributes:
        r: prey growth rate.
        a: predation rate.
        b: predator reproduction rate per prey.
        m: predator death rate.
    """

    r: float
    a: float
    b: float
    m: float

    def __post_init__(self) -> None:
        for name in ("r", "a", "b", "m"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _require_finite(r=self.r, a=self.a, b=self.b, m=self.m)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.r, self.a, self.b, self.m)


@dataclass(frozen=True)
class State:
    """Prey/predator pair. Negative values are allowed (fixed-step overshoot)."""

    h: float
    p: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "p", float(self.p))
        _require_finite(h=self.h, p=self.p)


@dataclass(frozen=True)
class InitialCondition:
    h0: float
    p0: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        for name in ("h0", "p0", "t0"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _require_finite(h0=self.h0, p0=self.p0, t0=self.t0)
        if self.h0 < 0 or self.p0 < 0:
            raise ValueError(f"initial populations must be >= 0, got h0={self.h0}, p0={self.p0}")

    @property
    def state(self) -> State:
        return State(self.h0, self.p0)


def rhs(s: State, params: LVParams) -> tuple[float, float]:
    """Return ``(dH/dt, dP/dt)`` at ``s``.

    Evaluated in the factored form ``H*(r - a*P)``, ``P*(b*H - m)``, which is
    algebraically identical to the expanded one and vanishes exactly at the
    origin. At ``(m/b, r/a)`` it vanishes exactly whenever ``a*(r/a) == r``
    and ``b*(m/b) == m`` hold in floating point.
    """
    h, p = s.h, s.p
    return (h * (params.r - params.a * p), p * (params.b * h - params.m))


def equilibrium(params: LVParams) -> State:
    """Interior fixed point ``(m/b, r/a)``."""
    if params.a == 0.0 or params.b == 0.0:
        raise NoInteriorFixedPoint(
            f"a={params.a}, b={params.b}: only the origin is a fixed point"
        )
    return State(params.m / params.b, params.r / params.a)


def conserved_quantity(s: State, params: LVParams) -> float:
    """First integral ``V = b*H - m*ln(H) + a*P - r*ln(P)``.

    Constant along exact solutions, so its drift along a numerical
    trajectory measures integrator error.

    Raises:
        DomainError: if ``H <= 0`` or ``P <= 0``.
    """
    if s.h <= 0.0 or s.p <= 0.0:
        raise DomainError(f"conserved quantity needs H > 0 and P > 0, got ({s.h}, {s.p})")
    r, a, b, m = params.as_tuple()
    return b * s.h - m * math.log(s.h) + a * s.p - r * math.log(s.p)
