from fractions import Fraction

import numpy as np
import pytest

from lvreg import InitialCondition, LVParams

FIG2 = LVParams(r=0.2, a=0.8, b=1.03, m=0.04)
FIG3 = LVParams(r=1000.0, a=1000.0, b=100.0, m=0.00001)
FIG2_IC = InitialCondition(h0=10.0, p0=2.0)
FIG3_IC = InitialCondition(h0=1.0, p0=1.0)


@pytest.fixture
def fig2():
    return FIG2


@pytest.fixture
def fig3():
    return FIG3


def exact_rhs(h, p, params):
    r, a, b, m = (Fraction(v) for v in params.as_tuple())
    return r * h - a * h * p, b * h * p - m * p


def exact_step(h, p, params, dt, method):
    """Rational-arithmetic reference step, written straight from the textbook schemes."""
    h, p, dt = Fraction(h), Fraction(p), Fraction(dt)
    k1 = exact_rhs(h, p, params)
    if method == "euler":
        return h + dt * k1[0], p + dt * k1[1]
    if method == "heun":
        k2 = exact_rhs(h + dt * k1[0], p + dt * k1[1], params)
        return h + dt / 2 * (k1[0] + k2[0]), p + dt / 2 * (k1[1] + k2[1])
    k2 = exact_rhs(h + dt / 2 * k1[0], p + dt / 2 * k1[1], params)
    k3 = exact_rhs(h + dt / 2 * k2[0], p + dt / 2 * k2[1], params)
    k4 = exact_rhs(h + dt * k3[0], p + dt * k3[1], params)
    return (
        h + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        p + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
    )


def exact_params_sample(rng, n, lo=0.05, hi=5.0):
    """Random parameter sets whose float equilibrium zeroes the vector field exactly."""
    out = []
    while len(out) < n:
        r, a, b, m = rng.uniform(lo, hi, 4)
        if a * (r / a) == r and b * (m / b) == m:
            out.append(LVParams(r, a, b, m))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
