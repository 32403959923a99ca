import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lvreg import InitialCondition, LVParams
from lvreg.control import (
    Diverged,
    LVSetup,
    NonFiniteLoop,
    PIDParams,
    PIDState,
    PlantFO,
    ZeroPlateau,
    calibrate_gain,
    compare,
    loop_metrics,
    lv_feedforward_signal,
    pid_step,
    plant_step,
    plateau_fit,
    resample_hold,
    run_open_loop,
    run_pid_loop,
)
from lvreg.integrate import IntegrationConfig, simulate

from conftest import FIG3, FIG3_IC

finite = st.floats(-1e3, 1e3)


def test_pid_pure_proportional():
    u, _ = pid_step(PIDState(), 0.5, 0.01, PIDParams(kp=2, ki=0, kd=0))
    assert u == 1.0


def test_pid_integral_rectangle_rule():
    params = PIDParams(kp=0, ki=1, kd=0)
    state = PIDState()
    for _ in range(3):
        u, state = pid_step(state, 1.0, 0.1, params)
    assert u == pytest.approx(0.3, abs=1e-15)


def test_pid_zero_error_stays_zero():
    params = PIDParams(kp=3, ki=2, kd=1)
    state = PIDState()
    for _ in range(100):
        u, state = pid_step(state, 0.0, 0.01, params)
        assert u == 0.0


def test_pid_derivative_term():
    params = PIDParams(kp=0, ki=0, kd=2)
    u, state = pid_step(PIDState(), 1.0, 0.5, params)
    assert u == 0.0  # no previous error yet
    u, _ = pid_step(state, 2.0, 0.5, params)
    assert u == pytest.approx(4.0)


@given(finite, finite, finite, finite)
def test_pid_kd_zero_ignores_previous_error(e, prev_a, prev_b, integral):
    params = PIDParams(kp=1.3, ki=0.7, kd=0.0)
    ua, sa = pid_step(PIDState(integral, prev_a), e, 0.05, params)
    ub, sb = pid_step(PIDState(integral, prev_b), e, 0.05, params)
    assert ua == ub and sa.integral == sb.integral


@given(finite, finite, finite, st.floats(-10, 0), st.floats(0.01, 10), finite, finite, st.floats(1e-3, 1))
def test_pid_output_within_limits(kp, ki, kd, lo, width, e, integral, dt):
    params = PIDParams(kp=kp, ki=ki, kd=kd, u_min=lo, u_max=lo + width)
    u, _ = pid_step(PIDState(integral, 0.0), e, dt, params)
    assert params.u_min <= u <= params.u_max


def test_pid_conditional_anti_windup():
    params = PIDParams(kp=1, ki=1, kd=0, u_min=-1, u_max=1)
    state = PIDState()
    for _ in range(50):
        u, state = pid_step(state, 5.0, 0.1, params)
        assert u == 1.0
    assert state.integral == 0.0  # saturated and pushing further: never integrated
    # an error that pulls out of saturation integrates again
    u, state = pid_step(PIDState(integral=2.0), -0.5, 0.1, params)
    assert state.integral == pytest.approx(1.95)


def test_pid_params_validation():
    with pytest.raises(ValueError):
        PIDParams(u_min=1, u_max=1)
    with pytest.raises(ValueError):
        PIDParams(kp=math.nan)
    with pytest.raises(ValueError):
        pid_step(PIDState(), 1.0, 0.0, PIDParams())


def test_plant_steady_state():
    assert plant_step(2.0, 1.0, 0.3, PlantFO(K=2, tau=1)) == 2.0


def test_plant_closed_form():
    assert plant_step(0.0, 1.0, 1.0, PlantFO(K=2, tau=1)) == pytest.approx(2 * (1 - math.exp(-1)), rel=1e-15)
    assert plant_step(0.0, 1.0, 1.0, PlantFO(K=2, tau=1)) == pytest.approx(1.26424111765711, rel=1e-13)


def test_plant_decays():
    assert plant_step(3.0, 0.0, 1e3, PlantFO()) == pytest.approx(0.0, abs=1e-300)


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(1e-3, 5), st.floats(0.1, 10), st.floats(0.1, 5))
def test_plant_semigroup(y, u, dt, K, tau):
    plant = PlantFO(K=K, tau=tau)
    one = plant_step(y, u, dt, plant)
    two = plant_step(plant_step(y, u, dt / 2, plant), u, dt / 2, plant)
    assert two == pytest.approx(one, rel=1e-12, abs=1e-12 * max(1.0, abs(K * u), abs(y)))


def test_plant_validation():
    with pytest.raises(ValueError):
        PlantFO(tau=0)
    with pytest.raises(ValueError):
        PlantFO(K=0)


def pi_loop_oracle(K, tau, kp, ki, dt, n, sp, y0=0.0):
    """Unsaturated PI loop as a linear recursion x_{k+1} = A x_k + c on (y, integral)."""
    phi = math.exp(-dt / tau)
    # u_k = kp*e + ki*(I + e*dt), e = sp - y
    gu_y = -(kp + ki * dt)
    gu_i = ki
    gu_c = (kp + ki * dt) * sp
    A = np.array([[phi + (1 - phi) * K * gu_y, (1 - phi) * K * gu_i], [-dt, 1.0]])
    c = np.array([(1 - phi) * K * gu_c, dt * sp])
    x = np.array([y0, 0.0])
    ys = []
    for _ in range(n):
        ys.append(x[0])
        x = A @ x + c
    return np.array(ys)


def test_pid_loop_matches_state_space_oracle():
    res = run_pid_loop(PlantFO(K=2, tau=1), PIDParams(kp=1, ki=0.5), 1.0, 0.01, 20.0)
    oracle = pi_loop_oracle(2.0, 1.0, 1.0, 0.5, 0.01, res.y.size, 1.0)
    assert np.allclose(res.y, oracle, rtol=1e-10, atol=1e-12)


def test_pid_loop_zero_gains():
    res = run_pid_loop(PlantFO(y0=0.5), PIDParams(kp=0, ki=0, kd=0), 1.0, 0.01, 10.0)
    assert np.all(res.u == 0)
    assert np.all(np.diff(res.y) < 0)
    assert res.metrics.steady_state_error == pytest.approx(1.0, abs=1e-4)
    res = run_pid_loop(PlantFO(), PIDParams(kp=0, ki=0, kd=0), 1.0, 0.01, 10.0)
    assert res.metrics.steady_state_error == 1.0
    assert not res.metrics.settled


def test_pid_loop_default_settles():
    res = run_pid_loop(PlantFO(), PIDParams(), 1.0, 0.01, 20.0)
    m = res.metrics
    assert m.settled and m.settling_time < 20
    assert m.steady_state_error < 1e-3
    assert res.setpoint.size == res.y.size == res.u.size == 2001


def test_pid_loop_unstable_gains():
    with pytest.raises(NonFiniteLoop):
        run_pid_loop(PlantFO(), PIDParams(kp=1e6), 1.0, 0.1, 20.0)


def test_setpoint_profile_callable():
    res = run_pid_loop(PlantFO(), PIDParams(), lambda t: 0.0 if t < 1 else 2.0, 0.01, 30.0)
    assert res.setpoint[0] == 0.0 and res.setpoint[-1] == 2.0
    assert res.y[-1] == pytest.approx(2.0, abs=1e-3)


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=50), st.floats(-5, 5), st.floats(1e-3, 1))
def test_metric_sanity(ys, sp, dt):
    sps = np.full(len(ys), sp)
    m = loop_metrics(sps, ys, dt)
    e = np.abs(sps - np.asarray(ys))
    assert m.iae >= 0 and m.ise >= 0
    assert m.ise <= e.max() * m.iae * (1 + 1e-12) + 1e-300
    if np.all(np.asarray(ys) <= sp) and ys[0] <= sp:
        assert m.overshoot_pct == 0.0


def test_metric_hand_values():
    m = loop_metrics([1, 1, 1, 1], [0, 0.5, 1.1, 1.0], 0.5)
    assert m.iae == pytest.approx((1 + 0.5 + 0.1 + 0) * 0.5)
    assert m.ise == pytest.approx((1 + 0.25 + 0.01) * 0.5)
    assert m.overshoot_pct == pytest.approx(10.0)
    assert m.settling_time == 1.5
    assert m.steady_state_error == 0.0


def test_lv_signal_identity_and_zero():
    traj = simulate(FIG3_IC, FIG3, IntegrationConfig(h=0.003, n_steps=2000))
    assert np.array_equal(lv_feedforward_signal(FIG3, FIG3_IC, 0.003, 2000, 1.0), traj.P)
    assert np.all(lv_feedforward_signal(FIG3, FIG3_IC, 0.003, 2000, 0.0) == 0)


def test_lv_signal_diverged():
    with pytest.raises(Diverged):
        lv_feedforward_signal(FIG3, FIG3_IC, 0.1, 1000, 1.0, method="euler")


def test_calibrate_gain():
    assert calibrate_gain(PlantFO(K=1), 1.0, 1.0) == 1.0
    assert calibrate_gain(PlantFO(K=2), 1.0, 1.0) == 0.5
    with pytest.raises(ZeroPlateau):
        calibrate_gain(PlantFO(), 1.0, 0.0)


def test_calibrated_gain_reproducible():
    gains = []
    for _ in range(2):
        traj = simulate(FIG3_IC, FIG3, IntegrationConfig(h=0.003, n_steps=6667))
        gains.append(calibrate_gain(PlantFO(), 1.0, plateau_fit(traj).midpoint_value))
    assert math.isfinite(gains[0])
    assert gains[0] == pytest.approx(gains[1], rel=1e-9, abs=0)


def test_calibrated_drive_reaches_setpoint():
    plant = PlantFO()
    traj = simulate(FIG3_IC, FIG3, IntegrationConfig(h=0.003, n_steps=6667))
    g = calibrate_gain(plant, 1.0, plateau_fit(traj).midpoint_value)
    u = resample_hold(g * traj.P, 0.003, 0.01, 2001)
    res = run_open_loop(plant, u, 1.0, 0.01)
    assert abs(res.y[-1] - 1.0) <= 0.02


def test_resample_hold():
    vals = np.arange(10.0)
    assert list(resample_hold(vals, 0.3, 0.1, 7)) == [0, 0, 0, 1, 1, 1, 2]
    assert resample_hold(vals, 0.1, 1.0, 3)[-1] == 9


def test_compare_zero_setpoint():
    cmp = compare(PlantFO(), PIDParams(), LVSetup(), 0.0, 0.01, 5.0)
    for side in (cmp.pid, cmp.lv):
        assert np.all(side.y == 0)
        assert side.metrics.iae == 0 and side.metrics.steady_state_error == 0
        assert side.metrics.settling_time == 0.0


def test_compare_table_and_reproducibility():
    a = compare(PlantFO(), PIDParams(), LVSetup(), 1.0, 0.01, 20.0)
    b = compare(PlantFO(), PIDParams(), LVSetup(), 1.0, 0.01, 20.0)
    assert a.pid == b.pid and a.lv == b.lv and a.gain == b.gain
    rows = a.table()
    assert [r["metric"] for r in rows] == ["iae", "ise", "overshoot_pct", "settling_time", "steady_state_error"]
    for r in rows[:2]:
        assert math.isfinite(r["pid"]) and math.isfinite(r["lv"])
    assert "iae" in a.format_table()


def test_compare_lv_divergence_keeps_pid():
    setup = LVSetup(h=0.1, method="euler")
    cmp = compare(PlantFO(), PIDParams(), setup, 1.0, 0.01, 20.0)
    assert cmp.lv is None and cmp.lv_error.startswith("Diverged")
    assert cmp.pid.metrics.settled
    assert "Diverged" in cmp.format_table()


def test_lv_setup_defaults_match_near_linear_regime():
    s = LVSetup()
    assert s.params == LVParams(1000, 1000, 100, 1e-5)
    assert s.ic == InitialCondition(1, 1)
    assert s.h == 0.003
