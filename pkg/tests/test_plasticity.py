import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinsnn.devices import DwDeviceState, dw_conductance
from spinsnn.network import binary_switching_curve
from spinsnn.plasticity import (HomeostasisParams, LateralInhibition, StdpMode, StdpParams,
                                circuit_program, homeostasis_update, probabilistic_pulse,
                                programming_current, stdp_curve, stdp_delta, stdp_event_schedule,
                                stdp_gain)
from spinsnn.rng import RngStream
from spinsnn.synapses import BinarySynapse, MultibitSynapse, program_binary_stochastic, program_multibit

from oracles import within_sigma

P = StdpParams(A_plus=0.01, A_minus=0.008, tau_plus=20e-6, tau_minus=30e-6)


def test_params_validation():
    with pytest.raises(ValueError):
        StdpParams(A_plus=-1)
    with pytest.raises(ValueError):
        StdpParams(tau_plus=50e-9)  # t_prog = 1 ns > tau / 100
    with pytest.raises(ValueError):
        StdpParams(p_max=0.0)
    StdpParams(tau_plus=100e-9, tau_minus=100e-9)  # exactly tau / 100


def test_stdp_delta_examples():
    assert stdp_delta(P, 1e-15) == pytest.approx(P.A_plus)
    assert stdp_delta(P, P.tau_plus) == pytest.approx(P.A_plus / math.e)
    assert stdp_delta(P, -2 * P.tau_minus) == pytest.approx(-P.A_minus * math.exp(-2))
    assert stdp_curve(P, [0.0])[0] == (0.0, P.A_plus)


@settings(max_examples=50, deadline=None)
@given(dt=st.floats(-2e-4, 2e-4))
def test_stdp_sign_and_bound(dt):
    dw = stdp_delta(P, dt)
    assert (dw >= 0) == (dt >= 0) or dw == 0
    assert abs(dw) <= max(P.A_plus, P.A_minus)


def test_programming_current_examples():
    p0 = programming_current(P, 0.0)
    assert p0.current == P.I0_plus and p0.duration == P.t_prog
    assert programming_current(P, P.tau_plus).current == pytest.approx(P.I0_plus / math.e)
    assert programming_current(P, -P.tau_minus).current == pytest.approx(-P.I0_minus / math.e)
    with pytest.raises(ValueError):
        programming_current(P, 10 * P.tau_plus)


@pytest.mark.parametrize("sign", [1, -1])
def test_circuit_path_matches_window(sign):
    s0 = DwDeviceState(x=40e-9)
    g0 = dw_conductance(s0)
    k = stdp_gain(P, s0)
    tau = P.tau_plus if sign > 0 else P.tau_minus
    amp = P.A_plus if sign > 0 else P.A_minus
    i0 = P.I0_plus if sign > 0 else P.I0_minus
    for frac in np.linspace(0.1, 5.0, 25):
        dt = sign * frac * tau
        expected = k * i0 * stdp_delta(P, dt) / amp
        rect = dw_conductance(program_multibit(MultibitSynapse(s0), programming_current(P, dt)).dw) - g0
        assert rect == pytest.approx(expected, rel=1e-9)
        ramp = dw_conductance(circuit_program(s0, P, dt)) - g0
        assert ramp == pytest.approx(expected, rel=0.02)


def test_probabilistic_cap_and_flip_rates():
    curve = binary_switching_curve()
    p = StdpParams(A_plus=0.3, A_minus=0.05, tau_plus=20e-6, tau_minus=20e-6, mode="probabilistic",
                   p_max=0.1)
    assert stdp_delta(p, 0.0) == pytest.approx(0.1)
    assert stdp_delta(p, -1e-9) == pytest.approx(-0.05, rel=1e-3)
    n = 4000
    base = RngStream(5)
    for j, dt in enumerate([0.0, 0.5 * p.tau_plus, 2 * p.tau_plus]):
        pulse = probabilistic_pulse(p, dt, curve)
        target = abs(stdp_delta(p, dt))
        flips = sum(program_binary_stochastic(BinarySynapse(curve=curve), pulse,
                                              base.child(j * n + k)).weight for k in range(n))
        assert within_sigma(flips, n, target)
    with pytest.raises(ValueError):
        probabilistic_pulse(P, 0.0, curve)


def test_event_schedule():
    assert stdp_event_schedule([[0.0], [1e-6]], [], P) == []
    d = 5e-6
    ev = stdp_event_schedule([[0.0]], [d], P)
    assert len(ev) == 1
    assert ev[0].pulse.current == pytest.approx(P.I0_plus * math.exp(-d / P.tau_plus))
    ev = stdp_event_schedule([[d]], [0.0], P)
    assert len(ev) == 1 and ev[0].pulse.current < 0
    ev = stdp_event_schedule([[d, 2 * d]], [0.0], P, pairing="nearest")
    assert len(ev) == 1
    assert len(stdp_event_schedule([[d, 2 * d]], [0.0], P)) == 2
    with pytest.raises(ValueError):
        stdp_event_schedule([[1.0, 0.0]], [2.0], P)


def test_homeostasis_examples():
    h = HomeostasisParams(theta_increment=0.1, theta_decay_tau=1e-6, theta_floor=1.0)
    theta = 3.0
    for _ in range(2000):
        theta = homeostasis_update(theta, False, 1e-8, h)
    assert theta == pytest.approx(1.0)
    g = HomeostasisParams(theta_increment=0.1, theta_floor=1.0)
    theta = 1.0
    for k in range(10):
        theta = homeostasis_update(theta, True, 1e-8, g)
    assert theta == pytest.approx(2.0)
    # spike then 3 tau of silence with floor 0
    z = HomeostasisParams(theta_increment=0.5, theta_decay_tau=1e-6, theta_floor=0.0)
    theta = homeostasis_update(1.0, True, 1e-9, z)
    after = homeostasis_update(theta, False, 3e-6, z)
    assert after == pytest.approx(theta * math.exp(-3), rel=1e-12)
    vec = homeostasis_update(np.ones(3), np.array([1, 0, 1]), 1e-9, g)
    assert vec.tolist() == pytest.approx([1.1, 1.0, 1.1])


def test_lateral_inhibition():
    x = np.array([0.5, 1.0, 0.2])
    out = LateralInhibition(True, 0.3).apply(x, np.array([False, True, False]))
    assert out.tolist() == pytest.approx([0.2, 1.0, 0.0])
    assert LateralInhibition(False).apply(x, x > 0.9) is x


def test_window_magnitude_strictly_decreasing():
    for sign, tau in ((1, P.tau_plus), (-1, P.tau_minus)):
        mags = [abs(stdp_delta(P, sign * f * tau)) for f in np.linspace(0.01, 5, 60)]
        assert np.all(np.diff(mags) < 0)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(0.0, 5.0), pmax=st.floats(0.01, 1.0), dt=st.floats(-1e-4, 1e-4))
def test_probabilistic_never_exceeds_p_max(a, pmax, dt):
    p = StdpParams(A_plus=a, A_minus=a, mode="probabilistic", p_max=pmax)
    assert abs(stdp_delta(p, dt)) <= pmax + 1e-15
