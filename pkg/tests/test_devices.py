import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spinsnn.devices import (DW_CAL_CURRENT, DW_CAL_TIME, DW_MOBILITY, DW_PAIR_ENERGY,
                             DW_TRACK_LENGTH, DwDeviceState, LsvParams, MtjParams, MtjState,
                             dw_advance, dw_conductance, dw_write_energy, lsv_injected_current,
                             mtj_conductance)
from spinsnn.magnetodynamics import tmr_ratio


def test_dw_conductance_edges_and_midpoint():
    s = DwDeviceState(G_DW=0.1e-6)
    assert dw_conductance(s) == s.mtj.G_AP + 0.1e-6
    assert dw_conductance(s.at(s.L)) == pytest.approx(s.mtj.G_P + 0.1e-6, rel=1e-15)
    mid = DwDeviceState(x=DW_TRACK_LENGTH / 2)
    assert dw_conductance(mid) == pytest.approx((mid.mtj.G_P + mid.mtj.G_AP) / 2, rel=1e-15)


def test_calibration_point_exact():
    assert DW_MOBILITY == pytest.approx(80e-9 / (10.6e-6 * 2e-9))
    assert DW_MOBILITY == pytest.approx(3.77e6, rel=1e-3)
    s = dw_advance(DwDeviceState(), DW_CAL_CURRENT, DW_CAL_TIME)
    assert s.x == pytest.approx(DW_TRACK_LENGTH, rel=1e-15)
    assert s.fraction == pytest.approx(1.0, rel=1e-15)
    assert dw_advance(DwDeviceState(x=3e-9), 0.0, 1e-9).x == 3e-9


def test_write_reset_pair_energy():
    s = DwDeviceState()
    pair = 2 * dw_write_energy(s, DW_CAL_CURRENT, DW_CAL_TIME)
    assert pair == pytest.approx(DW_PAIR_ENERGY, rel=1e-12)
    assert pair == pytest.approx(0.1e-15, rel=1e-12)


def test_saturation_matches_stepped_integration():
    s = DwDeviceState(v_sat=20.0)
    big = 1e-3
    one = dw_advance(s, big, 1e-9)
    assert one.x == pytest.approx(20.0 * 1e-9)
    x = 0.0
    for _ in range(1000):
        x = min(x + min(DW_MOBILITY * big, 20.0) * 1e-12, s.L)
    assert one.x == pytest.approx(x, rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(x=st.floats(-1e-7, 2e-7), i=st.floats(-1e-4, 1e-4), dt=st.floats(1e-12, 1e-8))
def test_wall_never_leaves_track(x, i, dt):
    s = dw_advance(DwDeviceState(x=x), i, dt)
    assert 0.0 <= s.x <= s.L


def test_linearity_below_saturation():
    s = DwDeviceState()
    charges = np.linspace(0.5e-15, 20e-15, 15)  # I t well below full traversal
    dg = [dw_conductance(dw_advance(s, q / 2e-9, 2e-9)) - dw_conductance(s) for q in charges]
    slope, icpt = np.polyfit(charges, dg, 1)
    r2 = 1 - np.sum((dg - (slope * charges + icpt)) ** 2) / np.sum((dg - np.mean(dg)) ** 2)
    assert r2 > 0.999


def test_mtj_conductance_rolloff():
    p = MtjParams()
    assert mtj_conductance(p, MtjState.AP, 0.0) == p.G_AP
    assert mtj_conductance(p, "P", 1.0) == p.G_P

    def tmr_at(v):
        return tmr_ratio(1 / mtj_conductance(p, "AP", v), 1 / p.G_P)

    assert tmr_at(p.V_h) == pytest.approx(tmr_at(0.0) / 2, rel=1e-12)
    assert mtj_conductance(p, "AP", 1e6) == pytest.approx(p.G_P, rel=1e-9)
    with pytest.raises(ValueError):
        MtjParams(G_P=1e-6, G_AP=2e-6)


def test_lsv_injection():
    assert lsv_injected_current(LsvParams(1e-6, 0.4, 0.0), 1e-4) == pytest.approx(0.4e-4)
    assert lsv_injected_current(LsvParams(1e-6, 0.4, 1e-6), 1e-4) == pytest.approx(0.4e-4 / math.e)
    assert lsv_injected_current(LsvParams(1e-6, 1.0, 3e-6), 100e-6) == pytest.approx(4.98e-6, rel=1e-3)
    with pytest.raises(ValueError):
        LsvParams(0.0, 0.5, 0.0)


def test_device_validation():
    with pytest.raises(ValueError):
        DwDeviceState(mobility=0.0)
    with pytest.raises(ValueError):
        DwDeviceState(R_HM=-1.0)
    assert DwDeviceState(x=1.0).x == DW_TRACK_LENGTH


def test_substeps_compose():
    s = DwDeviceState(x=5e-9)
    i, dt = 3e-6, 0.4e-9
    one = dw_advance(s, i, 8 * dt)
    many = s
    for _ in range(8):
        many = dw_advance(many, i, dt)
    assert many.x == pytest.approx(one.x, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(v1=st.floats(0, 5), v2=st.floats(0, 5))
def test_mtj_conductance_monotone_in_bias(v1, v2):
    p = MtjParams()
    lo, hi = sorted((v1, v2))
    g_lo = mtj_conductance(p, "AP", lo)
    g_hi = mtj_conductance(p, "AP", -hi)
    assert g_lo <= g_hi + 1e-21
    assert p.G_AP <= g_lo and g_hi <= p.G_P
