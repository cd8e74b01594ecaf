import numpy as np
import pytest
from hypothesis import given, strategies as st

from scmac.analog_chain import (
    INT_OVERFLOW,
    OUT_OF_LINEAR_RANGE,
    PP_UNDERFLOW,
    AnalogCalibration,
    AnalogLevel,
    Pulse,
    int_accumulate,
    pp_combine,
    sac_transfer,
    vtc_transfer,
)

CAL = AnalogCalibration()


def test_sac_endpoints_exact():
    assert sac_transfer(0, CAL).volts == 0.41
    assert sac_transfer(1144, CAL).volts == 1.0


def test_sac_midpoint():
    assert sac_transfer(572, CAL).volts == pytest.approx(0.705, abs=1e-15)


def test_sac_range_checked():
    with pytest.raises(ValueError):
        sac_transfer(1145, CAL)
    with pytest.raises(ValueError):
        sac_transfer(-1, CAL)


@given(st.integers(0, 1143))
def test_sac_monotone_and_affine(n):
    v0, v1 = sac_transfer(n, CAL).volts, sac_transfer(n + 1, CAL).volts
    assert v1 > v0
    assert v1 - v0 == pytest.approx(0.59 / 1144, rel=1e-9)


def test_vtc_examples():
    assert vtc_transfer(AnalogLevel(0.41), CAL).width == pytest.approx(8.2e-9, rel=1e-15)
    assert vtc_transfer(AnalogLevel(1.0), CAL).width == pytest.approx(20e-9, rel=1e-15)
    low = vtc_transfer(AnalogLevel(0.30), CAL)
    assert low.width == pytest.approx(6e-9, rel=1e-15)
    assert OUT_OF_LINEAR_RANGE in low.flags
    assert not vtc_transfer(AnalogLevel(0.35), CAL).flags
    with pytest.raises(ValueError):
        vtc_transfer(AnalogLevel(-0.1), CAL)


def test_vtc_nonlinearity_added():
    cal = AnalogCalibration(vtc_nonlin=(1e-12, 0.0, 2e-12))
    w = vtc_transfer(AnalogLevel(0.5), cal).width
    assert w == pytest.approx(20e-9 * 0.5 + 1e-12 + 2e-12 * 0.25, rel=1e-12)


@given(st.floats(0.35, 1.0), st.floats(0.35, 1.0))
def test_vtc_proportional(v1, v2):
    w1 = vtc_transfer(AnalogLevel(v1), CAL).width
    w2 = vtc_transfer(AnalogLevel(v2), CAL).width
    assert abs(w1 / w2 - v1 / v2) < 1e-12


def test_pp_examples():
    ref = Pulse(8.2e-9)
    assert pp_combine(Pulse(13e-9), Pulse(13e-9), ref).width == pytest.approx(8.2e-9, abs=1e-24)
    assert pp_combine(Pulse(12e-9), Pulse(8.2e-9), ref).width == pytest.approx(12e-9, abs=1e-24)
    out = pp_combine(Pulse(8.2e-9 + 3e-9), Pulse(8.2e-9 + 5e-9), ref)
    assert out.width == pytest.approx(6.2e-9, abs=1e-22)
    assert not out.flags


def test_pp_underflow_saturates():
    out = pp_combine(Pulse(1e-9), Pulse(20e-9), Pulse(8.2e-9))
    assert out.width == 0.0
    assert PP_UNDERFLOW in out.flags


def test_int_examples():
    assert int_accumulate(AnalogLevel(0.0), Pulse(0.0), CAL).volts == 0.0
    cal = AnalogCalibration(int_gain=10e6)
    assert int_accumulate(AnalogLevel(0.2), Pulse(10e-9), cal).volts == pytest.approx(0.3, abs=1e-15)
    state = AnalogLevel(0.0)
    for _ in range(6):
        state = int_accumulate(state, Pulse(7e-9), CAL)
    assert state.volts == pytest.approx(6 * 8.33e6 * 7e-9, rel=1e-14)


def test_int_overflow_flag():
    state = AnalogLevel(0.0)
    for _ in range(6):
        state = int_accumulate(state, Pulse(20e-9), CAL)
    assert INT_OVERFLOW not in state.flags
    state = int_accumulate(state, Pulse(20e-9), CAL)
    assert INT_OVERFLOW in state.flags


@given(st.lists(st.floats(0, 20e-9), min_size=1, max_size=6), st.randoms())
def test_int_order_independent(widths, rnd):
    def run(ws):
        s = AnalogLevel(0.0)
        for w in ws:
            s = int_accumulate(s, Pulse(w), CAL)
        return s.volts

    shuffled = list(widths)
    rnd.shuffle(shuffled)
    assert run(widths) == pytest.approx(run(shuffled), rel=1e-12, abs=1e-18)


def test_calibration_invariants():
    with pytest.raises(ValueError, match="vtc_linear_lo"):
        AnalogCalibration(vtc_linear_lo=0.45)
    with pytest.raises(ValueError, match="sac_v_min"):
        AnalogCalibration(sac_v_min=1.2)
    with pytest.raises(ValueError, match="int_gain"):
        AnalogCalibration(int_gain=0)


def test_noise_is_seeded():
    cal = AnalogCalibration(noise_sigma_v=5e-3)
    a = sac_transfer(100, cal, np.random.default_rng(3)).volts
    b = sac_transfer(100, cal, np.random.default_rng(3)).volts
    assert a == b != sac_transfer(100, cal).volts


def test_end_to_end_slope():
    # derivative of INT voltage with respect to ones-count through SAC -> VTC -> INT
    expect = 8.33e6 * 20e-9 * 0.59 / 1144
    assert CAL.volts_per_count == pytest.approx(expect, rel=1e-15)
    lo = vtc_transfer(sac_transfer(100, CAL), CAL).width
    hi = vtc_transfer(sac_transfer(101, CAL), CAL).width
    assert CAL.int_gain * (hi - lo) == pytest.approx(expect, rel=1e-9)
