from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.constants import c

from leo_cho.beams import AntennaPattern, tx_gain
from leo_cho.linkbudget import RadioSpec, fspl, path_loss, rsrp

RADIO = RadioSpec()
PATTERN = AntennaPattern()


def fspl_oracle(f_ghz, d):
    # (4 pi d f / c)^2 in dB.
    return 20 * math.log10(4 * math.pi * d * f_ghz * 1e9 / c)


def test_fspl_reference_points():
    assert fspl(1.0, 1.0) == pytest.approx(32.45)
    assert fspl(20.0, 550_000) == pytest.approx(173.28, abs=0.01)
    assert fspl(20.0, 1_100_000) == pytest.approx(179.30, abs=0.01)
    assert fspl(20.0, 550_000) == pytest.approx(fspl_oracle(20.0, 550_000), abs=0.01)


@pytest.mark.parametrize("d", [0.0, -5.0])
def test_fspl_rejects_non_positive_distance(d):
    with pytest.raises(ValueError):
        fspl(20.0, d)


def test_path_loss_is_fspl_without_extra_terms():
    assert path_loss(RADIO, 700_000) == fspl(20.0, 700_000)
    assert path_loss(RadioSpec(extra_loss_db=2.5), 700_000) == fspl(20.0, 700_000) + 2.5


def test_rsrp_boresight_and_half_power():
    assert rsrp(RADIO, PATTERN, 0.0, 550_000) == pytest.approx(-50.08, abs=0.05)
    half = math.asin(1.61634 / PATTERN.ka)
    assert rsrp(RADIO, PATTERN, half, 550_000) == pytest.approx(-53.09, abs=0.05)


def test_rsrp_on_floor():
    floored = AntennaPattern(gain_floor=-30.0)
    null = math.asin(3.83171 / PATTERN.ka)
    # 23 dBW + 0.5 dBi + 39.7 dBi - 173.28 dB = -110.08 dBW.
    assert rsrp(RADIO, floored, null, 550_000) == pytest.approx(-80.08, abs=0.1)


@given(st.floats(0.0, 0.2), st.floats(500_000, 3_000_000))
def test_dbm_is_dbw_plus_30(alpha, d):
    dbw = RADIO.tx_power + tx_gain(alpha, PATTERN) + RADIO.rx_gain - fspl(20.0, d)
    assert rsrp(RADIO, PATTERN, alpha, d) - 30.0 == pytest.approx(dbw, abs=1e-9)


@given(st.floats(0.0, 0.09), st.floats(500_000, 2_000_000), st.floats(1.0, 1e5))
def test_rsrp_decreases_with_distance(alpha, d, extra):
    assert rsrp(RADIO, PATTERN, alpha, d + extra) < rsrp(RADIO, PATTERN, alpha, d)


def test_rsrp_non_increasing_on_main_lobe():
    a = np.linspace(0.0, math.asin(3.83171 / PATTERN.ka) * 0.999, 500)
    assert np.all(np.diff(rsrp(RADIO, PATTERN, a, 800_000)) <= 0)
