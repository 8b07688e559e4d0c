import math

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.constants import mu_0

from spinlink.thermal import (
    HeatScenario,
    dissipated_power,
    heat_budget,
    input_power,
    required_current,
    required_field,
)


def test_field_for_10_mhz():
    # 10 MHz / 28 GHz/T = 0.357 mT = 3.57 G
    assert required_field(10e6) == pytest.approx(3.5714e-4, rel=1e-4)


def test_current_is_ampere_law():
    b = 3.5714e-4
    assert required_current(b, 1e-6) * mu_0 / (2 * math.pi * 1e-6) == pytest.approx(b)
    assert required_current(b, 1e-6) == pytest.approx(1.786e-3, rel=1e-3)


def test_input_power():
    assert input_power(1.786e-3, 50.0) == pytest.approx(159.4e-6, rel=1e-3)


def test_dissipated_power_fraction():
    # 0.01 dB over 1 m absorbs 0.23 % of the input
    assert dissipated_power(150e-6, 0.01, 1.0, 0.1) == pytest.approx(34.5e-9, rel=2e-3)
    assert dissipated_power(150e-6, 0.0, 1.0, 0.1) == 0.0


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 10), st.floats(0, 10))
def test_dissipated_never_exceeds_delivered(p, duty, att, length):
    assert 0.0 <= dissipated_power(p, att, length, duty) <= p * duty + 1e-18


def test_default_budget():
    out = heat_budget(HeatScenario())
    assert out["dissipated_microwave_w"] == pytest.approx(34.5e-9, rel=2e-3)
    assert out["total_heat_w"] == pytest.approx(134.5e-9, rel=2e-3)
    assert out["cooling_margin"] == pytest.approx(74.3, rel=2e-3)
    assert out["input_power_peak_w"] == pytest.approx(0.5 * out["input_power_rms_w"])


def test_fast_gate_budget():
    out = heat_budget(HeatScenario(drive_power_w=15e-3, duty_cycle=0.01))
    assert out["dissipated_microwave_w"] == pytest.approx(345e-9, rel=2e-3)


def test_derived_drive_power():
    out = heat_budget(HeatScenario(drive_power_w=None))
    assert out["drive_power_used_w"] == out["input_power_rms_w"]
    assert out["dissipated_microwave_w"] == pytest.approx(36.6e-9, rel=5e-3)


def test_contact_resistance_and_multiplier():
    base = heat_budget(HeatScenario(drive_power_w=None))
    more = heat_budget(HeatScenario(drive_power_w=None, contact_resistance_ohm=50.0, power_multiplier=2.0))
    assert more["drive_power_used_w"] == pytest.approx(4 * base["drive_power_used_w"])


def test_entangled_photon_reference():
    rows = heat_budget(HeatScenario())["entangled_photon_reference"]
    assert [r["heat_w"] for r in rows] == [10e-6, 100e-6]
    assert rows[0]["heat_ratio_vs_memory"] > 50


@pytest.mark.parametrize("bad", [{"duty_cycle": 1.5}, {"line_impedance": 0.0}, {"drive_power_w": -1.0}])
def test_invalid_scenario(bad):
    with pytest.raises(ValueError):
        HeatScenario(**bad)
