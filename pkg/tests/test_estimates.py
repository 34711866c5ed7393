import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dicke_stirap.errors import DomainError
from dicke_stirap.estimates import (
    TWO_PI,
    PhysicalParams,
    estimate_report,
    heating_events,
    min_pulse_time,
    sideband_warning,
    transfer_efficiency,
)

GAMMA = TWO_PI * 22e6
TRAP = TWO_PI * 4e6


def test_transfer_efficiency_limits():
    assert transfer_efficiency(1e3, 1e3, 1.0) == 1.0
    assert transfer_efficiency(2.0, 3.0, 0.0) == 1.0
    x = math.sqrt(2 / math.pi) * math.log(100)
    assert transfer_efficiency(1.0, x, 1.0) == pytest.approx(0.99, abs=1e-14)
    with pytest.raises(DomainError):
        transfer_efficiency(-1.0, 1.0, 1.0)


def test_min_pulse_time_reference_value():
    T = min_pulse_time(GAMMA, TRAP / 10, 0.01)
    assert T == pytest.approx(80e-6, rel=0.05)
    assert min_pulse_time(3.0, 2.0, 1 / math.e) == pytest.approx(math.sqrt(2 / math.pi) * 3.0 / 4.0)
    assert min_pulse_time(3.0, 4.0, 0.01) == pytest.approx(min_pulse_time(3.0, 2.0, 0.01) / 4)
    for bad in (1.0, 0.0, 2.0):
        with pytest.raises(DomainError):
            min_pulse_time(3.0, 2.0, bad)


def test_heating_events():
    events, fid = heating_events(10, 5.0, 6 * 80e-6)
    assert abs(events - 2.4e-2) <= 1e-12
    assert fid == pytest.approx(0.976)
    assert heating_events(0, 5.0, 1.0) == (0.0, 1.0)
    assert heating_events(3, 5.0, 0.0) == (0.0, 1.0)
    assert heating_events(1, 5.0, 480e-6)[0] == pytest.approx(2.4e-3, abs=1e-15)
    assert heating_events(1e6, 5.0, 1.0)[1] == 0.0


@given(st.floats(1e5, 1e9), st.floats(1e4, 1e7), st.floats(1e-6, 0.5))
def test_round_trip(gamma, omega0, x):
    T = min_pulse_time(gamma, omega0, x)
    assert transfer_efficiency(omega0, T, gamma) == pytest.approx(1 - x, abs=1e-12)


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10))
def test_monotonicity(omega0, T, gamma):
    base = transfer_efficiency(omega0, T, gamma)
    assert transfer_efficiency(omega0, 1.1 * T, gamma) >= base
    assert transfer_efficiency(1.1 * omega0, T, gamma) >= base
    assert transfer_efficiency(omega0, T, 1.1 * gamma) <= base


def test_sideband_warning():
    assert sideband_warning(TRAP / 10, TRAP) is None
    assert "trap frequency" in sideband_warning(TRAP / 5, TRAP)
    params = PhysicalParams(GAMMA, TRAP / 5, TRAP, 5.0, 10)
    assert params.exceeds_sideband_limit
    with pytest.raises(DomainError):
        PhysicalParams(0.0, 1.0, 1.0, 0.0, 1)


def test_report():
    rep = estimate_report(PhysicalParams(GAMMA, TRAP / 10, TRAP, 5.0, 10), 0.01)
    assert rep["min_pulse_time_s"] == pytest.approx(80e-6, rel=0.05)
    assert rep["total_time_s"] == pytest.approx(6 * rep["min_pulse_time_s"])
    assert rep["heating_events"] == pytest.approx(0.024, rel=0.01)
    assert rep["transfer_efficiency_bound"] == pytest.approx(0.99, abs=1e-12)
    assert rep["warning"] is None
