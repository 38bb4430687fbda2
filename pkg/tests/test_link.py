import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from thzprop.errors import DomainError
from thzprop.link import (
    DetectorModel,
    LinkGeometry,
    ber_ask,
    ber_mqam,
    blocked_fraction,
    duty_averaged_attenuation_db,
    duty_averaged_ber,
    error_free_snr,
    free_space_path_loss_db,
    friis_received_power,
    los_gain,
    los_gain_factors,
    photon_rate,
    q_function,
    snr_from_power,
)

C = 299_792_458.0
H = 6.62607015e-34


def test_free_space_path_loss():
    lam = C / 300e9
    assert free_space_path_loss_db(300, 1000) == pytest.approx(20 * math.log10(4 * math.pi * 1000 / lam), rel=1e-14)
    assert free_space_path_loss_db(300, 1000) == pytest.approx(141.98, abs=0.02)
    geo = LinkGeometry(1000)
    assert friis_received_power(0.0, geo, 300) == pytest.approx(-free_space_path_loss_db(300, 1000), rel=1e-14)


def test_friis_excess_attenuation_and_cross_pol():
    geo = LinkGeometry(2000)
    assert friis_received_power(0, geo, 140, 0) - friis_received_power(0, geo, 140, 3) == pytest.approx(6.0, rel=1e-12)
    assert friis_received_power(0, LinkGeometry(2000, polarization_efficiency=0.0), 140) == -math.inf


geometries = st.builds(
    LinkGeometry,
    distance=st.floats(1, 1e4),
    tx_gain_db=st.floats(-10, 50),
    rx_gain_db=st.floats(-10, 50),
    tx_pattern=st.floats(0.01, 1),
    rx_pattern=st.floats(0.01, 1),
    polarization_efficiency=st.floats(0.01, 1),
)


@given(geometries, st.floats(-30, 40), st.floats(10, 1000), st.floats(0, 100), st.floats(-20, 20))
def test_friis_is_additive(geo, p_in, f, alpha, delta):
    base = friis_received_power(p_in, geo, f, alpha)
    assert friis_received_power(p_in + delta, geo, f, alpha) - base == pytest.approx(delta, abs=1e-9)
    shifted = LinkGeometry(geo.distance, geo.tx_gain_db + delta, geo.rx_gain_db, geo.tx_pattern, geo.rx_pattern, geo.polarization_efficiency)
    assert friis_received_power(p_in, shifted, f, alpha) - base == pytest.approx(delta, abs=1e-9)
    extra = friis_received_power(p_in, geo, f, alpha + 1.0)
    assert base - extra == pytest.approx(geo.distance / 1000, abs=1e-9)


def test_divergence_gain():
    _, g_d = los_gain_factors(LinkGeometry(1000, divergence=0.02, rx_area=1e-4), 0.0)
    assert g_d == pytest.approx(4e-4 / (math.pi * 1e6 * 4e-4), rel=1e-14)
    assert g_d == pytest.approx(3.183e-7, rel=1e-3)
    assert 10 * math.log10(g_d) == pytest.approx(-65.0, abs=0.05)


@given(st.floats(1, 5000), st.floats(1e-3, 0.2), st.floats(1e-6, 1e-2), st.floats(0, 200))
def test_los_gain_factorisation(d, div, area, alpha):
    geo = LinkGeometry(d, divergence=div, rx_area=area)
    g_a, g_d = los_gain_factors(geo, alpha)
    g = los_gain(geo, alpha)
    assert g == pytest.approx(g_a * g_d, rel=1e-12)
    assert 10 * math.log10(g_a) == pytest.approx(-alpha * d / 1000, rel=1e-9, abs=1e-12)


def test_los_gain_log_linear_in_attenuation():
    geo = LinkGeometry(1000)
    g0, g1, g2 = (10 * math.log10(los_gain(geo, a)) for a in (0, 5, 10))
    assert g0 - g2 == pytest.approx(2 * (g0 - g1), rel=1e-12)


def test_photon_rate():
    det = DetectorModel(1.0, 1e-10, 140)
    expected = 1e-10 * 1.0 * 1e-9 * 0.1 / (H * 140e9)
    assert photon_rate(det, 1e-9, 0.1) == pytest.approx(expected, rel=1e-14)
    assert photon_rate(det, 0.0, 0.1) == 0.0
    assert photon_rate(det, 1e-9, 0.3) == pytest.approx(3 * photon_rate(det, 1e-9, 0.1), rel=1e-14)
    assert det.slot_rate == pytest.approx(1e10)
    with pytest.raises(DomainError):
        DetectorModel(efficiency=1.2)


def test_q_function_vs_quadrature():
    mp.mp.dps = 30
    for x in (0.0, 0.5, 1.0, 3.0, 6.0, 10.0):
        exact = mp.quad(lambda t: mp.exp(-t * t / 2), [x, mp.inf]) / mp.sqrt(2 * mp.pi)
        assert float(q_function(x)) == pytest.approx(float(exact), rel=1e-12)


def test_ber_anchors():
    q3 = 0.5 * math.erfc(3 / math.sqrt(2))
    assert ber_ask(0) == 0.5
    assert ber_ask(4.5) == pytest.approx(q3, rel=1e-14)
    assert ber_ask(4.5) == pytest.approx(1.35e-3, rel=0.01)
    assert ber_mqam(45, 16) == pytest.approx(q3, rel=1e-14)
    assert ber_mqam(0, 16) == 0.5
    with pytest.raises(ValueError):
        ber_mqam(10, 8)
    with pytest.raises(DomainError):
        ber_ask(-1)


def test_ber_vectorised():
    snr = np.array([0.0, 1.0, 10.0])
    assert ber_ask(snr).shape == (3,)
    assert isinstance(ber_ask(2.0), float)


@given(st.floats(1e-6, 500), st.floats(1e-6, 50))
def test_ber_properties(snr, step):
    for fn in (ber_ask, lambda s: ber_mqam(s, 16), lambda s: ber_mqam(s, 64)):
        b = fn(snr)
        assert 0.0 <= b <= 0.5
        assert fn(snr + step) <= b
    assert ber_mqam(snr, 16) >= ber_ask(snr)


def test_ber_strictly_decreasing_and_continuous():
    # BER has a square-root cusp at snr = 0; step uniformly in sqrt(snr)
    s = np.linspace(0, math.sqrt(30), 3001) ** 2
    for b in (ber_ask(s), ber_mqam(s, 16)):
        assert np.all(np.diff(b) < 0)
        assert np.max(np.abs(np.diff(b))) < 2e-3


def test_error_free_threshold():
    for mod in ("ask", "qam"):
        s = error_free_snr(mod)
        assert math.isfinite(s)
        fn = ber_ask if mod == "ask" else (lambda v: ber_mqam(v, 16))
        assert fn(s * (1 + 1e-9)) < 1e-10 <= fn(s * (1 - 1e-9))
    assert error_free_snr("qam") > error_free_snr("ask")
    with pytest.raises(ValueError):
        error_free_snr("psk")


def test_snr_from_power():
    assert snr_from_power(-50, -60) == pytest.approx(10.0)


def test_duty_averaging():
    assert duty_averaged_ber(0.1, 1e-6, 0.0) == 1e-6
    assert duty_averaged_ber(0.1, 1e-6, 1.0) == 0.1
    f = blocked_fraction(0.032, 0.04)
    assert f == pytest.approx(0.8)
    assert duty_averaged_attenuation_db(2.95, f) == pytest.approx(2.2, abs=0.05)
    assert duty_averaged_attenuation_db(2.95, 0.0) == 0.0
    assert duty_averaged_attenuation_db(2.95, 1.0) == pytest.approx(2.95)
    assert blocked_fraction(1.0, 0.04) == 1.0
    with pytest.raises(DomainError):
        duty_averaged_ber(0.1, 0.0, 1.5)
