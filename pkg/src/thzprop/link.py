"""Link budgets, photon counting and bit-error rates."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .constants import PLANCK, db_per_km_to_nepers_per_m, wavelength_m
from .errors import DomainError

__all__ = [
    "LinkGeometry",
    "DetectorModel",
    "free_space_path_loss_db",
    "friis_received_power",
    "los_gain_factors",
    "los_gain",
    "photon_rate",
    "q_function",
    "ber_ask",
    "ber_mqam",
    "snr_from_power",
    "duty_averaged_ber",
    "duty_averaged_attenuation_db",
    "blocked_fraction",
    "error_free_snr",
]


@dataclass(frozen=True)
class LinkGeometry:
    distance: float  # m
    tx_gain_db: float = 0.0
    rx_gain_db: float = 0.0
    tx_pattern: float = 1.0
    rx_pattern: float = 1.0
    polarization_efficiency: float = 1.0
    divergence: float = 0.02  # full beam divergence angle, rad
    rx_area: float = 1e-4  # m^2

    def __post_init__(self):
        if not self.distance > 0:
            raise DomainError(f"distance must be > 0 m, got {self.distance}")
        if not 0.0 <= self.polarization_efficiency <= 1.0:
            raise DomainError("polarization_efficiency must be in [0, 1]")
        if not self.divergence > 0:
            raise DomainError(f"divergence must be > 0 rad, got {self.divergence}")
        if not self.rx_area > 0:
            raise DomainError(f"rx_area must be > 0 m^2, got {self.rx_area}")
        if self.tx_pattern < 0 or self.rx_pattern < 0:
            raise DomainError("pattern factors must be >= 0")


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 1.0
    integration_time: float = 1e-10  # s, one symbol per slot
    frequency: float = 140.0  # GHz, sets the photon energy
    background_rate: float = 0.0  # counts per slot
    noise_floor_dbm: float = -60.0

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise DomainError("efficiency must be in [0, 1]")
        if not self.integration_time > 0:
            raise DomainError("integration_time must be > 0 s")
        if not self.frequency > 0:
            raise DomainError("frequency must be > 0 GHz")
        if self.background_rate < 0:
            raise DomainError("background_rate must be >= 0")

    @property
    def photon_energy(self):
        return PLANCK * self.frequency * 1e9

    @property
    def slot_rate(self):
        return 1.0 / self.integration_time


def free_space_path_loss_db(f, distance):
    """20 log10(4 pi d / lambda), ``f`` in GHz and ``distance`` in m."""
    return 20.0 * math.log10(4.0 * math.pi * distance / wavelength_m(f))


def friis_received_power(p_in_dbm, geometry: LinkGeometry, f, alpha_e=0.0):
    """Received power in dBm; ``alpha_e`` is the excess specific attenuation, dB/km."""
    if not f > 0:
        raise DomainError(f"frequency must be > 0 GHz, got {f}")
    factor = geometry.tx_pattern * geometry.rx_pattern * geometry.polarization_efficiency
    if factor == 0.0:
        return -math.inf
    return (
        p_in_dbm
        + geometry.tx_gain_db
        + geometry.rx_gain_db
        - free_space_path_loss_db(f, geometry.distance)
        + 10.0 * math.log10(factor)
        - alpha_e * geometry.distance / 1000.0
    )


def los_gain_factors(geometry: LinkGeometry, alpha_atm):
    """(G_A, G_D): atmospheric transmittance exp(-k d) and the divergence
    factor 4A/(pi d^2 alpha_A^2).  ``alpha_atm`` is in dB/km."""
    k = db_per_km_to_nepers_per_m(alpha_atm)
    d = geometry.distance
    g_a = math.exp(-k * d)
    g_d = 4.0 * geometry.rx_area / (math.pi * d * d * geometry.divergence**2)
    return g_a, g_d


def los_gain(geometry: LinkGeometry, alpha_atm):
    g_a, g_d = los_gain_factors(geometry, alpha_atm)
    return g_a * g_d


def photon_rate(detector: DetectorModel, gain, p_tx):
    """Mean detected photoelectrons per slot, tau eta G P / (h f); ``p_tx`` in W."""
    if gain < 0 or p_tx < 0:
        raise DomainError("gain and power must be >= 0")
    return detector.integration_time * detector.efficiency * gain * p_tx / detector.photon_energy


def q_function(x):
    """Gaussian tail probability Q(x) = erfc(x / sqrt 2) / 2."""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def _snr(snr):
    s = np.asarray(snr, dtype=float)
    if np.any(s < 0):
        raise DomainError("snr must be >= 0")
    return s


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def ber_ask(snr):
    """Q(sqrt(2 snr)), linear SNR."""
    return _out(q_function(np.sqrt(2.0 * _snr(snr))))


def ber_mqam(snr, m_order=16):
    """4/sqrt(M) Q(sqrt(3 snr/(M-1))) for square M-QAM."""
    r = math.isqrt(int(m_order)) if m_order >= 4 else 0
    if m_order != int(m_order) or r * r != m_order or m_order < 4 or r % 2:
        raise ValueError(f"m_order must be a square QAM order (4, 16, 64, ...), got {m_order}")
    s = _snr(snr)
    return _out(4.0 / math.sqrt(m_order) * q_function(np.sqrt(3.0 * s / (m_order - 1))))


def snr_from_power(p_rx_dbm, noise_floor_dbm):
    """Linear SNR from received power and receiver noise floor, both in dBm."""
    return 10.0 ** ((np.asarray(p_rx_dbm, dtype=float) - noise_floor_dbm) / 10.0)


def _fraction(f):
    if not 0.0 <= f <= 1.0:
        raise DomainError(f"blocked_fraction must be in [0, 1], got {f}")


def duty_averaged_ber(ber_blocked, ber_clear, blocked_fraction):
    _fraction(blocked_fraction)
    return blocked_fraction * ber_blocked + (1.0 - blocked_fraction) * ber_clear


def duty_averaged_attenuation_db(blocked_loss_db, blocked_fraction):
    """Average power loss of a beam blocked for a fraction of the detector window."""
    _fraction(blocked_fraction)
    mean_power = blocked_fraction * 10.0 ** (-blocked_loss_db / 10.0) + (1.0 - blocked_fraction)
    return -10.0 * math.log10(mean_power)


def blocked_fraction(transit_time, window):
    """Share of a detector integration window during which the beam is blocked."""
    if transit_time < 0 or not window > 0:
        raise DomainError("transit_time must be >= 0 and window > 0")
    return min(1.0, transit_time / window)


def error_free_snr(modulation="ask", threshold=1e-10, m_order=16):
    """Smallest linear SNR with BER below ``threshold``."""
    if modulation == "ask":
        fn = ber_ask
    elif modulation == "qam":
        def fn(s):
            return ber_mqam(s, m_order)
    else:
        raise ValueError(f"modulation must be 'ask' or 'qam', got {modulation!r}")
    hi = 1.0
    while fn(hi) >= threshold:
        hi *= 2.0
        if hi > 1e12:
            raise DomainError("threshold not reachable")
    return optimize.brentq(lambda s: math.log(fn(s)) - math.log(threshold), 0.0 if hi == 1.0 else hi / 2, hi, xtol=1e-14, rtol=1e-14)
