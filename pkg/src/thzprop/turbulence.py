"""Optical-style turbulence for THz links.

Structure functions, C_n^2 helpers, scintillation variances and losses, and
four irradiance fading laws (log-normal, gamma-gamma, K, negative
exponential) with seeded samplers.  Irradiance is normalised to unit mean
unless a distribution says otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special

from .atmosphere import Environment, refractive_index_temperature_derivative
from .constants import wavenumber
from .errors import DomainError

__all__ = [
    "TurbulenceState",
    "LogNormal",
    "GammaGamma",
    "KDist",
    "NegExp",
    "FadingDistribution",
    "ScintillationLoss",
    "temperature_structure",
    "velocity_structure",
    "cn2_from_ct2",
    "refractivity_temperature_gradient",
    "cn2_profile",
    "rytov_variance",
    "log_amplitude_variance",
    "scintillation_attenuation_rytov",
    "scintillation_attenuation_andrews",
    "classify_turbulence",
    "gamma_gamma_parameters",
    "fading_pdf",
    "k_distribution_series",
    "sample_fading",
]


@dataclass(frozen=True)
class TurbulenceState:
    cn2: float  # m^-2/3
    inner_scale: float = 1e-3  # m
    outer_scale: float = 10.0  # m

    def __post_init__(self):
        if not self.cn2 > 0:
            raise DomainError(f"cn2 must be > 0, got {self.cn2}")
        if not 0 < self.inner_scale < self.outer_scale:
            raise DomainError("scales must satisfy 0 < inner_scale < outer_scale")

    def classification(self):
        return classify_turbulence(self.cn2)


# ---------------------------------------------------------------------------
# structure functions and C_n^2

def _structure(c2, l0, big_l0, separation):
    if separation < 0:
        raise DomainError(f"separation must be >= 0, got {separation}")
    if not 0 < l0 < big_l0:
        raise DomainError("scales must satisfy 0 < l0 < L0")
    if separation <= l0:
        return c2 * l0 ** (-4.0 / 3.0) * separation**2
    # two-thirds law; held flat past the outer scale where the field decorrelates
    return c2 * min(separation, big_l0) ** (2.0 / 3.0)


def temperature_structure(ct2, l0, big_l0, separation):
    """D_T(L) in K^2: quadratic inside the inner scale, 2/3 law above it."""
    return _structure(ct2, l0, big_l0, separation)


def velocity_structure(cv2, l0, big_l0, separation):
    """Longitudinal wind-velocity structure function, same piecewise law."""
    return _structure(cv2, l0, big_l0, separation)


def cn2_from_ct2(dn_dt, ct2):
    if ct2 < 0:
        raise DomainError(f"ct2 must be >= 0, got {ct2}")
    return dn_dt**2 * ct2


def refractivity_temperature_gradient(env: Environment, vapor_pressure=None):
    """dn/dT (1/K) of the THz refractive index at fixed pressures."""
    return refractive_index_temperature_derivative(env, vapor_pressure)


def cn2_profile(h, wind_v=21.0, a_hat=1.7e-14):
    """Altitude profile 0.005 (v/27)^2 (1e-5 h)^10 e^{-h/1000} + 2.7e-6 e^{-h/1500} + A e^{-h/100}."""
    if h < 0:
        raise DomainError(f"altitude must be >= 0, got {h}")
    return (
        0.005 * (wind_v / 27.0) ** 2 * (1e-5 * h) ** 10 * math.exp(-h / 1000.0)
        + 2.7e-6 * math.exp(-h / 1500.0)
        + a_hat * math.exp(-h / 100.0)
    )


# ---------------------------------------------------------------------------
# scintillation

def _kl(cn2, f, path):
    if cn2 < 0 or path < 0:
        raise DomainError("cn2 and path must be >= 0")
    if not f > 0:
        raise DomainError(f"frequency must be > 0 GHz, got {f}")
    return cn2 * wavenumber(f) ** (7.0 / 6.0) * path ** (11.0 / 6.0)


def rytov_variance(cn2, f, path):
    """sigma_R^2 = 1.23 C_n^2 k^(7/6) L^(11/6); ``f`` in GHz, ``path`` in m."""
    return 1.23 * _kl(cn2, f, path)


def log_amplitude_variance(cn2, f, path):
    """sigma_chi^2 = 23.17 C_n^2 k^(7/6) L^(11/6)."""
    return 23.17 * _kl(cn2, f, path)


@dataclass(frozen=True)
class ScintillationLoss:
    loss_db: float
    weak_regime: bool
    note: str = ""


def scintillation_attenuation_rytov(cn2, f, path) -> ScintillationLoss:
    """Loss 2 sigma_chi in dB; flags paths outside the weak regime (sigma_R^2 >= 1)."""
    loss = 2.0 * math.sqrt(log_amplitude_variance(cn2, f, path))
    s_r2 = rytov_variance(cn2, f, path)
    weak = s_r2 < 1.0
    note = "" if weak else f"Rytov variance {s_r2:.3g} >= 1: weak-fluctuation formula extrapolated"
    return ScintillationLoss(loss, weak, note)


def scintillation_attenuation_andrews(sigma_i2) -> ScintillationLoss:
    """Loss magnitude |10 log10 |1 - sqrt(sigma_I^2)|| in dB.

    The bare expression is negative for sigma_I^2 < 1; the magnitude is
    reported as a positive loss.  sigma_I^2 = 1 is singular and returns +inf.
    """
    if sigma_i2 < 0:
        raise DomainError(f"scintillation index must be >= 0, got {sigma_i2}")
    gap = abs(1.0 - math.sqrt(sigma_i2))
    if gap == 0.0:
        return ScintillationLoss(math.inf, False, "singular at scintillation index 1")
    return ScintillationLoss(abs(10.0 * math.log10(gap)), sigma_i2 < 1.0)


def classify_turbulence(cn2):
    """'weak' below 1e-17, 'strong' above 1e-13, otherwise 'moderate'."""
    if cn2 < 1e-17:
        return "weak"
    if cn2 > 1e-13:
        return "strong"
    return "moderate"


def gamma_gamma_parameters(sigma_r2, wave="plane"):
    """Large/small-scale effective (alpha, beta) from the Rytov variance.

    Zero-inner-scale expressions; for a spherical wave the Rytov variance is
    first scaled by 0.4 and the large-scale denominator uses 0.56.
    """
    if not sigma_r2 > 0:
        raise DomainError(f"Rytov variance must be > 0, got {sigma_r2}")
    if wave == "plane":
        s2, c_a = sigma_r2, 1.11
    elif wave == "spherical":
        s2, c_a = 0.4 * sigma_r2, 0.56
    else:
        raise ValueError(f"wave must be 'plane' or 'spherical', got {wave!r}")
    s125 = s2 ** (6.0 / 5.0)
    alpha = 1.0 / math.expm1(0.49 * s2 / (1.0 + c_a * s125) ** (7.0 / 6.0))
    beta = 1.0 / math.expm1(0.51 * s2 / (1.0 + 0.69 * s125) ** (5.0 / 6.0))
    return alpha, beta


# ---------------------------------------------------------------------------
# fading laws

def _pos(name, v):
    if not v > 0:
        raise DomainError(f"{name} must be > 0, got {v}")


@dataclass(frozen=True)
class LogNormal:
    sigma_l2: float
    mean_log: float = None  # default -sigma^2/2 gives unit mean
    i0: float = 1.0

    def __post_init__(self):
        _pos("sigma_l2", self.sigma_l2)
        _pos("i0", self.i0)
        if self.mean_log is None:
            object.__setattr__(self, "mean_log", -0.5 * self.sigma_l2)

    def pdf(self, i):
        z = np.log(i / self.i0) - self.mean_log
        return np.exp(-z * z / (2 * self.sigma_l2)) / (np.sqrt(2 * np.pi * self.sigma_l2) * i)

    def sample(self, rng, n):
        return self.i0 * np.exp(self.mean_log + math.sqrt(self.sigma_l2) * rng.standard_normal(n))

    @property
    def mean(self):
        return self.i0 * math.exp(self.mean_log + 0.5 * self.sigma_l2)

    @property
    def scintillation_index(self):
        return math.expm1(self.sigma_l2)


@dataclass(frozen=True)
class GammaGamma:
    alpha: float
    beta: float

    def __post_init__(self):
        _pos("alpha", self.alpha)
        _pos("beta", self.beta)

    def pdf(self, i):
        a, b = self.alpha, self.beta
        z = 2.0 * np.sqrt(a * b * i)
        # log space: (a b)^((a+b)/2) and K_nu overflow separately for large a, b
        log_p = (
            math.log(2.0)
            + 0.5 * (a + b) * math.log(a * b)
            - special.gammaln(a)
            - special.gammaln(b)
            + (0.5 * (a + b) - 1.0) * np.log(i)
            + np.log(special.kve(a - b, z))
            - z
        )
        return np.exp(log_p)

    def sample(self, rng, n):
        return rng.gamma(self.alpha, 1.0 / self.alpha, n) * rng.gamma(self.beta, 1.0 / self.beta, n)

    mean = 1.0

    @property
    def scintillation_index(self):
        a, b = self.alpha, self.beta
        return 1.0 / a + 1.0 / b + 1.0 / (a * b)


@dataclass(frozen=True)
class KDist:
    """K distribution: gamma-gamma with a unit small-scale parameter."""

    alpha: float

    def __post_init__(self):
        _pos("alpha", self.alpha)

    def pdf(self, i):
        return GammaGamma(self.alpha, 1.0).pdf(i)

    def sample(self, rng, n):
        return rng.gamma(self.alpha, 1.0 / self.alpha, n) * rng.exponential(1.0, n)

    mean = 1.0

    @property
    def scintillation_index(self):
        return 1.0 + 2.0 / self.alpha


@dataclass(frozen=True)
class NegExp:
    def pdf(self, i):
        return np.exp(-i)

    def sample(self, rng, n):
        return -np.log1p(-rng.random(n))

    mean = 1.0
    scintillation_index = 1.0


FadingDistribution = Union[LogNormal, GammaGamma, KDist, NegExp]


def fading_pdf(dist, i):
    i_arr = np.asarray(i, dtype=float)
    if np.any(i_arr <= 0):
        raise DomainError("normalised intensity must be > 0")
    out = dist.pdf(i_arr)
    return float(out) if np.ndim(out) == 0 else out


def _series_coeff(a, b, p):
    # a_p(a, b) = pi (ab)^(p+b) / (sin(pi(a-b)) Gamma(a) Gamma(b) Gamma(p-a+b+1) p!)
    # 1/Gamma via rgamma so poles give zero rather than inf
    return (
        math.pi
        * (a * b) ** (p + b)
        / (math.sin(math.pi * (a - b)) * math.gamma(a) * math.gamma(b) * math.factorial(p))
        * special.rgamma(p - a + b + 1)
    )


def k_distribution_series(alpha, i, terms=60):
    """K-distribution density from its power series.

    f(I) = sum_p a_p(alpha, 1) I^p + a_p(1, alpha) I^(p + alpha - 1).
    Requires non-integer alpha (the coefficients have a sin(pi(alpha-1))
    pole); accurate while 2 sqrt(alpha I) stays below ~10.
    """
    _pos("alpha", alpha)
    if abs(alpha - round(alpha)) < 1e-9:
        raise DomainError("series form needs non-integer alpha; use fading_pdf")
    i = np.asarray(i, dtype=float)
    if np.any(i <= 0):
        raise DomainError("normalised intensity must be > 0")
    total = np.zeros_like(i)
    for p in range(terms):
        total = total + _series_coeff(alpha, 1.0, p) * i**p + _series_coeff(1.0, alpha, p) * i ** (p + alpha - 1.0)
    return float(total) if total.ndim == 0 else total


def sample_fading(dist, seed, n):
    """``n`` irradiance samples from a PCG64 stream seeded with ``seed``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    return dist.sample(rng, int(n))
