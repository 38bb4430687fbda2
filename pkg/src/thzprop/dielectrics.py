"""Complex permittivity of liquid water, ice, dry snow and wet snow.

Convention: ``eps = eps' + 1j * eps''`` with ``eps'' >= 0`` for absorbing
media, and the refractive index ``m = sqrt(eps)`` on the branch with
``Re(m) >= 1, Im(m) >= 0``.  Model constants live in ``data/dielectric.dat``.

The wet-snow model is a modified-Debye fit calibrated below 37 GHz and is
used here well above that range; treat THz results as an extrapolation.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .constants import ICE_DENSITY
from .errors import ConfigurationError, DomainError

__all__ = [
    "ComplexPermittivity",
    "permittivity_water",
    "permittivity_ice",
    "permittivity_dry_snow",
    "permittivity_wet_snow",
]


@dataclass(frozen=True)
class ComplexPermittivity:
    real_part: float
    imag_part: float

    @property
    def value(self) -> complex:
        return complex(self.real_part, self.imag_part)

    def refractive_index(self) -> complex:
        m = cmath.sqrt(self.value)
        if m.real < 0:
            m = -m
        return m


@lru_cache(maxsize=None)
def _params():
    text = resources.files("thzprop.data").joinpath("dielectric.dat").read_text()
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("version="):
            continue
        name, *rest = line.split()
        if len(rest) != 1:
            raise ConfigurationError(f"dielectric.dat:{lineno}: expected 'name value'")
        out[name] = float(rest[0])
    return out


def permittivity_water(f, t) -> ComplexPermittivity:
    """Double-Debye permittivity of liquid water, 0 < f <= 1200 GHz, 253-333 K."""
    if not 0.0 < f <= 1200.0:
        raise DomainError(f"water model valid for 0 < f <= 1200 GHz, got {f}")
    if not 253.0 <= t <= 333.0:
        raise DomainError(f"water model valid for 253-333 K, got {t}")
    p = _params()
    th = 300.0 / t - 1.0
    eps_s = p["ws0"] + p["ws1"] * th
    f_p = p["fp0"] + p["fp1"] * th + p["fp2"] * th**2
    f_s = p["fs0"] + p["fs1"] * th
    eps_1, eps_inf = p["eps_1"], p["eps_inf"]
    eps = eps_inf + (eps_s - eps_1) / (1 - 1j * f / f_p) + (eps_1 - eps_inf) / (1 - 1j * f / f_s)
    return ComplexPermittivity(eps.real, eps.imag)


def permittivity_ice(f, t) -> ComplexPermittivity:
    """Pure ice: near-constant real part, Debye-tail plus infrared-wing loss."""
    if not f > 0:
        raise DomainError(f"frequency must be > 0 GHz, got {f}")
    if not 230.0 <= t <= 273.15:
        raise DomainError(f"ice model valid for 230-273.15 K, got {t}")
    p = _params()
    th = 300.0 / t - 1.0
    real = p["ir0"] + p["ir1"] * (t - 273.15)
    a = (p["ia0"] + p["ia1"] * th) * math.exp(-p["ia2"] * th)
    e = math.exp(p["ib1"] / t)
    b = (
        p["ib0"] / t * e / (e - 1.0) ** 2
        + p["ib2"] * f**2
        + math.exp(p["ib3"] + p["ib4"] * (t - 273.16))
    )
    return ComplexPermittivity(real, a / f + b * f)


def permittivity_dry_snow(density, f=None, t=273.15) -> ComplexPermittivity:
    """Ice/air mixture of the given density (g/cm^3).

    Without ``f`` only the real part is returned (zero loss).  With ``f`` the
    ice loss at (f, t) is scaled by the ice volume fraction.
    """
    if not 0.0 <= density <= ICE_DENSITY:
        raise DomainError(f"snow density must be in [0, {ICE_DENSITY}] g/cm^3, got {density}")
    p = _params()
    real = 1.0 + p["ds1"] * density + p["ds2"] * density**2
    if f is None:
        return ComplexPermittivity(real, 0.0)
    loss = permittivity_ice(f, min(t, 273.15)).imag_part * density / ICE_DENSITY
    return ComplexPermittivity(real, loss)


def permittivity_wet_snow(f, t, density, wetness) -> ComplexPermittivity:
    """Modified-Debye wet snow; ``wetness`` is the liquid volume fraction."""
    if f < 15.0:
        raise DomainError(f"wet-snow model valid above 15 GHz, got {f}")
    if not 0.0 <= wetness < 1.0:
        raise DomainError(f"wetness must be in [0, 1), got {wetness}")
    dry = permittivity_dry_snow(density, f, t)
    if wetness == 0.0:
        return dry
    p = _params()
    mv = 100.0 * wetness
    r = f / p["f0"]
    relax = p["wb"] * mv ** p["wx"] / (1.0 + r * r)
    real = dry.real_part + p["wa"] * mv ** p["wae"] + relax
    imag = dry.imag_part + relax * r
    return ComplexPermittivity(real, imag)
