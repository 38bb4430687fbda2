"""Clear-air state, water-vapour bookkeeping and gaseous absorption.

Gas absorption is a sum of Van Vleck-Weisskopf lines read from a plain-text
catalog plus a quadratic-in-frequency water-vapour continuum.  Units are GHz,
hPa, kelvin and dB/km throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "Environment",
    "GasLine",
    "GasLineCatalog",
    "load_catalog",
    "default_catalog",
    "saturation_vapor_pressure",
    "water_vapor_pressure",
    "water_vapor_density",
    "vapor_pressure_from_density",
    "refractive_index_thz",
    "vvw_shape",
    "specific_gas_attenuation",
    "attenuation_spectrum",
]


@dataclass(frozen=True)
class Environment:
    temperature: float  # K
    pressure: float  # hPa, total
    relative_humidity: float  # fraction

    def __post_init__(self):
        if not self.temperature > 0:
            raise DomainError(f"temperature must be > 0 K, got {self.temperature}")
        if not self.pressure > 0:
            raise DomainError(f"pressure must be > 0 hPa, got {self.pressure}")
        if not 0.0 <= self.relative_humidity <= 1.0:
            raise DomainError(
                f"relative_humidity must be in [0, 1], got {self.relative_humidity}"
            )

    @classmethod
    def from_celsius(cls, t_c, pressure, relative_humidity):
        return cls(t_c + 273.15, pressure, relative_humidity)


# ---------------------------------------------------------------------------
# water vapour

def _read_keyvals(name):
    text = resources.files("thzprop.data").joinpath(name).read_text()
    out = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


@lru_cache(maxsize=None)
def _buck_constants():
    kv = _read_keyvals("buck.dat")
    return float(kv["a"]), float(kv["b"]), float(kv["c"])


def saturation_vapor_pressure(t):
    """Saturation vapour pressure over water in hPa (Buck equation).

    Valid for 200 K <= t <= 350 K.
    """
    if not 200.0 <= t <= 350.0:
        raise DomainError(f"temperature {t} K outside [200, 350] K")
    a, b, c = _buck_constants()
    t_c = t - 273.15
    return a * math.exp(b * t_c / (c + t_c))


def water_vapor_pressure(env: Environment) -> float:
    """Partial pressure of water vapour in hPa, RH * e_s(T)."""
    if env.relative_humidity == 0.0:
        return 0.0
    return env.relative_humidity * saturation_vapor_pressure(env.temperature)


def water_vapor_density(env: Environment) -> float:
    """Water vapour density in g/m^3 (rho = 216.7 P_v / T)."""
    return 216.7 * water_vapor_pressure(env) / env.temperature


def vapor_pressure_from_density(rho, t):
    """Inverse of the density relation: P_v = rho T / 216.7 (hPa)."""
    return rho * t / 216.7


def refractive_index_thz(env: Environment, vapor_pressure=None, pressure=None) -> float:
    """THz refractive index of moist air.

    n = 1 + 77.6/T * (P_a + 4810 P_v / T) * 1e-6, pressures in hPa.
    ``vapor_pressure`` and ``pressure`` override the values derived from
    ``env`` (used when differentiating with respect to T at fixed P_v).
    """
    t = env.temperature
    p_a = env.pressure if pressure is None else pressure
    p_v = water_vapor_pressure(env) if vapor_pressure is None else vapor_pressure
    return 1.0 + 77.6 / t * (p_a + 4810.0 * p_v / t) * 1e-6


def refractive_index_temperature_derivative(env: Environment, vapor_pressure=None):
    """dn/dT at fixed P_a and P_v, in 1/K (analytic derivative of n_THz)."""
    t = env.temperature
    p_a = env.pressure
    p_v = water_vapor_pressure(env) if vapor_pressure is None else vapor_pressure
    return -77.6e-6 * (p_a / t**2 + 2.0 * 4810.0 * p_v / t**3)


# ---------------------------------------------------------------------------
# line catalog

@dataclass(frozen=True)
class GasLine:
    center: float  # GHz
    intensity: float  # dB/km per hPa of vapour, GHz-scaled
    half_width: float  # GHz at the reference pressure/temperature
    p_exp: float
    t_exp: float


@dataclass(frozen=True)
class GasLineCatalog:
    lines: tuple
    c0: float = 0.0
    c1: float = 0.0
    version: str = "unversioned"
    t_ref: float = 300.0
    p_ref: float = 1013.25
    width_t_exp: float = 0.7
    _arrays: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        centers = [ln.center for ln in self.lines]
        if any(c <= 0 for c in centers):
            raise ConfigurationError("line centers must be positive")
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise ConfigurationError("line centers must be sorted strictly ascending")
        if any(ln.half_width <= 0 for ln in self.lines):
            raise ConfigurationError("line half-widths must be positive")
        arr = np.array(
            [[ln.center, ln.intensity, ln.half_width, ln.p_exp, ln.t_exp] for ln in self.lines],
            dtype=float,
        ).reshape(-1, 5)
        object.__setattr__(self, "_arrays", tuple(arr.T.copy()))

    def __len__(self):
        return len(self.lines)


def parse_catalog(text, source="<string>"):
    """Parse the plain-text catalog format.

    Header ``version=<string>`` (optionally followed by ``t_ref=``, ``p_ref=``,
    ``width_t_exp=`` pairs), an optional ``continuum c0 c1`` row, then one
    ``center_GHz intensity halfwidth_GHz p_exp t_exp`` row per line.
    """
    header = None
    c0 = c1 = 0.0
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            if not line.startswith("version="):
                raise ConfigurationError(f"{source}:{lineno}: expected 'version=' header")
            header = {}
            for tok in line.split():
                key, sep, value = tok.partition("=")
                if not sep:
                    raise ConfigurationError(f"{source}:{lineno}: bad header token {tok!r}")
                header[key] = value
            continue
        parts = line.split()
        try:
            if parts[0] == "continuum":
                if len(parts) != 3:
                    raise ConfigurationError(f"{source}:{lineno}: continuum needs c0 c1")
                c0, c1 = float(parts[1]), float(parts[2])
                continue
            if len(parts) != 5:
                raise ConfigurationError(f"{source}:{lineno}: expected 5 columns, got {len(parts)}")
            lines.append(GasLine(*map(float, parts)))
        except ValueError as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(f"{source}:{lineno}: {exc}") from None
    if header is None:
        raise ConfigurationError(f"{source}: empty catalog")
    return GasLineCatalog(
        lines=tuple(lines),
        c0=c0,
        c1=c1,
        version=header["version"],
        t_ref=float(header.get("t_ref", 300.0)),
        p_ref=float(header.get("p_ref", 1013.25)),
        width_t_exp=float(header.get("width_t_exp", 0.7)),
    )


def load_catalog(path) -> GasLineCatalog:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read catalog {path}: {exc}") from None
    return parse_catalog(text, source=str(path))


@lru_cache(maxsize=None)
def default_catalog() -> GasLineCatalog:
    text = resources.files("thzprop.data").joinpath("h2o_lines.cat").read_text()
    return parse_catalog(text, source="h2o_lines.cat")


# ---------------------------------------------------------------------------
# absorption

def vvw_shape(f, center, width):
    """Van Vleck-Weisskopf shape (f/f_i)^2 [w/((f_i-f)^2+w^2) + w/((f_i+f)^2+w^2)]."""
    f = np.asarray(f, dtype=float)
    return (f / center) ** 2 * (
        width / ((center - f) ** 2 + width**2) + width / ((center + f) ** 2 + width**2)
    )


def _gas_attenuation(env, f, catalog):
    if len(catalog) == 0 and catalog.c0 == 0.0 and catalog.c1 == 0.0:
        raise ConfigurationError("gas line catalog is empty")
    f = np.asarray(f, dtype=float)
    p_v = water_vapor_pressure(env)
    if p_v == 0.0:
        return np.zeros_like(f)
    theta = catalog.t_ref / env.temperature
    centers, intensity, width, p_exp, t_exp = catalog._arrays
    widths = width * (env.pressure / catalog.p_ref) ** p_exp * theta**catalog.width_t_exp
    strength = intensity * p_v * theta**t_exp
    ff = f[..., None]
    lines = np.sum(strength * vvw_shape(ff, centers, widths), axis=-1)
    continuum = (catalog.c0 * p_v * env.pressure + catalog.c1 * p_v**2) * f**2
    return np.maximum(lines + continuum, 0.0)


def specific_gas_attenuation(env: Environment, f, catalog: GasLineCatalog = None) -> float:
    """Specific gaseous attenuation in dB/km at frequency ``f`` (GHz)."""
    if not f > 0:
        raise DomainError(f"frequency must be > 0 GHz, got {f}")
    catalog = default_catalog() if catalog is None else catalog
    return float(_gas_attenuation(env, float(f), catalog))


def attenuation_spectrum(env: Environment, f_grid, catalog: GasLineCatalog = None) -> np.ndarray:
    f_grid = np.asarray(f_grid, dtype=float)
    if f_grid.ndim != 1 or f_grid.size == 0:
        raise ValueError("f_grid must be a non-empty 1-D sequence")
    if np.any(f_grid <= 0):
        raise DomainError("frequencies must be > 0 GHz")
    if np.any(np.diff(f_grid) < 0):
        raise ValueError("f_grid must be sorted ascending")
    catalog = default_catalog() if catalog is None else catalog
    return _gas_attenuation(env, f_grid, catalog)
