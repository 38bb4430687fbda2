"""Scenario files: YAML documents validated against a versioned JSON schema.

A scenario fixes the environment, link, detector, one weather block and the
sweeps a command runs over.  Everything downstream is built from it, so a
scenario plus a seed pins every output.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import yaml

from .atmosphere import Environment, default_catalog, load_catalog, specific_gas_attenuation
from .dielectrics import permittivity_dry_snow, permittivity_water, permittivity_wet_snow
from .errors import ConfigurationError, DomainError
from .hydrometeors import (
    DRY_SNOW_DENSITY,
    GAMMA_PRESETS,
    WET_SNOW_DENSITY,
    gamma_preset,
    itu_table_version,
    marshall_palmer,
    rain_attenuation_itu,
    snow_attenuation_gunn_east,
    snow_attenuation_power_law,
    snow_distribution,
    specific_attenuation_mie,
    typhoon_preset,
)
from .link import DetectorModel, LinkGeometry
from .secrecy import EveGeometry, MapGrid, ScatterMedium, SecrecyScenario, optimal_pointing
from .turbulence import rytov_variance, scintillation_attenuation_rytov

SCHEMA_VERSION = 1

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_frac = {"type": "number", "minimum": 0, "maximum": 1}
_range = {
    "type": "object",
    "required": ["start", "stop", "n"],
    "properties": {"start": _num, "stop": _num, "n": {"type": "integer", "minimum": 2}},
    "additionalProperties": False,
}
_freqs = {"oneOf": [_pos, {"type": "array", "items": _pos, "minItems": 1}, _range]}
_values = {"oneOf": [{"type": "array", "items": _num, "minItems": 1}, _range]}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "frequency_ghz", "weather"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "frequency_ghz": _freqs,
        "environment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "temperature_c": {"type": "number", "exclusiveMinimum": -273.15},
                "pressure_hpa": _pos,
                "relative_humidity": _frac,
            },
        },
        "gas": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"enabled": {"type": "boolean"}, "catalog": {"type": "string"}},
        },
        "weather": {
            "type": "object",
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
            "properties": {
                "clear": {"type": "object", "additionalProperties": False},
                "rain": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["rate"],
                    "properties": {
                        "model": {"enum": ["mie", "itu"]},
                        "dsd": {"enum": ["marshall_palmer", "typhoon", *sorted(GAMMA_PRESETS)]},
                        "rate": _nonneg,
                    },
                },
                "snow": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["rate"],
                    "properties": {
                        "model": {"enum": ["mie", "gunn_east", "power_law"]},
                        "variant": {"type": "string"},
                        "wetness": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                        "density": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.917},
                        "rate": _nonneg,
                        "a": _nonneg,
                        "b": _num,
                    },
                },
                "turbulence": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["cn2"],
                    "properties": {
                        "cn2": _pos,
                    },
                },
            },
        },
        "link": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "distance_m": _pos,
                "tx_gain_db": _num,
                "rx_gain_db": _num,
                "tx_pattern": _nonneg,
                "rx_pattern": _nonneg,
                "polarization_efficiency": _frac,
                "divergence_rad": _pos,
                "rx_area_m2": _pos,
                "tx_power_w": _nonneg,
                "tx_power_dbm": _num,
            },
        },
        "detector": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "efficiency": _frac,
                "integration_time_s": _pos,
                "background_rate": _nonneg,
                "noise_floor_dbm": _num,
            },
        },
        "secrecy": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "eve_fov_deg": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 180},
                "eve_area_m2": _pos,
                "eve_position": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                "phase_g": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1},
                "phase_f": _nonneg,
                "q": _frac,
                "mi_mode": {"enum": ["corrected", "as-printed", "as_printed"]},
                "nlos_mode": {"enum": ["as-printed", "as_printed", "physical"]},
                "grid": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["x_min", "x_max", "nx", "y_min", "y_max", "ny"],
                    "properties": {
                        "x_min": _num,
                        "x_max": _num,
                        "nx": {"type": "integer", "minimum": 1},
                        "y_min": _num,
                        "y_max": _num,
                        "ny": {"type": "integer", "minimum": 1},
                    },
                },
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "frequency": _range,
                "relative_humidity": {"type": "array", "items": _frac, "minItems": 1},
                "rate": _values,
                "ber_axis": {"enum": ["distance", "rate", "snr"]},
                "ber_values": _values,
                "target_rate_gbps": _values,
                "sigma_r2": _pos,
            },
        },
        "blocking": {
            "type": "object",
            "additionalProperties": False,
            "required": ["extra_loss_db"],
            "properties": {
                "extra_loss_db": _nonneg,
                "transit_time_s": _nonneg,
                "window_s": _pos,
                "fraction": _frac,
            },
        },
        "modulation": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"qam_order": {"type": "integer", "minimum": 4}},
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"format": {"enum": ["csv", "json"]}},
        },
    },
}

DEFAULTS = {
    "environment": {"temperature_c": 25.0, "pressure_hpa": 1013.0, "relative_humidity": 0.97},
    "gas": {"enabled": True},
    "link": {
        "distance_m": 1000.0,
        "tx_gain_db": 0.0,
        "rx_gain_db": 0.0,
        "tx_pattern": 1.0,
        "rx_pattern": 1.0,
        "polarization_efficiency": 1.0,
        "divergence_rad": 0.02,
        "rx_area_m2": 1e-4,
        "tx_power_w": 1e-3,
    },
    "detector": {
        "efficiency": 1.0,
        "integration_time_s": 1e-10,
        "background_rate": 1.0,
        "noise_floor_dbm": -60.0,
    },
    "secrecy": {
        "eve_fov_deg": 20.0,
        "eve_area_m2": 1e-4,
        "eve_position": [200.0, 10.0],
        "phase_g": 0.9,
        "phase_f": 0.5,
        "q": 0.5,
        "mi_mode": "corrected",
        "nlos_mode": "as-printed",
    },
    "modulation": {"qam_order": 16},
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _node_line(root, path):
    """1-based line of the YAML node at ``path``, or None."""
    node = root
    line = getattr(node, "start_mark", None)
    for key in path:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == key:
                    nxt = v
                    line = k.start_mark
                    break
            if nxt is None:
                break
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
            line = node.start_mark
        else:
            break
    return None if line is None else line.line + 1


def _mode(v):
    return v.replace("-", "_")


def _values_of(spec):
    if isinstance(spec, dict):
        n = spec["n"]
        return [spec["start"] + (spec["stop"] - spec["start"]) * i / (n - 1) for i in range(n)]
    return list(spec)


@dataclass
class Scenario:
    data: dict
    source: str = "<dict>"

    # --- construction ----------------------------------------------------
    @classmethod
    def from_dict(cls, raw, source="<dict>", _root=None, base=None):
        if not isinstance(raw, dict):
            raise ConfigurationError(f"{source}: scenario must be a mapping")
        validator = jsonschema.Draft202012Validator(SCHEMA)
        errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
        if errors:
            diags = []
            for e in errors:
                path = list(e.absolute_path)
                line = _node_line(_root, path) if _root is not None else None
                diags.append(
                    {"field": "/".join(str(p) for p in path) or "<root>", "line": line, "message": e.message}
                )
            first = diags[0]
            where = f"{source}:{first['line']}" if first["line"] else source
            raise ConfigurationError(
                f"{where}: {first['field']}: {first['message']}", diagnostics=diags
            )
        scn = cls(_merge(DEFAULTS, raw), source)
        if base is not None:
            scn._base = Path(base)
        scn._check()
        return scn

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read scenario {path}: {exc}") from exc
        try:
            root = yaml.compose(text)
            raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            line = None if mark is None else mark.line + 1
            raise ConfigurationError(f"{path}:{line}: invalid YAML: {exc}", line=line) from exc
        return cls.from_dict(raw, str(path), root, base=path.parent)

    def _check(self):
        d = self.data
        sec = d["secrecy"]
        if "grid" in sec:
            try:
                MapGrid(**sec["grid"]).axes()
            except DomainError as exc:
                raise ConfigurationError(f"{self.source}: secrecy/grid: {exc}") from exc
        cat = d["gas"].get("catalog")
        if cat is not None and not self._resolve(cat).is_file():
            raise ConfigurationError(f"{self.source}: gas catalog {cat!r} not found")
        snow = d["weather"].get("snow")
        if snow is not None:
            model = snow.get("model", "mie")
            if model == "power_law" and not {"a", "b"} <= set(snow):
                raise ConfigurationError(f"{self.source}: weather/snow: power_law needs 'a' and 'b'")
            if model == "mie":
                try:
                    snow_distribution(snow.get("variant", "GM"), 1.0)
                except ValueError as exc:
                    raise ConfigurationError(f"{self.source}: weather/snow/variant: {exc}") from exc
        sweep = d.get("sweep", {})
        fr = sweep.get("frequency")
        if isinstance(d["frequency_ghz"], dict) and not 0 < d["frequency_ghz"]["start"] < d["frequency_ghz"]["stop"]:
            raise ConfigurationError(f"{self.source}: frequency_ghz: need 0 < start < stop")
        if fr is not None and not 0 < fr["start"] < fr["stop"]:
            raise ConfigurationError(f"{self.source}: sweep/frequency: start must be < stop")

    def _resolve(self, p):
        p = Path(p)
        base = getattr(self, "_base", None)
        return p if p.is_absolute() or base is None else base / p

    # --- identity ---------------------------------------------------------
    def canonical_json(self):
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    @property
    def hash(self):
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    @property
    def name(self):
        return self.data.get("name", Path(self.source).stem)

    # --- typed views ------------------------------------------------------
    @property
    def frequencies(self):
        f = self.data["frequency_ghz"]
        if isinstance(f, dict):
            return _values_of(f)
        return list(f) if isinstance(f, list) else [f]

    def environment(self, relative_humidity=None):
        e = self.data["environment"]
        rh = e["relative_humidity"] if relative_humidity is None else relative_humidity
        return Environment.from_celsius(e["temperature_c"], e["pressure_hpa"], rh)

    def catalog(self):
        cat = self.data["gas"].get("catalog")
        return default_catalog() if cat is None else load_catalog(self._resolve(cat))

    def catalog_versions(self):
        return {"gas_lines": self.catalog().version, "itu_rain": itu_table_version()}

    def link_geometry(self, distance=None):
        lk = self.data["link"]
        return LinkGeometry(
            distance=lk["distance_m"] if distance is None else distance,
            tx_gain_db=lk["tx_gain_db"],
            rx_gain_db=lk["rx_gain_db"],
            tx_pattern=lk["tx_pattern"],
            rx_pattern=lk["rx_pattern"],
            polarization_efficiency=lk["polarization_efficiency"],
            divergence=lk["divergence_rad"],
            rx_area=lk["rx_area_m2"],
        )

    @property
    def tx_power_w(self):
        lk = self.data["link"]
        if "tx_power_dbm" in lk:
            return 10.0 ** (lk["tx_power_dbm"] / 10.0) * 1e-3
        return lk["tx_power_w"]

    @property
    def tx_power_dbm(self):
        p = self.tx_power_w
        return -math.inf if p == 0 else 10.0 * math.log10(p * 1e3)

    def detector(self, f):
        det = self.data["detector"]
        return DetectorModel(
            efficiency=det["efficiency"],
            integration_time=det["integration_time_s"],
            frequency=f,
            background_rate=det["background_rate"],
            noise_floor_dbm=det["noise_floor_dbm"],
        )

    @property
    def weather_kind(self):
        return next(iter(self.data["weather"]))

    @property
    def weather(self):
        return self.data["weather"][self.weather_kind]

    @property
    def rate(self):
        w = self.weather
        return w.get("rate", w.get("cn2", 0.0))

    def with_rate(self, rate):
        """Copy with the weather intensity (rain/snow rate or C_n^2) replaced."""
        data = copy.deepcopy(self.data)
        w = data["weather"][self.weather_kind]
        if self.weather_kind == "turbulence":
            w["cn2"] = rate
        elif self.weather_kind != "clear":
            w["rate"] = rate
        out = Scenario(data, self.source)
        if hasattr(self, "_base"):
            out._base = self._base
        return out

    def with_changes(self, **sections):
        out = Scenario(_merge(self.data, sections), self.source)
        if hasattr(self, "_base"):
            out._base = self._base
        return out

    # --- physics ------------------------------------------------------------
    def gas_attenuation(self, f):
        if not self.data["gas"]["enabled"]:
            return 0.0
        return specific_gas_attenuation(self.environment(), f, self.catalog())

    def weather_attenuation(self, f, rate=None):
        """(total, absorption, scattering) in dB/km for the weather block, gas excluded."""
        kind = self.weather_kind
        w = self.weather
        env = self.environment()
        rate = self.rate if rate is None else rate
        if kind == "clear" or rate == 0:
            return 0.0, 0.0, 0.0
        if kind == "rain":
            if w.get("model", "mie") == "itu":
                a = rain_attenuation_itu(f, rate)
                return a, a, 0.0
            dsd_name = w.get("dsd", "marshall_palmer")
            if dsd_name == "marshall_palmer":
                dsd = marshall_palmer(rate)
            elif dsd_name == "typhoon":
                dsd = typhoon_preset(rate)
            else:
                dsd = gamma_preset(dsd_name, rate)
            r = specific_attenuation_mie(dsd, permittivity_water(f, env.temperature), f)
            return r.total, r.absorption, r.scattering
        if kind == "snow":
            model = w.get("model", "mie")
            if model == "gunn_east":
                a = snow_attenuation_gunn_east(f, rate)
                return a, a, 0.0
            if model == "power_law":
                a = snow_attenuation_power_law(w["a"], w["b"], rate)
                return a, a, 0.0
            wet = w.get("wetness", 0.0)
            rho = w.get("density", WET_SNOW_DENSITY if wet > 0 else DRY_SNOW_DENSITY)
            t = min(env.temperature, 273.15)
            eps = permittivity_wet_snow(f, t, rho, wet) if wet > 0 else permittivity_dry_snow(rho, f, t)
            dsd = snow_distribution(w.get("variant", "GM"), rate, rho)
            r = specific_attenuation_mie(dsd, eps, f)
            return r.total, r.absorption, r.scattering
        # turbulence: scintillation loss over the link, spread per km
        d = self.data["link"]["distance_m"]
        loss = scintillation_attenuation_rytov(rate, f, d).loss_db
        a = loss / (d / 1000.0)
        return a, a, 0.0

    def total_attenuation(self, f, rate=None):
        return self.gas_attenuation(f) + self.weather_attenuation(f, rate)[0]

    def scatter_medium(self, f, rate=None):
        total, _, sca = self.weather_attenuation(f, rate)
        sec = self.data["secrecy"]
        return ScatterMedium.from_db_per_km(
            self.gas_attenuation(f) + total, sca, sec["phase_g"], sec["phase_f"]
        )

    def secrecy_scenario(self, f, rate=None, mi_mode=None, nlos_mode=None):
        sec = self.data["secrecy"]
        lk = self.data["link"]
        return SecrecyScenario(
            frequency=f,
            medium=self.scatter_medium(f, rate),
            distance=lk["distance_m"],
            tx_power=self.tx_power_w,
            divergence=lk["divergence_rad"],
            bob_area=lk["rx_area_m2"],
            eve_area=sec["eve_area_m2"],
            eve_fov=math.radians(sec["eve_fov_deg"]),
            detector=self.detector(f),
            q=sec["q"],
            mi_variant=_mode(mi_mode or sec["mi_mode"]),
            nlos_mode=_mode(nlos_mode or sec["nlos_mode"]),
        )

    def channel_gains(self, f, rate=None, eve_position=None, nlos_mode=None):
        """(G_LoS, G_NLoS) with Eve at ``eve_position`` (default from the file), pointing optimised."""
        sc = self.secrecy_scenario(f, rate, nlos_mode=nlos_mode)
        x, y = self.data["secrecy"]["eve_position"] if eve_position is None else eve_position
        eve = EveGeometry(x, y, fov=sc.eve_fov, rx_area=sc.eve_area)
        _, g_n = optimal_pointing(eve, sc.medium, sc.distance, sc.nlos_mode)
        return sc.bob_gain(), g_n

    def grid(self):
        g = self.data["secrecy"].get("grid")
        if g is None:
            raise ConfigurationError(f"{self.source}: secrecy/grid is required for maps")
        return MapGrid(**g)

    def sweep_values(self, key):
        spec = self.data.get("sweep", {}).get(key)
        if spec is None:
            raise ConfigurationError(f"{self.source}: sweep/{key} is required for this command")
        return _values_of(spec)

    def sigma_r2(self, f):
        """Log-gain variance for outage: explicit, else the link's Rytov variance."""
        s = self.data.get("sweep", {}).get("sigma_r2")
        if s is not None:
            return s
        if self.weather_kind != "turbulence":
            raise ConfigurationError(f"{self.source}: outage needs sweep/sigma_r2 or a turbulence block")
        return rytov_variance(self.weather["cn2"], f, self.data["link"]["distance_m"])


def gain_crossing(scn: Scenario, f, rates, eve_position=None, nlos_mode=None):
    """First weather intensity where G_NLoS reaches G_LoS, refined between
    bracketing ``rates``; None when Eve stays below Bob over the sweep."""
    from scipy.optimize import brentq

    def gap(r):
        g_l, g_n = scn.channel_gains(f, r, eve_position, nlos_mode)
        return math.log(g_n) - math.log(g_l)

    rates = sorted(rates)
    prev_r, prev_v = rates[0], gap(rates[0])
    if prev_v >= 0:
        return prev_r
    for r in rates[1:]:
        v = gap(r)
        if v >= 0:
            return brentq(gap, prev_r, r, xtol=1e-4 * r, rtol=1e-6)
        prev_r, prev_v = r, v
    return None
