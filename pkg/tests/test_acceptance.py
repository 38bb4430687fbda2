"""Acceptance suite: one PASS/FAIL line per criterion is printed at the end of the run."""
import json
import math
import time

import numpy as np
import pytest
from scipy import integrate

from thzprop import cli
from thzprop.dielectrics import permittivity_dry_snow, permittivity_ice, permittivity_water, permittivity_wet_snow
from thzprop.mie import mie_efficiencies, rayleigh_efficiencies
from thzprop.scenario import Scenario, gain_crossing
from thzprop.secrecy import EveGeometry, MapGrid, outage_monte_carlo, outage_probability, secrecy_map
from thzprop.turbulence import GammaGamma, KDist, LogNormal, NegExp, fading_pdf, sample_fading, scintillation_attenuation_rytov

SUITE_START = time.perf_counter()
HALF = MapGrid(0, 1000, 100, 1, 100, 50)


def criterion(n, title):
    return pytest.mark.criterion(n, title)


def load(scenario_dir, name):
    return Scenario.load(scenario_dir / f"{name}.yaml")


@criterion(1, "rain anchor: 625 GHz, 100 mm/hr, 170 dB/km +/- 20 %")
def test_rain_anchor(scenario_dir, record_property):
    scn = load(scenario_dir, "fig07_rain_625ghz")
    t0 = time.perf_counter()
    total, _, _ = scn.weather_attenuation(625, 100)
    dt = time.perf_counter() - t0
    record_property("detail", f"{total:.1f} dB/km in {dt:.2f} s")
    assert dt < 5
    assert 136 <= total <= 204


@criterion(2, "rain flatness: 12 mm/hr varies < 25 % over 100 GHz-1 THz")
def test_rain_flatness(scenario_dir, record_property):
    scn = load(scenario_dir, "fig07_rain_flatness")
    t0 = time.perf_counter()
    a = np.array([scn.weather_attenuation(f)[0] for f in scn.frequencies])
    dt = time.perf_counter() - t0
    spread = (a.max() - a.min()) / a.min()
    record_property("detail", f"{a.min():.2f}-{a.max():.2f} dB/km, spread {100 * spread:.1f} % in {dt:.1f} s")
    assert len(a) == 50 and dt < 30
    assert spread < 0.25


@criterion(3, "gas calibration: 1 km at 300 GHz, 143 dB (RH 30 %) to 146 dB (RH 90 %) +/- 3 dB")
def test_gas_calibration(scenario_dir, tmp_path, record_property):
    scn = scenario_dir / "fig03_gas_path_loss.yaml"
    assert cli.main(["gas-spectrum", "--scenario", str(scn), "--out", str(tmp_path)]) == 0
    rows = [ln.split(",") for ln in (tmp_path / "gas-spectrum.csv").read_text().splitlines() if not ln.startswith("#")][1:]
    loss = {float(r[0]): float(r[3]) for r in rows if float(r[1]) == 300.0}
    record_property("detail", ", ".join(f"RH {rh:.0%}: {v:.2f} dB" for rh, v in sorted(loss.items())))
    assert loss[0.3] < loss[0.6] < loss[0.9]
    assert abs(loss[0.3] - 143) <= 3 and abs(loss[0.9] - 146) <= 3


@criterion(4, "snow anchor: wet snow, 200 GHz, 3.5 mm/hr, 8 m in [1.0, 3.5] dB")
def test_snow_anchor(scenario_dir, record_property):
    scn = load(scenario_dir, "fig14_wet_snow_200ghz")
    path_db = scn.weather_attenuation(200)[0] * 8 / 1000
    record_property("detail", f"{path_db:.3f} dB")
    assert 1.0 <= path_db <= 3.5


@criterion(5, "snow ordering: wet > dry at 300 GHz; dry-snow scattering > absorption at 140 GHz")
def test_snow_ordering(scenario_dir, record_property):
    dry = load(scenario_dir, "fig12_dry_snow")
    wet = load(scenario_dir, "fig12_wet_snow")
    d300, w300 = dry.weather_attenuation(300)[0], wet.weather_attenuation(300)[0]
    _, ab, sca = dry.weather_attenuation(140)
    record_property("detail", f"300 GHz wet {w300:.2f} vs dry {d300:.2f} dB/km; 140 GHz dry sca {sca:.2f} vs abs {ab:.3f}")
    assert w300 > d300
    assert sca > ab


@criterion(6, "turbulence regression: 675 GHz, Cn2 1e-13, 1 km in [0.3, 0.7] dB, golden match")
def test_turbulence_regression(golden_dir, record_property):
    gold = json.loads((golden_dir / "scintillation_675ghz.json").read_text())
    loss = scintillation_attenuation_rytov(1e-13, 675, 1000).loss_db
    record_property("detail", f"{loss:.6f} dB (golden {gold['loss_db']:.6f})")
    assert 0.3 <= loss <= 0.7
    assert loss == pytest.approx(gold["loss_db"], rel=1e-12)


def _mass(dist):
    pieces = [(0, 1e-6), (1e-6, 1e-3), (1e-3, 0.1), (0.1, 1), (1, 3), (3, 10), (10, 50), (50, np.inf)]
    return sum(integrate.quad(lambda x: float(fading_pdf(dist, x)), lo, hi, limit=400, epsabs=1e-13, epsrel=1e-12)[0] for lo, hi in pieces)


@criterion(7, "fading statistics: normalisation, GG(beta=1) = K, GG(4,2) scintillation index")
def test_fading_statistics(record_property):
    t0 = time.perf_counter()
    masses = [_mass(d) for d in (LogNormal(0.3), GammaGamma(4, 2), KDist(2.5), NegExp())]
    i = np.linspace(0.01, 10, 500)
    gap = max(np.max(np.abs(fading_pdf(GammaGamma(a, 1.0), i) - fading_pdf(KDist(a), i))) for a in (1.5, 2.5, 7.0))
    s = sample_fading(GammaGamma(4, 2), seed=2024, n=10**6)
    si = s.var() / s.mean() ** 2
    dt = time.perf_counter() - t0
    record_property("detail", f"max |mass-1| {max(abs(m - 1) for m in masses):.1e}, GG-K gap {gap:.1e}, SI {si:.4f}, {dt:.1f} s")
    assert all(abs(m - 1) <= 1e-6 for m in masses)
    assert gap <= 1e-8
    assert abs(si / 0.875 - 1) <= 0.02
    assert dt < 60


@criterion(8, "Mie oracles: Rayleigh within 1 % for x <= 0.1, lossless q_abs < 1e-10, q_ext(x=100)")
def test_mie_oracles(record_property):
    media = [
        permittivity_water(100, 298.15), permittivity_water(300, 273.15), permittivity_ice(140, 268),
        permittivity_dry_snow(0.1, 140, 272), permittivity_wet_snow(200, 273.15, 0.52, 0.25),
    ]
    worst = 0.0
    for eps in media:
        m = eps.refractive_index()
        for x in (1e-3, 0.01, 0.05, 0.1):
            mie, ray = mie_efficiencies(m, x), rayleigh_efficiencies(m, x)
            worst = max(worst, abs(ray.q_ext / mie.q_ext - 1), abs(ray.q_sca / mie.q_sca - 1))
    q_abs = max(abs(mie_efficiencies(1.5, x).q_abs) for x in (0.5, 5, 40, 200))
    q_ext = mie_efficiencies(1.5, 100.0).q_ext
    record_property("detail", f"Rayleigh worst {100 * worst:.3f} %, lossless q_abs {q_abs:.1e}, q_ext(100) {q_ext:.4f}")
    assert worst <= 0.01
    assert q_abs < 1e-10
    assert 1.9 <= q_ext <= 2.3


@criterion(9, "secrecy orderings (a)-(e)")
def test_secrecy_rain_crossings(scenario_dir, record_property):
    scn = load(scenario_dir, "fig21_rain_secrecy")
    rates = scn.sweep_values("rate")
    r140, r220 = gain_crossing(scn, 140, rates), gain_crossing(scn, 220, rates)
    record_property("detail", f"(a) rain crossing 140 GHz {r140:.1f} > 220 GHz {r220:.1f} mm/hr")
    assert r140 is not None and r220 is not None and r140 > r220


@criterion(9, "secrecy orderings (a)-(e)")
def test_secrecy_dry_snow_no_crossing(scenario_dir, record_property):
    scn = load(scenario_dir, "fig22_dry_snow_secrecy")
    r = gain_crossing(scn, 140, np.geomspace(0.01, 50, 30))
    record_property("detail", f"(b) dry snow 140 GHz crossing {r}")
    assert r is None


@criterion(9, "secrecy orderings (a)-(e)")
def test_secrecy_msc_falls_with_frequency(scenario_dir, record_property):
    scn = load(scenario_dir, "fig21_rain_secrecy")
    msc = [secrecy_map(scn.secrecy_scenario(f, 15), HALF).msc for f in (140, 220, 340)]
    record_property("detail", "(c) rain MSC " + " > ".join(f"{m:.4g}" for m in msc) + " Gbps")
    assert msc[0] > msc[1] > msc[2]


@criterion(9, "secrecy orderings (a)-(e)")
def test_secrecy_insecure_region_grows_with_cn2(scenario_dir, record_property):
    scn = load(scenario_dir, "fig25_turbulence_secrecy")
    counts = [secrecy_map(scn.with_rate(c).secrecy_scenario(340), HALF).insecure_count for c in (1e-12, 1e-11, 1e-10)]
    record_property("detail", f"(d) insecure cells {counts}")
    assert counts[0] < counts[1] < counts[2]


@criterion(9, "secrecy orderings (a)-(e)")
def test_secrecy_divergence_lowers_msc(scenario_dir, record_property):
    scn = load(scenario_dir, "fig26_divergence")
    grid = scn.grid()
    narrow = secrecy_map(scn.secrecy_scenario(340), grid).msc
    wide = secrecy_map(scn.with_changes(link={"divergence_rad": 0.035}).secrecy_scenario(340), grid).msc
    record_property("detail", f"(e) MSC 25 mrad {narrow:.2f} > 35 mrad {wide:.2f} Gbps")
    assert wide < narrow


_FULL_MAP = {}


@criterion(12, "performance: 200x100 map < 60 s, acceptance suite < 10 min")
def test_full_map_runtime(scenario_dir, record_property):
    scn = load(scenario_dir, "fig25_turbulence_secrecy").with_rate(1e-10)
    grid = scn.grid()
    assert (grid.nx, grid.ny) == (200, 100)
    t0 = time.perf_counter()
    _FULL_MAP["map"] = m = secrecy_map(scn.secrecy_scenario(340), grid)
    dt = time.perf_counter() - t0
    record_property("detail", f"200x100 map {dt:.1f} s")
    assert m.values.shape == (100, 200)
    assert dt < 60


@criterion(10, "zero-capacity invariant over a full 200x100 map")
def test_zero_capacity_invariant(scenario_dir, record_property):
    m = _FULL_MAP.get("map")
    if m is None:
        scn = load(scenario_dir, "fig25_turbulence_secrecy").with_rate(1e-10)
        m = secrecy_map(scn.secrecy_scenario(340), scn.grid())
    eve_wins = m.lambda_n >= m.lambda_l
    record_property("detail", f"{int(eve_wins.sum())} cells with lambda_N >= lambda_L, {m.insecure_count} insecure")
    assert m.values.size == 20000
    assert eve_wins.any()
    assert np.all(m.values[eve_wins] == 0.0)
    assert np.all(m.values[~eve_wins] > 0.0)


@criterion(11, "outage: closed form vs 1e6-sample Monte-Carlo at 10 rates, monotone")
def test_outage_cross_check(scenario_dir, record_property):
    scn = load(scenario_dir, "fig27_outage")
    f = 340
    sc = scn.secrecy_scenario(f)
    s2 = scn.sigma_r2(f)
    x, y = scn.data["secrecy"]["eve_position"]
    eve = EveGeometry(x, y)
    rates = [r for r in scn.sweep_values("target_rate_gbps") if r > 0]
    assert len(rates) == 10
    n = 10**6
    worst = 0.0
    closed = []
    for k, r in enumerate(rates):
        p = outage_probability(r, sc, s2, eve)
        mc, _ = outage_monte_carlo(r, sc, s2, n, seed=100 + k, eve=eve)
        closed.append(p)
        # standard error under the closed form; the plug-in one collapses when only a few samples fall short
        se = math.sqrt(p * (1 - p) / n)
        worst = max(worst, abs(p - mc) / max(se, 1.0 / n))
    record_property("detail", f"P0 {closed[0]:.3g}..{closed[-1]:.3g}, worst deviation {worst:.2f} standard errors")
    assert worst <= 3
    assert all(b >= a for a, b in zip(closed, closed[1:]))
    assert closed[0] < closed[-1]


SMALL_GRID = {"grid": {"x_min": 0, "x_max": 1000, "nx": 20, "y_min": 1, "y_max": 100, "ny": 10}}


@criterion(13, "determinism: every CLI command byte-reproducible")
def test_cli_determinism(scenario_dir, tmp_path, record_property):
    import yaml

    small = yaml.safe_load((scenario_dir / "fig25_turbulence_secrecy.yaml").read_text())
    small["secrecy"].update(SMALL_GRID)
    (tmp_path / "map.yaml").write_text(yaml.safe_dump(small))
    runs = [
        ("gas-spectrum", scenario_dir / "fig03_gas_path_loss.yaml", []),
        ("weather-attenuation", scenario_dir / "fig07_rain_625ghz.yaml", []),
        ("ber", scenario_dir / "fig14_wet_snow_200ghz.yaml", []),
        ("secrecy-map", tmp_path / "map.yaml", []),
        ("outage", scenario_dir / "fig27_outage.yaml", ["--monte-carlo", "20000", "--seed", "7"]),
    ]
    same = []
    for cmd, scn, extra in runs:
        blobs = []
        for rep in ("a", "b"):
            out = tmp_path / cmd / rep
            assert cli.main([cmd, "--scenario", str(scn), "--out", str(out), *extra]) == 0
            blobs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        same.append(blobs[0] == blobs[1])
    record_property("detail", f"{sum(same)}/{len(same)} commands identical")
    assert all(same)


@criterion(12, "performance: 200x100 map < 60 s, acceptance suite < 10 min")
def test_suite_runtime(record_property):
    # defined last so it measures the whole module
    dt = time.perf_counter() - SUITE_START
    record_property("detail", f"acceptance suite {dt:.0f} s")
    assert dt < 600
