import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from thzprop.dielectrics import permittivity_ice, permittivity_water, permittivity_wet_snow, permittivity_dry_snow
from thzprop.errors import DomainError, ResourceError
from thzprop.mie import (
    L_MAX_CEILING,
    mie_coefficients,
    mie_efficiencies,
    mie_efficiencies_array,
    rayleigh_efficiencies,
    truncation_order,
)

WATER_100 = permittivity_water(100, 298.15).refractive_index()

SHIPPED = [
    WATER_100,
    permittivity_water(300, 273.15).refractive_index(),
    permittivity_ice(140, 268).refractive_index(),
    permittivity_dry_snow(0.1, 140, 272).refractive_index(),
    permittivity_wet_snow(200, 273.15, 0.52, 0.25).refractive_index(),
]


def test_truncation_rule():
    assert int(truncation_order(10.0)) == math.ceil(10 + 4 * 10 ** (1 / 3) + 2) + 6


def test_rayleigh_limit_of_a1():
    m, x = 1.5, 1e-3
    a, b = mie_coefficients(m, x)
    k = (m * m - 1) / (m * m + 2)
    assert a[0] == pytest.approx(-2j / 3 * x**3 * k, rel=1e-5)
    assert abs(b[0]) < 1e-12 and abs(a[1]) < 1e-12


def test_index_matched_sphere_is_invisible():
    e = mie_efficiencies(1.0, 5.0)
    assert abs(e.q_ext) < 1e-14 and abs(e.q_sca) < 1e-14


@pytest.mark.parametrize("x", [0.5, 5.0, 40.0, 200.0])
def test_lossless_energy_conservation(x):
    e = mie_efficiencies(1.5, x)
    assert abs(e.q_ext - e.q_sca) < 1e-10 * max(1.0, e.q_ext)


def test_extinction_paradox():
    e = mie_efficiencies(1.5, 100.0)
    assert 1.9 <= e.q_ext <= 2.3


@pytest.mark.parametrize("m", SHIPPED, ids=["water100", "water300", "ice", "drysnow", "wetsnow"])
@pytest.mark.parametrize("x", [1e-3, 0.01, 0.05, 0.1])
def test_rayleigh_agreement(m, x):
    mie = mie_efficiencies(m, x)
    ray = rayleigh_efficiencies(m, x)
    assert ray.q_ext == pytest.approx(mie.q_ext, rel=0.01)
    assert ray.q_sca == pytest.approx(mie.q_sca, rel=0.01)


def test_rayleigh_edge_cases():
    assert rayleigh_efficiencies(1.5, 0.01).q_abs == 0.0
    assert rayleigh_efficiencies(1.5, 0.01, leading_order=True).q_abs == 0.0
    tiny = rayleigh_efficiencies(WATER_100, 1e-8)
    assert tiny.q_ext < 1e-6
    with pytest.raises(DomainError):
        rayleigh_efficiencies(WATER_100, 0.2)


@pytest.mark.parametrize("m", [1.33 + 1e-4j, WATER_100, 1.5 + 0j, 1.78 + 0.003j])
@pytest.mark.parametrize("x", [0.3, 7.0, 63.0, 150.0])
def test_truncation_stability(m, x):
    base = np.array(mie_efficiencies_array(m, x))
    longer = np.array(mie_efficiencies_array(m, x, extra_terms=int(truncation_order(x))))
    assert np.all(np.abs(longer - base) <= 1e-10 * np.abs(base))


def test_smooth_over_log_grid():
    x = np.geomspace(1e-3, 200, 4000)
    q_ext, _, _ = mie_efficiencies_array(WATER_100, x)
    assert np.all(np.isfinite(q_ext))
    # neighbouring points are 0.3 % apart in x; a recurrence blow-up would spike
    jumps = np.abs(np.diff(np.log(q_ext)))
    assert jumps.max() < 0.02


def _random_cases(n, seed):
    rng = np.random.default_rng(seed)
    re = rng.uniform(1.0, 9.0, n)
    im = 10 ** rng.uniform(-6, 1, n) * (rng.random(n) > 0.1)
    x = 10 ** rng.uniform(-3, 2.3, n)
    return re + 1j * im, x


def test_energy_randomized():
    ms, xs = _random_cases(10_000, 3)
    for m, x in zip(ms, xs):
        e = mie_efficiencies(complex(m), float(x))
        assert e.q_ext >= e.q_sca - 1e-10 * e.q_ext
        assert e.q_ext >= 0.0 and e.q_sca >= 0.0


@given(st.floats(1.0, 4.0), st.floats(0.0, 2.0), st.floats(0.01, 60.0))
def test_passivity_bound(re, im, x):
    a, b = mie_coefficients(complex(re, im), x)
    assert np.all(np.abs(a) <= 1 + 1e-9)
    assert np.all(np.abs(b) <= 1 + 1e-9)


def test_errors():
    with pytest.raises(DomainError):
        mie_efficiencies(0.5 + 0j, 1.0)
    with pytest.raises(DomainError):
        mie_efficiencies(1.5 - 0.1j, 1.0)
    with pytest.raises(DomainError):
        mie_efficiencies(1.5, 0.0)
    with pytest.raises(ResourceError):
        mie_coefficients(1.5, 1.0, l_max=L_MAX_CEILING + 1)
