"""Eavesdropping on a THz beam through single scattering.

Geometry: Alice at the origin transmits along +x to Bob at (d, 0); Eve sits
at (x, y) with an aperture of area A and a full field of view beta, looking
along the direction alpha (radians from +x).  An axis point l is seen from
Eve along psi in (-pi, 0) (for y > 0) with l(psi) = x - y cot(psi), so the
single-scatter integral over l becomes a smooth integral over psi:

    G_NLoS = (A k / y) * int cos(psi - alpha) p(-cos psi)
             exp(-k_ext (l(psi) + y / |sin psi|)) dpsi

with k = k_ext ("as_printed") or k = k_sca ("physical").  Eve below the
axis is handled by mirroring.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from .constants import db_per_km_to_nepers_per_m, nepers_per_m_to_db_per_km
from .errors import DomainError, NumericalError
from .link import DetectorModel, LinkGeometry, los_gain, photon_rate

__all__ = [
    "EveGeometry",
    "ScatterMedium",
    "SecrecyScenario",
    "SecrecyMap",
    "MapGrid",
    "integration_bounds",
    "phase_function",
    "nlos_gain",
    "optimal_pointing",
    "mutual_information",
    "secrecy_capacity",
    "secrecy_map",
    "outage_probability",
    "outage_monte_carlo",
    "Y_FLOOR",
]

Y_FLOOR = 1.0  # m; the single-scatter geometry degenerates on the beam axis
COARSE_POINTING_SAMPLES = 33
GOLDEN_ITERATIONS = 40


@dataclass(frozen=True)
class EveGeometry:
    x: float
    y: float
    pointing: float = -math.pi / 2  # look direction, rad from +x
    fov: float = math.radians(20.0)  # full angle
    rx_area: float = 1e-4

    def __post_init__(self):
        if not 0 < self.fov < math.pi:
            raise DomainError(f"fov must be in (0, pi), got {self.fov}")
        if not self.rx_area > 0:
            raise DomainError("rx_area must be > 0")
        if self.y == 0:
            raise DomainError("Eve must be off the beam axis (y != 0)")


@dataclass(frozen=True)
class ScatterMedium:
    k_ext: float  # nepers/m
    k_sca: float  # nepers/m
    phase_g: float = 0.9
    phase_f: float = 0.5

    def __post_init__(self):
        if not 0 <= self.k_sca <= self.k_ext * (1 + 1e-12):
            raise DomainError("need 0 <= k_sca <= k_ext")
        if not -1 < self.phase_g < 1:
            raise DomainError("phase_g must be in (-1, 1)")
        if self.phase_f < 0:
            raise DomainError("phase_f must be >= 0")

    @classmethod
    def from_db_per_km(cls, alpha_ext, alpha_sca, phase_g=0.9, phase_f=0.5):
        return cls(
            db_per_km_to_nepers_per_m(alpha_ext),
            db_per_km_to_nepers_per_m(min(alpha_sca, alpha_ext)),
            phase_g,
            phase_f,
        )

    @property
    def alpha_ext_db_km(self):
        return nepers_per_m_to_db_per_km(self.k_ext)


# ---------------------------------------------------------------------------
# geometry and phase function

def _psi_limits(x, y, d):
    """Look directions from Eve (y > 0) to the beam ends (0,0) and (d,0)."""
    return np.arctan2(-y, -x), np.arctan2(-y, d - x)


def _cone(x, y, alpha, beta, d):
    """Visible psi interval, clamped to the segment; (lo, hi) with hi <= lo meaning empty."""
    p0, pd = _psi_limits(x, y, d)
    lo = np.maximum(alpha - beta / 2, p0)
    hi = np.minimum(alpha + beta / 2, pd)
    return lo, hi


def _mirror(x, y, alpha):
    y = np.asarray(y, dtype=float)
    neg = y < 0
    return x, np.abs(y), np.where(neg, -alpha, alpha)


def integration_bounds(eve: EveGeometry, d):
    """Axis interval [l_a, l_b] inside Eve's field of view, clamped to [0, d]."""
    if not d > 0:
        raise DomainError("link distance must be > 0")
    x, y, alpha = _mirror(eve.x, eve.y, eve.pointing)
    y = float(y)
    lo, hi = _cone(eve.x, y, float(alpha), eve.fov, d)
    if hi <= lo:
        # empty: collapse onto the nearest segment end along the cone
        lb = 0.0 if float(alpha) + eve.fov / 2 <= float(_psi_limits(x, y, d)[0]) else d
        return lb, lb

    def l_of(psi):
        return min(max(x - y * math.cos(psi) / math.sin(psi), 0.0), d)

    return l_of(float(lo)), l_of(float(hi))


def phase_function(mu, g=0.9, f=0.5):
    """(1-g^2)/(4 pi) [(1+g^2-2 g mu)^(-3/2) + f (3 mu^2 - 1) / (2 (1+g^2)^(3/2))]."""
    mu_arr = np.asarray(mu, dtype=float)
    if np.any(np.abs(mu_arr) > 1.0 + 1e-12):
        raise DomainError("mu must lie in [-1, 1]")
    out = _phase(mu_arr, g, f)
    return float(out) if out.ndim == 0 else out


def _phase(mu, g, f):
    return (1 - g * g) / (4 * math.pi) * (
        (1 + g * g - 2 * g * mu) ** -1.5 + f * (3 * mu * mu - 1) / (2 * (1 + g * g) ** 1.5)
    )


# ---------------------------------------------------------------------------
# NLoS gain

@dataclass(frozen=True)
class _Rule:
    t: np.ndarray
    w: np.ndarray


def _rule(panels, nodes):
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    t = ((np.arange(panels)[:, None] + (xg[None, :] + 1) / 2) / panels).ravel()
    w = np.tile(wg / (2 * panels), panels)
    return _Rule(t, w)


DEFAULT_RULE = (8, 8)


def _nlos_core(x, y, alpha, beta, area, k_ext, k_pref, g, f, d, rule):
    """Vectorised G_NLoS; x, y (> 0), alpha broadcast together."""
    lo, hi = _cone(x, y, alpha, beta, d)
    span = np.maximum(hi - lo, 0.0)
    psi = lo[..., None] + span[..., None] * rule.t
    s = np.sin(psi)
    c = np.cos(psi)
    yy = y[..., None]
    path = x[..., None] - yy * c / s + yy / np.abs(s)
    integrand = np.maximum(np.cos(psi - alpha[..., None]), 0.0) * _phase(-c, g, f) * np.exp(-k_ext * path)
    # row-wise sum rather than a BLAS matvec: results must not depend on chunk shape
    return area * k_pref / y * span * np.sum(integrand * rule.w, axis=-1)


def _k_pref(medium, mode):
    if mode in ("as_printed", "as-printed"):
        return medium.k_ext
    if mode == "physical":
        return medium.k_sca
    raise ValueError(f"nlos mode must be 'as_printed' or 'physical', got {mode!r}")


def nlos_gain(eve: EveGeometry, medium: ScatterMedium, d, mode="as_printed", rule=DEFAULT_RULE):
    """Single-scatter gain from the beam into Eve's aperture (dimensionless)."""
    if not d > 0:
        raise DomainError("link distance must be > 0")
    k = _k_pref(medium, mode)
    x, y, alpha = _mirror(np.array([eve.x], float), np.array([eve.y], float), eve.pointing)
    val = _nlos_core(
        x, y, np.atleast_1d(alpha), eve.fov, eve.rx_area, medium.k_ext, k,
        medium.phase_g, medium.phase_f, d, _rule(*rule),
    )[0]
    if not math.isfinite(val):
        raise NumericalError("NLoS quadrature produced a non-finite value", x=eve.x, y=eve.y)
    return float(val)


def _golden_max(fun, a, b, iters):
    r = (math.sqrt(5) - 1) / 2
    c = b - r * (b - a)
    e = a + r * (b - a)
    fc, fe = fun(c), fun(e)
    for _ in range(iters):
        left = fc >= fe
        b = np.where(left, e, b)
        a = np.where(left, a, c)
        e_new = np.where(left, c, a + r * (b - a))
        c_new = np.where(left, b - r * (b - a), e)
        fe_new = np.where(left, fc, np.nan)
        fc_new = np.where(left, np.nan, fe)
        c, e = c_new, e_new
        need_c = np.isnan(fc_new)
        need_e = np.isnan(fe_new)
        fc = np.where(need_c, fun(c), fc_new)
        fe = np.where(need_e, fun(e), fe_new)
    best = np.where(fc >= fe, c, e)
    return best, np.maximum(fc, fe)


def _optimal_pointing_arrays(x, y, beta, area, medium, k_pref, d, rule):
    """Best look direction and G_NLoS per cell (y > 0 arrays)."""
    p0, pd = _psi_limits(x, y, d)
    a_lo = np.maximum(p0 - beta / 2, -math.pi)
    a_hi = np.minimum(pd + beta / 2, 0.0)
    n = COARSE_POINTING_SAMPLES
    frac = np.linspace(0.0, 1.0, n)
    alphas = a_lo[:, None] + (a_hi - a_lo)[:, None] * frac
    xs = np.broadcast_to(x[:, None], alphas.shape)
    ys = np.broadcast_to(y[:, None], alphas.shape)
    args = (beta, area, medium.k_ext, k_pref, medium.phase_g, medium.phase_f, d, rule)
    g = _nlos_core(xs, ys, alphas, *args)
    k = np.argmax(g, axis=1)
    step = (a_hi - a_lo) / (n - 1)
    centre = alphas[np.arange(len(x)), k]
    lo = np.maximum(centre - step, a_lo)
    hi = np.minimum(centre + step, a_hi)
    best_a, best_g = _golden_max(lambda a: _nlos_core(x, y, a, *args), lo, hi, GOLDEN_ITERATIONS)
    coarse_best = g[np.arange(len(x)), k]
    # golden refinement never reports less than the coarse optimum
    take = best_g >= coarse_best
    return np.where(take, best_a, centre), np.where(take, best_g, coarse_best)


def optimal_pointing(eve: EveGeometry, medium: ScatterMedium, d, mode="as_printed", rule=DEFAULT_RULE):
    """(pointing, G_NLoS) maximising Eve's scattered gain; pointing in Eve's own frame."""
    k = _k_pref(medium, mode)
    y = abs(eve.y)
    a, gval = _optimal_pointing_arrays(
        np.array([eve.x], float), np.array([y]), eve.fov, eve.rx_area, medium, k, d, _rule(*rule)
    )
    alpha = float(a[0]) if eve.y > 0 else -float(a[0])
    return alpha, float(gval[0])


# ---------------------------------------------------------------------------
# information

def _xlog2x(v):
    v = np.asarray(v, dtype=float)
    return np.where(v > 0, v * np.log2(np.where(v > 0, v, 1.0)), 0.0)


def mutual_information(q, lambda_s, lambda_b, variant="corrected"):
    """Bits per slot of the on-off photon-counting channel.

    corrected:  q f(ls+lb) + (1-q) f(lb) - f(q ls + lb),  f(v) = v log2 v
    as_printed: same with the (1-q) factor on f(lb) dropped.
    """
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must be in [0, 1], got {q}")
    ls = np.asarray(lambda_s, dtype=float)
    lb = np.asarray(lambda_b, dtype=float)
    if np.any(ls < 0) or np.any(lb < 0):
        raise DomainError("photon rates must be >= 0")
    if variant in ("corrected",):
        w_b = 1.0 - q
    elif variant in ("as_printed", "as-printed"):
        w_b = 1.0
    else:
        raise ValueError(f"variant must be 'corrected' or 'as_printed', got {variant!r}")
    if q == 0.0:
        out = np.zeros(np.broadcast(ls, lb).shape)
    else:
        out = q * _xlog2x(ls + lb) + w_b * _xlog2x(lb) - _xlog2x(q * ls + lb)
    return float(out) if np.ndim(out) == 0 else out


def secrecy_capacity(lambda_l, lambda_n, lambda_b, q=0.5, slot_rate=1e10, variant="corrected"):
    """[I(X;Y) - I(X;Z)]^+ times the slot rate, in Gbps."""
    if slot_rate < 0:
        raise DomainError("slot_rate must be >= 0")
    i_l = mutual_information(q, lambda_l, lambda_b, variant)
    i_n = mutual_information(q, lambda_n, lambda_b, variant)
    cs = np.maximum(np.asarray(i_l) - np.asarray(i_n), 0.0)
    # the degraded channel carries no secret rate even where rounding says otherwise
    cs = np.where(np.asarray(lambda_n) >= np.asarray(lambda_l), 0.0, cs) * slot_rate / 1e9
    return float(cs) if np.ndim(cs) == 0 else cs


# ---------------------------------------------------------------------------
# scenario, maps and outage

@dataclass(frozen=True)
class SecrecyScenario:
    frequency: float  # GHz
    medium: ScatterMedium
    distance: float = 1000.0
    tx_power: float = 1.0  # W
    divergence: float = 0.02  # rad
    bob_area: float = 1e-4
    eve_area: float = 1e-4
    eve_fov: float = math.radians(20.0)
    detector: DetectorModel = field(default_factory=DetectorModel)
    q: float = 0.5
    mi_variant: str = "corrected"
    nlos_mode: str = "as_printed"

    def __post_init__(self):
        if not self.frequency > 0:
            raise DomainError("frequency must be > 0")
        if self.tx_power < 0:
            raise DomainError("tx_power must be >= 0")
        if not 0 < self.eve_fov < math.pi:
            raise DomainError("eve_fov must be in (0, pi)")
        _k_pref(self.medium, self.nlos_mode)

    def bob_gain(self):
        geo = LinkGeometry(self.distance, divergence=self.divergence, rx_area=self.bob_area)
        return los_gain(geo, self.medium.alpha_ext_db_km)

    def photons(self, gain):
        det = self.detector
        return det.integration_time * det.efficiency * np.asarray(gain) * self.tx_power / det.photon_energy

    def capacity(self, lambda_l, lambda_n):
        return secrecy_capacity(
            lambda_l, lambda_n, self.detector.background_rate, self.q,
            self.detector.slot_rate, self.mi_variant,
        )

    def with_changes(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class MapGrid:
    x_min: float
    x_max: float
    nx: int
    y_min: float
    y_max: float
    ny: int

    def axes(self):
        if self.nx < 1 or self.ny < 1:
            raise DomainError("grid needs at least one cell per axis")
        xs = np.linspace(self.x_min, self.x_max, self.nx) if self.nx > 1 else np.array([self.x_min])
        ys = np.linspace(self.y_min, self.y_max, self.ny) if self.ny > 1 else np.array([self.y_min])
        if np.any(np.abs(ys) < Y_FLOOR):
            raise DomainError(f"grid rows must satisfy |y| >= {Y_FLOOR} m")
        return xs, ys


@dataclass
class SecrecyMap:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # Gbps, shape (ny, nx)
    lambda_l: float
    lambda_n: np.ndarray
    pointing: np.ndarray
    cell_errors: list
    metadata: dict

    @property
    def msc(self):
        return float(np.max(self.values))

    @property
    def insecure_mask(self):
        return self.values <= 0.0

    @property
    def insecure_count(self):
        return int(np.count_nonzero(self.insecure_mask))

    @property
    def insecure_fraction(self):
        return self.insecure_count / self.values.size


def secrecy_map(scenario: SecrecyScenario, grid: MapGrid, rule=DEFAULT_RULE, chunk=2048) -> SecrecyMap:
    """Secrecy capacity over Eve positions, Eve pointing optimised per cell."""
    xs, ys = grid.axes()
    xx, yy = np.meshgrid(xs, ys)
    fx, fy = xx.ravel(), yy.ravel()
    sign = np.where(fy < 0, -1.0, 1.0)
    ay = np.abs(fy)
    k = _k_pref(scenario.medium, scenario.nlos_mode)
    r = _rule(*rule)
    g_n = np.empty_like(fx)
    alpha = np.empty_like(fx)
    # cells are independent, so chunking keeps memory flat without changing results
    for s in range(0, fx.size, chunk):
        sl = slice(s, s + chunk)
        alpha[sl], g_n[sl] = _optimal_pointing_arrays(
            fx[sl], ay[sl], scenario.eve_fov, scenario.eve_area, scenario.medium, k, scenario.distance, r
        )
    alpha *= sign
    errors = []
    bad = ~np.isfinite(g_n)
    for i in np.flatnonzero(bad):
        errors.append({"x": float(fx[i]), "y": float(fy[i]), "error": "non-finite NLoS gain"})
    g_n = np.where(bad, 0.0, g_n)
    lam_l = float(scenario.photons(scenario.bob_gain()))
    lam_n = scenario.photons(g_n)
    cs = scenario.capacity(lam_l, lam_n)
    cs = np.where(bad, 0.0, cs)
    shape = (len(ys), len(xs))
    meta = {
        "frequency_ghz": scenario.frequency,
        "distance_m": scenario.distance,
        "tx_power_w": scenario.tx_power,
        "divergence_rad": scenario.divergence,
        "bob_area_m2": scenario.bob_area,
        "eve_area_m2": scenario.eve_area,
        "eve_fov_rad": scenario.eve_fov,
        "k_ext_np_per_m": scenario.medium.k_ext,
        "k_sca_np_per_m": scenario.medium.k_sca,
        "phase_g": scenario.medium.phase_g,
        "phase_f": scenario.medium.phase_f,
        "q": scenario.q,
        "mi_variant": scenario.mi_variant,
        "nlos_mode": scenario.nlos_mode,
        "detector": {
            "efficiency": scenario.detector.efficiency,
            "integration_time_s": scenario.detector.integration_time,
            "background_rate": scenario.detector.background_rate,
        },
        "quadrature": {"panels": rule[0], "nodes": rule[1]},
        "pointing": {"coarse_samples": COARSE_POINTING_SAMPLES, "golden_iterations": GOLDEN_ITERATIONS},
    }
    return SecrecyMap(
        xs, ys, cs.reshape(shape), lam_l, lam_n.reshape(shape), alpha.reshape(shape), errors, meta
    )


def _threshold_gain(scenario, lambda_n, target, g_ref):
    """Smallest Bob gain whose secrecy capacity reaches ``target`` Gbps (bisection in log G)."""
    def cap(gain):
        return float(scenario.capacity(float(scenario.photons(gain)), lambda_n))

    hi = max(g_ref, 1e-300)
    it = 0
    while cap(hi) < target:
        hi *= 4.0
        it += 1
        if it > 2000 or not math.isfinite(hi):
            return math.inf
    lo = hi
    while cap(lo) >= target and lo > 1e-300:
        lo /= 4.0
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if cap(mid) >= target:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-12 * hi:
            break
    return hi


def outage_probability(target_rate, scenario: SecrecyScenario, sigma_r2, eve: EveGeometry = None, lambda_n=None):
    """P(C_s < R) with log-normal fading of Bob's gain,
    ln G ~ N(ln G_bar - sigma^2/2, sigma^2)."""
    if target_rate < 0:
        raise DomainError("target rate must be >= 0")
    if not sigma_r2 >= 0:
        raise DomainError("sigma_r2 must be >= 0")
    lam_n = _eve_photons(scenario, eve, lambda_n)
    if target_rate == 0:
        return 0.0
    g_bar = scenario.bob_gain()
    g_star = _threshold_gain(scenario, lam_n, target_rate, g_bar)
    if not math.isfinite(g_star):
        return 1.0
    if sigma_r2 == 0:
        return 0.0 if g_bar >= g_star else 1.0
    s = math.sqrt(sigma_r2)
    z = (math.log(g_star / g_bar) + 0.5 * sigma_r2) / s
    return float(special.ndtr(z))


def _eve_photons(scenario, eve, lambda_n):
    if lambda_n is not None:
        return float(lambda_n)
    if eve is None:
        return 0.0
    _, g = optimal_pointing(
        replace(eve, fov=scenario.eve_fov, rx_area=scenario.eve_area), scenario.medium,
        scenario.distance, scenario.nlos_mode,
    )
    return float(scenario.photons(g))


def outage_monte_carlo(target_rate, scenario: SecrecyScenario, sigma_r2, n, seed, eve=None, lambda_n=None):
    """Monte-Carlo estimate of the outage probability and its standard error."""
    from .turbulence import LogNormal, sample_fading

    lam_n = _eve_photons(scenario, eve, lambda_n)
    fades = sample_fading(LogNormal(sigma_r2), seed, n)
    lam_l = scenario.photons(scenario.bob_gain() * fades)
    cs = scenario.capacity(lam_l, lam_n)
    p = float(np.mean(cs < target_rate))
    return p, math.sqrt(p * (1 - p) / n)
