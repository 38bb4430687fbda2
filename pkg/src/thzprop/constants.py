"""Physical constants (SI, CODATA 2018 exact values where defined)."""

SPEED_OF_LIGHT = 299_792_458.0  # m/s
PLANCK = 6.626_070_15e-34  # J s

# dB per neper of power, i.e. 10*log10(e)
DB_PER_NEPER = 4.342944819032518

# ice density at 0 degC, g/cm^3
ICE_DENSITY = 0.917
WATER_DENSITY = 1.0


def wavelength_m(f_ghz):
    return SPEED_OF_LIGHT / (f_ghz * 1e9)


def wavenumber(f_ghz):
    """Free-space wavenumber k = 2 pi f / c in 1/m."""
    import math

    return 2.0 * math.pi * f_ghz * 1e9 / SPEED_OF_LIGHT


def db_per_km_to_nepers_per_m(alpha_db_km):
    return alpha_db_km / DB_PER_NEPER / 1000.0


def nepers_per_m_to_db_per_km(k):
    return k * DB_PER_NEPER * 1000.0
