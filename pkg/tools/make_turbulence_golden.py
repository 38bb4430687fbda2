"""Regenerate tests/golden/scintillation_675ghz.json with 50-digit arithmetic.

Uses only mpmath and the defining constants, not the package.
"""
import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50
C = mp.mpf(299792458)
F_HZ = mp.mpf(675) * mp.mpf(10) ** 9
CN2 = mp.mpf("1e-13")
L = mp.mpf(1000)

k = 2 * mp.pi * F_HZ / C
sigma_chi2 = mp.mpf("23.17") * CN2 * k ** (mp.mpf(7) / 6) * L ** (mp.mpf(11) / 6)
loss_db = 2 * mp.sqrt(sigma_chi2)

out = {
    "description": "scintillation loss 2 sigma_chi (dB), 675 GHz, C_n^2 = 1e-13, 1 km",
    "frequency_ghz": 675,
    "cn2": 1e-13,
    "path_m": 1000,
    "loss_db": float(loss_db),
    "loss_db_50_digits": mp.nstr(loss_db, 50),
}
path = Path(__file__).resolve().parents[1] / "tests" / "golden" / "scintillation_675ghz.json"
path.write_text(json.dumps(out, indent=1) + "\n")
print(path, out["loss_db_50_digits"])
