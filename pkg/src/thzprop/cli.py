"""Command-line front end: scenario file in, CSV/JSON tables out.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
Errors are reported on stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError, DomainError, NumericalError, ResourceError
from .link import (
    ber_ask,
    ber_mqam,
    blocked_fraction,
    duty_averaged_ber,
    free_space_path_loss_db,
    friis_received_power,
    snr_from_power,
)
from .atmosphere import attenuation_spectrum
from .scenario import Scenario
from .secrecy import EveGeometry, optimal_pointing, outage_monte_carlo, outage_probability, secrecy_map

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


# ---------------------------------------------------------------------------
# output

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else _fmt(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _provenance(scn: Scenario, command, args):
    return {
        "artifact_version": __version__,
        "catalogs": scn.catalog_versions(),
        "scenario": scn.name,
        "scenario_hash": scn.hash,
        "command": command,
        "seed": args.seed,
        "mi_mode": args.mode or scn.data["secrecy"]["mi_mode"],
        "nlos_mode": args.nlos_mode or scn.data["secrecy"]["nlos_mode"],
    }


def _csv_text(prov, columns, rows):
    buf = io.StringIO()
    buf.write(f"# thzprop {prov['artifact_version']}\n")
    cats = ", ".join(f"{k}={v}" for k, v in sorted(prov["catalogs"].items()))
    buf.write(f"# catalogs: {cats}\n")
    buf.write(f"# scenario: {prov['scenario']} sha256:{prov['scenario_hash']}\n")
    buf.write(f"# command: {prov['command']} seed={prov['seed']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _json_text(doc):
    return json.dumps(_jsonable(doc), sort_keys=True, indent=1) + "\n"


def _emit_table(args, scn, command, columns, rows, extra=None):
    prov = _provenance(scn, command, args)
    fmt = args.format or scn.data.get("output", {}).get("format", "csv")
    out = Path(args.out) / f"{command}.{fmt}"
    if fmt == "csv":
        atomic_write(out, _csv_text(prov, columns, rows))
    else:
        doc = {"provenance": prov, "columns": columns, "rows": rows}
        if extra:
            doc.update(extra)
        atomic_write(out, _json_text(doc))
    return [str(out)]


# ---------------------------------------------------------------------------
# commands

def cmd_gas_spectrum(scn: Scenario, args):
    fr = scn.data.get("sweep", {}).get("frequency")
    grid = np.asarray(scn.frequencies, float) if fr is None else np.linspace(fr["start"], fr["stop"], fr["n"])
    rhs = scn.data.get("sweep", {}).get("relative_humidity") or [scn.data["environment"]["relative_humidity"]]
    cat = scn.catalog()
    d = scn.data["link"]["distance_m"]
    rows = []
    for rh in rhs:
        env = scn.environment(relative_humidity=rh)
        spec = attenuation_spectrum(env, grid, cat) if scn.data["gas"]["enabled"] else np.zeros_like(grid)
        for f, a in zip(grid, spec):
            rows.append([rh, float(f), float(a), free_space_path_loss_db(float(f), d) + float(a) * d / 1000.0])
    cols = ["relative_humidity", "f_GHz", "atten_dB_per_km", "path_loss_dB"]
    return _emit_table(args, scn, "gas-spectrum", cols, rows)


def cmd_weather_attenuation(scn: Scenario, args):
    rates = scn.sweep_values("rate")
    rows = []
    for f in scn.frequencies:
        gas = scn.gas_attenuation(f)
        for r in rates:
            total, ab, sca = scn.weather_attenuation(f, r)
            rows.append([f, r, total, ab, sca, gas, total + gas])
    cols = ["f_GHz", "rate", "total_dB_per_km", "absorption_dB_per_km", "scattering_dB_per_km",
            "gas_dB_per_km", "total_with_gas_dB_per_km"]
    return _emit_table(args, scn, "weather-attenuation", cols, rows)


def cmd_ber(scn: Scenario, args):
    sweep = scn.data.get("sweep", {})
    axis = sweep.get("ber_axis", "snr")
    values = scn.sweep_values("ber_values")
    order = scn.data["modulation"]["qam_order"]
    noise = scn.data["detector"]["noise_floor_dbm"]
    block = scn.data.get("blocking")
    frac = None
    if block is not None:
        if "fraction" in block:
            frac = block["fraction"]
        elif "transit_time_s" in block and "window_s" in block:
            frac = blocked_fraction(block["transit_time_s"], block["window_s"])
        else:
            raise ConfigurationError(f"{scn.source}: blocking needs 'fraction' or transit_time_s and window_s")
    rows = []
    for f in scn.frequencies:
        for v in values:
            if axis == "snr":
                snr_db = v
                p_rx = noise + snr_db
            else:
                dist = v if axis == "distance" else None
                rate = v if axis == "rate" else None
                geo = scn.link_geometry(distance=dist)
                p_rx = friis_received_power(scn.tx_power_dbm, geo, f, scn.total_attenuation(f, rate))
                snr_db = p_rx - noise
            snr = float(snr_from_power(snr_db, 0.0)) if math.isfinite(snr_db) else 0.0
            row = [f, v, p_rx, snr_db, ber_ask(snr), ber_mqam(snr, order)]
            if frac is not None:
                snr_b = snr * 10.0 ** (-block["extra_loss_db"] / 10.0)
                row += [
                    duty_averaged_ber(ber_ask(snr_b), row[4], frac),
                    duty_averaged_ber(ber_mqam(snr_b, order), row[5], frac),
                ]
            rows.append(row)
    cols = ["f_GHz", axis, "p_rx_dBm", "snr_dB", "ber_ask", f"ber_qam{order}"]
    if frac is not None:
        cols += ["ber_ask_avg", f"ber_qam{order}_avg"]
    return _emit_table(args, scn, "ber", cols, rows)


def _map_label(f):
    return f"{f:g}".replace(".", "p")


def cmd_secrecy_map(scn: Scenario, args):
    grid = scn.grid()
    prov = _provenance(scn, "secrecy-map", args)
    written = []
    summary = []
    for f in scn.frequencies:
        sc = scn.secrecy_scenario(f, mi_mode=args.mode, nlos_mode=args.nlos_mode)
        mp = secrecy_map(sc, grid)
        stem = Path(args.out) / f"secrecy_map_{_map_label(f)}GHz"
        rows = [[x, y, mp.values[j, i]] for j, y in enumerate(mp.y) for i, x in enumerate(mp.x)]
        atomic_write(stem.with_suffix(".csv"), _csv_text(prov, ["x_m", "y_m", "Cs_gbps"], rows))
        metrics = {
            "frequency_ghz": f,
            "msc_gbps": mp.msc,
            "insecure_count": mp.insecure_count,
            "insecure_fraction": mp.insecure_fraction,
            "cells": int(mp.values.size),
        }
        doc = {
            "schema": "thzprop.secrecy_map/1",
            "provenance": prov,
            "scenario": scn.data,
            "grid": {"x": mp.x, "y": mp.y},
            "medium": mp.metadata,
            "lambda_l": mp.lambda_l,
            "metrics": metrics,
            "values_gbps": mp.values,
            "eve_pointing_rad": mp.pointing,
            "cell_errors": mp.cell_errors,
        }
        atomic_write(stem.with_suffix(".json"), _json_text(doc))
        written += [str(stem.with_suffix(".csv")), str(stem.with_suffix(".json"))]
        summary.append(metrics)
    out = Path(args.out) / "secrecy_summary.json"
    atomic_write(out, _json_text({"provenance": prov, "maps": summary}))
    return written + [str(out)]


def cmd_outage(scn: Scenario, args):
    rates = scn.sweep_values("target_rate_gbps")
    ex, ey = scn.data["secrecy"]["eve_position"]
    rows = []
    for f in scn.frequencies:
        sc = scn.secrecy_scenario(f, mi_mode=args.mode, nlos_mode=args.nlos_mode)
        eve = EveGeometry(ex, ey, fov=sc.eve_fov, rx_area=sc.eve_area)
        _, g_n = optimal_pointing(eve, sc.medium, sc.distance, sc.nlos_mode)
        lam_n = float(sc.photons(g_n))
        s2 = scn.sigma_r2(f)
        for r in rates:
            row = [f, r, outage_probability(r, sc, s2, lambda_n=lam_n)]
            if args.monte_carlo:
                p, se = outage_monte_carlo(r, sc, s2, args.monte_carlo, args.seed, lambda_n=lam_n)
                row += [p, se]
            rows.append(row)
    cols = ["f_GHz", "R_gbps", "P0"]
    if args.monte_carlo:
        cols += ["P0_monte_carlo", "P0_monte_carlo_stderr"]
    return _emit_table(args, scn, "outage", cols, rows)


COMMANDS = {
    "gas-spectrum": cmd_gas_spectrum,
    "weather-attenuation": cmd_weather_attenuation,
    "ber": cmd_ber,
    "secrecy-map": cmd_secrecy_map,
    "outage": cmd_outage,
}


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="thzprop", description="THz channel propagation and secrecy tables")
    p.add_argument("--version", action="version", version=f"thzprop {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--scenario", required=True, help="scenario YAML file")
        s.add_argument("--out", default=".", help="output directory")
        s.add_argument("--format", choices=["csv", "json"], default=None)
        s.add_argument("--seed", type=_u64, default=0)
        s.add_argument("--monte-carlo", type=_positive_int, default=None, metavar="N")
        s.add_argument("--mode", choices=["as-printed", "corrected"], default=None,
                       help="mutual-information variant")
        s.add_argument("--nlos-mode", choices=["as-printed", "physical"], default=None)
    return p


def _fail(code, exc):
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    diag = getattr(exc, "diagnostics", None)
    if diag:
        doc["diagnostics"] = diag
    sys.stderr.write(json.dumps(_jsonable(doc), sort_keys=True) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        scn = Scenario.load(args.scenario)
        written = COMMANDS[args.command](scn, args)
    except (ConfigurationError, DomainError, ValueError) as exc:
        return _fail(EXIT_CONFIG, exc)
    except (NumericalError, ResourceError, ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    sys.stdout.write(json.dumps({"command": args.command, "written": written}, sort_keys=True) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
