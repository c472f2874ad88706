"""CSV/JSON writers and the result envelope."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict

import numpy as np

from .closedform import sql
from .model import ProbeConfig, SystemParams, TabulatedPSD, derive

SCHEMA_VERSION = 1


def fmt(value):
    """12 significant digits, scientific, locale independent."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".11e")
    return str(value)


def csv_text(columns: dict) -> str:
    names = list(columns)
    # lists stay lists so mixed text/number columns keep their types
    cols = [columns[n] if isinstance(columns[n], list) else np.atleast_1d(columns[n]).tolist() for n in names]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for row in zip(*cols):
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def probe_echo(probe: ProbeConfig):
    s_ext = probe.external_force_psd
    if isinstance(s_ext, TabulatedPSD):
        s_ext = {"omega_rad_s": s_ext.omega.tolist(), "psd": s_ext.values.tolist()}
    elif callable(s_ext):
        raise TypeError("callable force PSDs cannot be echoed")
    return {
        "power": probe.power,
        "detuning": probe.detuning,
        "squeeze_r": probe.squeeze_r,
        "squeeze_angle": probe.squeeze_angle,
        "loss_port_squeeze_r": probe.loss_port_squeeze_r,
        "antisqueeze_r": probe.antisqueeze_r,
        "external_force_psd": s_ext,
    }


def inputs_from_echo(parameters):
    """Rebuild (SystemParams, ProbeConfig) from an envelope's ``parameters`` block."""
    sys = SystemParams(**parameters["system"])
    p = dict(parameters["probe"])
    if isinstance(p["external_force_psd"], dict):
        t = p["external_force_psd"]
        p["external_force_psd"] = TabulatedPSD(t["omega_rad_s"], t["psd"])
    return sys, ProbeConfig(**p)


def derived_block(sys, probe):
    d = derive(sys, probe)
    return {
        "kappa": d.kappa,
        "eta": d.eta,
        "g": d.g_eff,
        "n_cav": d.n_cav,
        "p_min": d.p_min,
        "p_sql": d.p_sql,
        "sql": sql(sys),
    }


def envelope(command, sys: SystemParams, probe: ProbeConfig, result, run=None):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "parameters": {"system": asdict(sys), "probe": probe_echo(probe), "run": run or {}},
        "derived": derived_block(sys, probe),
        "result": result,
    }
