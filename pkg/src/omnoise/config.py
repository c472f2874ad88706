"""TOML run configuration: parsing, validation, emission and unit resolution.

Frequencies in a config file are ordinary frequencies (``*_hz`` keys); every
key carries its unit in its name and no unit is ever inferred.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import tomli
import tomli_w

from .errors import ConfigError
from .model import (
    C_LIGHT,
    ProbeConfig,
    SystemParams,
    TabulatedPSD,
    hz,
    minimum_sql_power,
    squeeze_r_from_db,
    validate_system,
)

NUMBER = (int, float)

SCHEMA = {
    "system": {
        "omega_m_hz": NUMBER,
        "q_m": NUMBER,
        "gamma_m_hz": NUMBER,
        "kappa_c_hz": NUMBER,
        "q_c": NUMBER,
        "kappa_ex_hz": NUMBER,
        "eta": NUMBER,
        "g0_hz": NUMBER,
        "wavelength_nm": NUMBER,
        "omega_cav_hz": NUMBER,
        "epsilon": int,
        "mass_kg": NUMBER,
    },
    "probe": {
        "power_w": NUMBER,
        "power_rel_pmin_db": NUMBER,
        "detuning_hz": NUMBER,
        "squeeze_db": NUMBER,
        "antisqueeze_db": NUMBER,
        "squeeze_angle_deg": NUMBER,
        "loss_port_squeeze_db": NUMBER,
        "s_ext": (int, float, dict),
    },
    "run": {
        "engine": str,
        "format": str,
        "out": str,
        "quadrature_angle_deg": NUMBER,
        "grid_min_hz": NUMBER,
        "grid_max_hz": NUMBER,
        "grid_count": int,
        "grid_spacing": str,
        "sweep_variable": str,
        "sweep_min": NUMBER,
        "sweep_max": NUMBER,
        "sweep_count": int,
        "sweep_spacing": str,
        "sweep_values": list,
        "optimize": str,
        "optimize_eta": NUMBER,
        "figure_id": str,
        "verify_draws": int,
        "seed": int,
    },
}

EXCLUSIVE = {
    "system": [("q_m", "gamma_m_hz"), ("kappa_c_hz", "q_c"), ("kappa_ex_hz", "eta"),
               ("wavelength_nm", "omega_cav_hz")],
    "probe": [("power_w", "power_rel_pmin_db")],
}
REQUIRED = {"system": ("omega_m_hz", "g0_hz")}
CHOICES = {
    ("run", "engine"): ("closedform", "solver"),
    ("run", "format"): ("csv", "json"),
    ("run", "grid_spacing"): ("linear", "log"),
    ("run", "sweep_spacing"): ("linear", "log"),
    ("run", "sweep_variable"): ("eta", "power", "squeeze_r", "sideband_resolution"),
    ("run", "optimize"): ("power", "coupling"),
    ("run", "figure_id"): ("fig1", "fig2", "fig3", "fig4", "all"),
}


@dataclass
class RunConfig:
    system: dict
    probe: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)

    def as_dict(self):
        out = {"system": self.system}
        if self.probe:
            out["probe"] = self.probe
        if self.run:
            out["run"] = self.run
        return copy.deepcopy(out)


def _check_section(name, section):
    problems = []
    schema = SCHEMA[name]
    for key, value in section.items():
        path = f"{name}.{key}"
        if key not in schema:
            problems.append(f"{path}: unknown key")
            continue
        kinds = schema[key]
        if isinstance(value, bool) or not isinstance(value, kinds):
            problems.append(f"{path}: wrong type {type(value).__name__}")
            continue
        allowed = CHOICES.get((name, key))
        if allowed and value not in allowed:
            problems.append(f"{path}: must be one of {', '.join(allowed)}")
    for a, b in EXCLUSIVE.get(name, []):
        present = [k for k in (a, b) if k in section]
        if len(present) == 2:
            problems.append(f"{name}.{a} and {name}.{b} are mutually exclusive; give exactly one")
        elif not present and (name != "probe" or section):
            problems.append(f"{name}: one of {name}.{a} or {name}.{b} is required")
    for key in REQUIRED.get(name, ()):
        if key not in section:
            problems.append(f"{name}.{key}: required")
    if name == "probe" and isinstance(section.get("s_ext"), dict):
        table = section["s_ext"]
        if set(table) != {"omega_rad_s", "psd"}:
            problems.append("probe.s_ext: table needs exactly omega_rad_s and psd arrays")
    return problems


def from_dict(data) -> RunConfig:
    problems = []
    for name in data:
        if name not in SCHEMA:
            problems.append(f"{name}: unknown section")
    if "system" not in data:
        problems.append("system: section required")
    for name in SCHEMA:
        if name in data:
            if not isinstance(data[name], dict):
                problems.append(f"{name}: must be a table")
            else:
                problems.extend(_check_section(name, data[name]))
    if problems:
        raise ConfigError("invalid config:\n  " + "\n  ".join(problems))
    return RunConfig(
        system=copy.deepcopy(data["system"]),
        probe=copy.deepcopy(data.get("probe", {})),
        run=copy.deepcopy(data.get("run", {})),
    )


def parse_config(text) -> RunConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    return from_dict(data)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def emit_config(cfg: RunConfig) -> str:
    return tomli_w.dumps(cfg.as_dict())


def resolve_system(cfg: RunConfig) -> SystemParams:
    s = cfg.system
    omega_m = hz(s["omega_m_hz"])
    gamma_m = omega_m / s["q_m"] if "q_m" in s else hz(s["gamma_m_hz"])
    if "omega_cav_hz" in s:
        omega_cav = hz(s["omega_cav_hz"])
    else:
        omega_cav = 2.0 * math.pi * C_LIGHT / (s["wavelength_nm"] * 1e-9)
    kappa_c = hz(s["kappa_c_hz"]) if "kappa_c_hz" in s else omega_cav / s["q_c"]
    if "kappa_ex_hz" in s:
        kappa_ex = hz(s["kappa_ex_hz"])
    else:
        eta = s["eta"]
        if not 0 < eta < 1:
            raise ConfigError("system.eta: must lie strictly between 0 and 1")
        kappa_ex = eta * kappa_c / (1.0 - eta)
    sys = SystemParams(
        omega_m=omega_m,
        gamma_m=gamma_m,
        kappa_c=kappa_c,
        kappa_ex=kappa_ex,
        g0=hz(s["g0_hz"]),
        omega_cav=omega_cav,
        epsilon=s.get("epsilon", 1),
        mass=s.get("mass_kg"),
    )
    try:
        return validate_system(sys)
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc


def resolve_probe(cfg: RunConfig, sys: SystemParams) -> ProbeConfig:
    p = cfg.probe
    if "power_w" in p:
        power = float(p["power_w"])
    elif "power_rel_pmin_db" in p:
        power = minimum_sql_power(sys) * 10 ** (p["power_rel_pmin_db"] / 10.0)
    else:
        power = 0.0
    r = squeeze_r_from_db(p.get("squeeze_db", 0.0))
    anti = squeeze_r_from_db(p["antisqueeze_db"]) if "antisqueeze_db" in p else None
    s_ext = p.get("s_ext", 0.0)
    if isinstance(s_ext, dict):
        s_ext = TabulatedPSD(s_ext["omega_rad_s"], s_ext["psd"])
    try:
        return ProbeConfig(
            power=power,
            detuning=hz(p.get("detuning_hz", 0.0)),
            squeeze_r=r,
            squeeze_angle=math.radians(p.get("squeeze_angle_deg", 0.0)),
            loss_port_squeeze_r=squeeze_r_from_db(p.get("loss_port_squeeze_db", 0.0)),
            external_force_psd=s_ext,
            antisqueeze_r=anti,
        )
    except ValueError as exc:
        raise ConfigError(f"probe: {exc}") from exc


def benchmark_config_text():
    """Config for the 78 MHz whispering-gallery example (eta = 0.8, P = P_min, 8.7 dB)."""
    kappa_c_hz = 78e6 / 22.0
    return (
        "[system]\n"
        "omega_m_hz = 78e6\n"
        "q_m = 9600\n"
        f"kappa_c_hz = {kappa_c_hz!r}\n"
        "eta = 0.8\n"
        "g0_hz = 1700.0\n"
        f"omega_cav_hz = {5.5e7 * kappa_c_hz!r}\n"
        "\n[probe]\n"
        "power_rel_pmin_db = 0.0\n"
        f"squeeze_db = {20.0 / math.log(10.0)!r}\n"
    )
