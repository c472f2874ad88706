import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omnoise import cli
from omnoise.config import (
    emit_config,
    from_dict,
    parse_config,
    resolve_system,
    benchmark_config_text,
)
from omnoise.errors import ConfigError
from omnoise.output import csv_text, inputs_from_echo

BASE = benchmark_config_text()


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


positive = st.floats(1e-3, 1e12, allow_nan=False)


@st.composite
def configs(draw):
    system = {"omega_m_hz": draw(positive), "g0_hz": draw(positive)}
    system[draw(st.sampled_from(["q_m", "gamma_m_hz"]))] = draw(positive)
    system[draw(st.sampled_from(["kappa_c_hz", "q_c"]))] = draw(positive)
    if draw(st.booleans()):
        system["eta"] = draw(st.floats(0.01, 0.99))
    else:
        system["kappa_ex_hz"] = draw(positive)
    system[draw(st.sampled_from(["wavelength_nm", "omega_cav_hz"]))] = draw(positive)
    probe = {draw(st.sampled_from(["power_w", "power_rel_pmin_db"])): draw(st.floats(0, 10))}
    probe["squeeze_db"] = draw(st.floats(0, 20))
    run = {"engine": draw(st.sampled_from(["closedform", "solver"])), "grid_count": draw(st.integers(1, 500))}
    return {"system": system, "probe": probe, "run": run}


@given(configs())
@settings(max_examples=100)
def test_round_trip(data):
    cfg = from_dict(data)
    assert parse_config(emit_config(cfg)) == cfg


def test_unknown_key_rejected_with_path():
    with pytest.raises(ConfigError, match=r"system\.omega_hz: unknown key"):
        parse_config(BASE.replace("omega_m_hz", "omega_hz"))


def test_exclusive_pair_names_both_keys():
    text = BASE.replace("eta = 0.8", "eta = 0.8\nkappa_ex_hz = 1e6")
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert "system.kappa_ex_hz" in str(info.value) and "system.eta" in str(info.value)


def test_missing_required_and_wrong_type():
    with pytest.raises(ConfigError) as info:
        from_dict({"system": {"q_m": "high"}})
    msg = str(info.value)
    assert "system.omega_m_hz: required" in msg and "system.q_m: wrong type" in msg


def test_critical_coupling_eta_resolves_to_kappa_c():
    cfg = parse_config(BASE.replace("eta = 0.8", "eta = 0.5"))
    sys = resolve_system(cfg)
    assert sys.kappa_ex == pytest.approx(sys.kappa_c, rel=1e-15)


def test_unit_honesty_on_echo(tmp_path, capsys):
    cfg_path = write(tmp_path, BASE.replace("[probe]", "[probe]\ndetuning_hz = 1200.0"))
    code, out, _ = run(["derive", "--config", cfg_path, "--format", "json"], capsys)
    assert code == 0
    echo = json.loads(out)["parameters"]
    cfg = parse_config(open(cfg_path).read())
    s = cfg.system
    assert echo["system"]["omega_m"] / (2 * math.pi) == pytest.approx(s["omega_m_hz"], rel=1e-15)
    assert echo["system"]["g0"] / (2 * math.pi) == pytest.approx(s["g0_hz"], rel=1e-15)
    assert echo["system"]["kappa_c"] / (2 * math.pi) == pytest.approx(s["kappa_c_hz"], rel=1e-15)
    assert echo["system"]["gamma_m"] / (2 * math.pi) == pytest.approx(s["omega_m_hz"] / s["q_m"], rel=1e-15)
    assert echo["system"]["omega_cav"] / (2 * math.pi) == pytest.approx(s["omega_cav_hz"], rel=1e-15)
    assert echo["probe"]["detuning"] / (2 * math.pi) == pytest.approx(1200.0, rel=1e-15)


def test_wavelength_resolution():
    text = BASE.replace("omega_cav_hz", "wavelength_nm").split("wavelength_nm")[0]
    text += "wavelength_nm = 1550.0\n\n[probe]\npower_w = 1e-6\n"
    sys = resolve_system(parse_config(text))
    assert sys.omega_cav == pytest.approx(2 * math.pi * 299792458.0 / 1550e-9)


def test_derive_reports_pmin(tmp_path, capsys):
    code, out, _ = run(["derive", "--config", write(tmp_path, BASE)], capsys)
    assert code == 0
    rows = dict(line.split(",") for line in out.strip().splitlines()[1:])
    assert float(rows["p_min_w"]) == pytest.approx(860e-9, rel=0.02)
    assert float(rows["p_min_rel_probe_db"]) == pytest.approx(0.0, abs=1e-12)


def test_budget_columns_and_sql_margin(tmp_path, capsys):
    text = BASE.replace("squeeze_db", "# squeeze_db")
    code, out, _ = run(["budget", "--config", write(tmp_path, text), "--grid", "78e6:78e6:1"], capsys)
    assert code == 0
    header, row = out.strip().splitlines()
    assert header == "omega_rad_s,s_imp,s_qba,s_ext_contrib,s_total,sql_ref"
    vals = [float(v) for v in row.split(",")]
    assert 0 <= 10 * math.log10(vals[4] / vals[5]) < 3


def test_budget_json_mirrors_csv(tmp_path, capsys):
    path = write(tmp_path, BASE)
    _, csv_out, _ = run(["budget", "--config", path, "--grid", "70e6:90e6:5"], capsys)
    _, js, _ = run(["budget", "--config", path, "--grid", "70e6:90e6:5", "--format", "json"], capsys)
    result = json.loads(js)["result"]
    lines = csv_out.strip().splitlines()
    for i, name in enumerate(lines[0].split(",")):
        col = [float(l.split(",")[i]) for l in lines[1:]]
        assert np.allclose(col, result[name], rtol=1e-11)


def test_budget_detuned_routing(tmp_path, capsys):
    path = write(tmp_path, BASE.replace("[probe]", "[probe]\ndetuning_hz = 1e5"))
    code, _, err = run(["budget", "--config", path, "--grid", "70e6:90e6:3"], capsys)
    assert code == 3 and "NotResonant" in err
    code, out, _ = run(["budget", "--config", path, "--grid", "70e6:90e6:3", "--engine", "solver"], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 4


def test_zero_coupling_exit_three_with_hint(tmp_path, capsys):
    path = write(tmp_path, BASE.replace("g0_hz = 1700.0", "g0_hz = 0.0").replace(
        "power_rel_pmin_db = 0.0", "power_w = 1e-6"))
    code, _, err = run(["budget", "--config", path], capsys)
    assert code == 3 and "ZeroTransduction" in err and "hint" in err


def test_config_error_exit_two(tmp_path, capsys):
    code, _, err = run(["derive", "--config", write(tmp_path, "[system]\nbogus = 1\n")], capsys)
    assert code == 2 and "system.bogus" in err
    code, _, _ = run(["derive", "--config", str(tmp_path / "missing.toml")], capsys)
    assert code == 2
    code, _, _ = run(["derive", "--config", write(tmp_path, BASE), "--out", str(tmp_path / "no/such/dir.csv")],
                     capsys)
    assert code == 2


def test_csv_byte_determinism(tmp_path, capsys):
    path = write(tmp_path, BASE + "\n[run]\nsweep_variable = \"eta\"\nsweep_min = 0.1\nsweep_max = 0.9\n"
                 "sweep_count = 17\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["sweep", "--config", path, "--out", str(a)]) == 0
    assert cli.main(["sweep", "--config", path, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    first = a.read_text().splitlines()[1].split(",")
    assert all("e" in v and len(v.split("e")[0].replace("-", "").replace(".", "")) == 12 for v in first)


def test_envelope_reproduces_payload(tmp_path, capsys):
    path = write(tmp_path, BASE + "\n[run]\nsweep_variable = \"power\"\nsweep_values = [1e-7, 1e-6, 1e-5]\n")
    _, js, _ = run(["sweep", "--config", path, "--format", "json"], capsys)
    env = json.loads(js)
    sys, probe = inputs_from_echo(env["parameters"])
    from omnoise import analysis as an

    again = an.sweep(an.SweepSpec("power", env["parameters"]["run"]["sweep_values"], sys, probe))
    for k, v in again.items():
        assert env["result"][k] == v.tolist()


def test_optimize_and_equivalence_commands(tmp_path, capsys):
    path = write(tmp_path, BASE)
    code, out, _ = run(["optimize", "--config", path, "--format", "json"], capsys)
    res = json.loads(out)["result"]
    assert code == 0 and res["target"] == "power" and not res["analytic"]
    path2 = write(tmp_path, BASE + "\n[run]\noptimize = \"coupling\"\n", "c.toml")
    code, out, _ = run(["optimize", "--config", path2, "--format", "json"], capsys)
    assert code == 0 and 0.9 < json.loads(out)["result"]["eta"] < 1
    code, out, _ = run(["equivalence", "--config", path, "--format", "json"], capsys)
    assert code == 0 and json.loads(out)["result"]["equivalent_power_ratio"] > 1


def test_figures_writes_csv_and_sidecar(tmp_path, capsys):
    code, out, _ = run(["figures", "fig4", "--out", str(tmp_path)], capsys)
    assert code == 0
    side = json.loads((tmp_path / "fig4.json").read_text())
    assert side["id"] == "fig4" and "options" in side["provenance"]
    series = {l.split(",")[0] for l in (tmp_path / "fig4.csv").read_text().splitlines()[1:]}
    assert len(series) == 7 and "sql" in series


def test_verify_pass_fail_and_skip(tmp_path, capsys):
    code, out, _ = run(["verify", "--draws", "10"], capsys)
    assert code == 0 and "PASSED" in out
    code, out, _ = run(["verify", "--draws", "10", "--perturb-imprecision", "1.01"], capsys)
    assert code == 4 and "FAIL oracle_equivalence_config" in out
    coherent = write(tmp_path, BASE.replace("squeeze_db", "# squeeze_db"))
    code, out, _ = run(["verify", "--config", coherent, "--draws", "5", "--format", "json"], capsys)
    checks = {c["name"]: c["status"] for c in json.loads(out)["checks"]}
    assert code == 0
    assert checks["squeezing_power_equivalence"] == "skip"
    assert checks["critical_coupling_no_benefit"] == "skip"


def test_csv_text_mixed_columns():
    text = csv_text({"name": ["a", "b"], "value": [1.0, True]})
    assert text == "name,value\na,1.00000000000e+00\nb,1\n"
