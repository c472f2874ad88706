import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omnoise import analysis as an
from omnoise import closedform as cf
from omnoise import errors
from omnoise.model import ProbeConfig, benchmark_system, minimum_sql_power, sql_power
from omnoise.optim import golden_section

from conftest import rel, systems


def test_golden_section_quadratic():
    # plain differences resolve the minimiser only to about sqrt(eps)
    x, fx = golden_section(lambda t: (t - 1.234) ** 2 + 3.0, -10, 10, xtol=1e-12)
    assert x == pytest.approx(1.234, abs=1e-7) and fx == pytest.approx(3.0)
    x, _ = golden_section(lambda t: (t - 1.234) ** 2, -10, 10, xtol=1e-13,
                          diff=lambda u, v: (u - v) * (u + v - 2.468))
    assert x == pytest.approx(1.234, abs=1e-12)


def test_golden_section_rejects_bad_bracket():
    with pytest.raises(ValueError):
        golden_section(lambda t: t * t, 1.0, 1.0)


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
def test_two_term_minimum_is_sqrt_ratio(a, b):
    assert rel(an.minimize_two_term(a, b), math.sqrt(a / b)) < 1e-8


@given(systems(), st.floats(0.01, 2.0), st.floats(0, 1))
@settings(max_examples=80)
def test_optimum_power_matches_bracket_ratio(sys, r, r_loss):
    probe = ProbeConfig(power=1e-6, squeeze_r=r, loss_port_squeeze_r=r_loss)
    opt = an.optimize_power(sys, probe)
    a, b = an._brackets(sys, probe)
    assert rel(opt.p_norm, math.sqrt(a / b)) < 1e-8
    assert opt.s_min <= cf.total_noise_normalized(opt.p_norm * 1.01, sys.eta, sys.omega_m_bar, sys.gamma_m,
                                                  probe.drive_spectrum(), probe.loss_spectrum())


def test_coherent_optimum_exactly_one():
    opt = an.optimize_power(benchmark_system(), ProbeConfig(power=1e-6))
    assert opt.p_norm == 1.0 and opt.analytic
    assert opt.power == sql_power(benchmark_system())


def test_optimum_with_eta_override():
    sys = benchmark_system()
    opt = an.optimize_power(sys, ProbeConfig(power=1e-6, squeeze_r=0.5), eta=0.3)
    assert opt.power == pytest.approx(opt.p_norm * sql_power(sys.with_eta(0.3)))


def test_optimisers_refuse_detuning():
    with pytest.raises(errors.NotResonant):
        an.optimize_power(benchmark_system(), ProbeConfig(power=1e-6, detuning=1.0))


def test_coupling_optimum_overcoupled_and_rising_with_resolution():
    sys = benchmark_system()
    probe = ProbeConfig(power=minimum_sql_power(sys))
    etas = [an.optimize_coupling(sys.with_sideband_factor(f), probe).eta for f in (22, 100, 1000)]
    assert etas[0] > 0.9
    assert etas[0] < etas[1] < etas[2]


def test_coupling_optimum_is_a_minimum():
    sys = benchmark_system()
    probe = ProbeConfig(power=minimum_sql_power(sys))
    opt = an.optimize_coupling(sys, probe)
    for eta in (opt.eta * 0.98, min(opt.eta * 1.01, 0.9999)):
        assert cf.total_noise_at_sideband(sys.with_eta(eta), probe) >= opt.s_min


def test_equivalence_lossless_is_exact():
    sys = benchmark_system()
    for r in (0.5, 1.0, math.log(10) / 2):
        eq = an.squeezing_power_equivalence(sys, 1 - 1e-12, 0.25 * minimum_sql_power(sys), r)
        assert abs(eq.deviation) < 1e-6


def test_equivalence_overcoupled_within_fifteen_percent():
    # eta = 0.8 well below P_min with 6 dB squeezing; loss costs ~12%
    sys = benchmark_system()
    eq = an.squeezing_power_equivalence(sys, 0.8, 0.25 * minimum_sql_power(sys), 0.69)
    assert eq.ratio > 0 and abs(eq.deviation) < 0.15
    assert eq.imprecision_dominated


def test_equivalence_reports_no_equivalent_below_coherent_floor():
    # undercoupled and sideband resolved: squeezing beats the best coherent operating point
    sys = benchmark_system()
    with pytest.raises(errors.NoEquivalent):
        an.squeezing_power_equivalence(sys, 0.2, 4 * minimum_sql_power(sys), 1.0)


def test_equivalence_noise_actually_matches():
    sys = benchmark_system()
    p = 0.1 * minimum_sql_power(sys)
    eq = an.squeezing_power_equivalence(sys, None, p, 0.5)
    target = cf.total_noise_at_sideband(sys, ProbeConfig(power=p, squeeze_r=0.5))
    got = cf.total_noise_at_sideband(sys, ProbeConfig(power=eq.equivalent_power))
    assert rel(got, target) < 1e-10


def test_sweep_eta_columns():
    sys = benchmark_system()
    spec = an.SweepSpec("eta", an.GridSpec(0.1, 0.9, 9), sys, ProbeConfig(power=1e-6))
    out = an.sweep(spec)
    assert set(out) == {"value", "eta", "p_norm", "s_imp", "s_qba", "s_total", "db_over_sql"}
    assert np.allclose(out["eta"], np.linspace(0.1, 0.9, 9))
    assert np.allclose(out["s_total"], out["s_imp"] + out["s_qba"], rtol=1e-12)


def test_sweep_power_log_grid():
    sys = benchmark_system()
    spec = an.SweepSpec("power", an.GridSpec(1e-8, 1e-5, 4, "log"), sys, ProbeConfig())
    out = an.sweep(spec)
    assert np.allclose(np.diff(np.log10(out["value"])), 1.0)
    assert np.all(np.diff(out["s_imp"]) < 0) and np.all(np.diff(out["s_qba"]) > 0)


@pytest.mark.parametrize("variable,grid", [
    ("eta", [0.0, 0.5]), ("eta", [0.5, 0.4]), ("power", [-1.0, 1.0]), ("nonsense", [1.0]), ("eta", []),
])
def test_sweep_rejects_bad_grids(variable, grid):
    spec = an.SweepSpec(variable, grid, benchmark_system(), ProbeConfig(power=1e-6))
    with pytest.raises(ValueError):
        an.sweep(spec)


@pytest.mark.parametrize("fig_id,col,pick", [("fig1", "s_imp", np.argmin), ("fig2", "s_qba", np.argmax)])
def test_figure_markers_are_extrema(fig_id, col, pick):
    ds = an.figure_dataset(fig_id, eta_count=199)
    m = ds.markers()
    assert len(m["series"]) == 8
    for name, val in zip(m["series"], m[col]):
        s = ds.series(name)
        best = s[col][pick(s[col])]
        if fig_id == "fig1":
            assert val <= best * (1 + 1e-12)
        else:
            assert val >= best * (1 - 1e-12)


def test_fig1_fig2_trends():
    for fig_id, col, sign in (("fig1", "s_imp", -1), ("fig2", "s_qba", 1)):
        m = an.figure_dataset(fig_id, eta_count=199).markers()
        for mode in ("coherent", "squeezed"):
            sel = np.char.startswith(m["series"].astype(str), mode)
            order = np.argsort(m["sideband_factor"][sel])
            assert np.all(sign * np.diff(m[col][sel][order]) > 0)


def test_fig3_shape_and_contours():
    ds = an.figure_dataset("fig3", power_count=11, squeeze_count=9)
    assert ds.columns["db_over_sql"].shape == (99,)
    assert np.all(ds.columns["db_over_sql"] >= -1e-9 - 20)
    assert set(np.unique(ds.columns["contour_3db"])) <= {0, 1}


def test_fig4_coherent_never_below_sql():
    ds = an.figure_dataset("fig4", eta_count=51)
    for name in set(ds.columns["series"].tolist()) - {"sql"}:
        s = ds.series(name)
        if name.startswith("coherent"):
            assert np.all(s["db_over_sql"] >= -1e-12)
    # below P_sql the squeezed probe improves on the coherent one at the same power
    coh, sq = ds.series("coherent_-6db"), ds.series("squeezed_-6db")
    assert np.all(sq["s_total"][coh["eta"] > 0.5] < coh["s_total"][coh["eta"] > 0.5])


def test_figure_rerun_from_provenance():
    ds = an.figure_dataset("fig2", eta_count=21)
    again = an.rerun(ds.provenance)
    for k in ds.numeric_columns():
        assert np.array_equal(ds.columns[k], again.columns[k])


def test_figure_rejects_unknown():
    with pytest.raises(ValueError):
        an.figure_dataset("fig9")
    with pytest.raises(ValueError):
        an.figure_dataset("fig1", bogus=1)


def test_equivalence_ratio_converges_as_loss_vanishes():
    # convergence holds; monotonic approach in eta does not (overshoot near eta = 0.8)
    sys = benchmark_system()
    p = 0.25 * minimum_sql_power(sys)
    devs = [abs(an.squeezing_power_equivalence(sys, 1 - t, p, 0.69).deviation) for t in (1e-3, 1e-4, 1e-5, 1e-7)]
    assert all(b < a for a, b in zip(devs, devs[1:]))
    assert devs[-1] < 1e-5
