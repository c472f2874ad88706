import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from omnoise import errors
from omnoise.model import (
    HBAR,
    PortSpectrum,
    ProbeConfig,
    SystemParams,
    TabulatedPSD,
    benchmark_system,
    boundary_phases,
    derive,
    effective_coupling,
    frequency_grid,
    hz,
    minimum_sql_power,
    normalized_power,
    sql_power,
    squeeze_db,
    squeeze_r_from_db,
    validate_system,
)

from conftest import rel, systems


def simple_system(**kw):
    base = dict(omega_m=hz(1e6), gamma_m=hz(100.0), kappa_c=hz(1e5), kappa_ex=hz(1e5),
                g0=hz(1e3), omega_cav=1.935e14)
    base.update(kw)
    return SystemParams(**base)


def test_hz_is_angular():
    assert hz(1.0) == 2 * math.pi


def test_pmin_hand_value():
    # Gamma_m Omega_m^2 / g0^2 leaves a single 2pi; omega_cav is already angular
    sys = simple_system()
    expected = HBAR * 1.935e14 * 2 * math.pi * 1e8 / 16.0
    assert rel(minimum_sql_power(sys), expected) < 1e-14
    assert minimum_sql_power(sys) == pytest.approx(8.01340e-13, rel=1e-5)


def test_benchmark_pmin_near_860nW():
    assert minimum_sql_power(benchmark_system()) == pytest.approx(867.891e-9, rel=1e-5)


def test_sql_power_factor():
    sys = simple_system()
    omb = sys.omega_m_bar
    factor = sys.eta**-1.5 * (1 + 4 * omb**2) / (4 * omb**2)
    assert rel(sql_power(sys), factor * minimum_sql_power(sys)) < 1e-15


def test_sql_power_gives_unit_normalised_power():
    sys = simple_system()
    g = effective_coupling(sys, ProbeConfig(power=sql_power(sys)))
    assert normalized_power(sys, g) == pytest.approx(1.0, rel=1e-12)


@given(systems(), st.floats(-3, 3))
def test_normalised_power_linear_in_power(sys, log_p):
    p = 10**log_p * sql_power(sys)
    d = derive(sys, ProbeConfig(power=p))
    assert d.p_norm == pytest.approx(10**log_p, rel=1e-9)


def test_derived_scalars():
    sys = simple_system()
    d = derive(sys, ProbeConfig(power=1e-6))
    assert d.kappa == pytest.approx(hz(2e5))
    assert d.eta == 0.5
    assert d.n_cav == pytest.approx(abs(d.abar) ** 2)
    assert d.g_eff == pytest.approx(2 * sys.g0 * math.sqrt(d.n_cav))
    assert d.phi_d == 0 and d.phi_out == 0


def test_phases_critical_coupling_quarter_turn():
    sys = simple_system()
    assert boundary_phases(sys, 1.0) == (pytest.approx(-math.atan(2 / sys.kappa)), -math.pi / 2)
    assert boundary_phases(sys, -1.0)[1] == math.pi / 2


def test_validation_lists_every_violation():
    bad = simple_system(omega_m=-1.0, gamma_m=0.0, g0=-1.0, epsilon=2)
    with pytest.raises(errors.NonPositiveRate) as info:
        validate_system(bad)
    text = str(info.value)
    for name in ("omega_m", "gamma_m", "g0", "epsilon"):
        assert name in text


def test_bad_sign_alone():
    with pytest.raises(errors.BadSign):
        validate_system(simple_system(epsilon=0))


def test_degenerate_cavity():
    with pytest.raises(errors.DegenerateCavity):
        derive(simple_system(kappa_c=0.0, kappa_ex=0.0), ProbeConfig())


def test_zero_coupling():
    sys = simple_system(g0=0.0)
    with pytest.raises(errors.ZeroCoupling):
        minimum_sql_power(sys)
    assert derive(sys, ProbeConfig(power=1e-3)).p_min == math.inf


def test_squeeze_db():
    assert squeeze_db(1.0) == pytest.approx(8.685889638, rel=1e-9)
    assert squeeze_db(math.log(10) / 2) == pytest.approx(10.0)
    assert squeeze_r_from_db(squeeze_db(0.37)) == pytest.approx(0.37)
    with pytest.raises(ValueError):
        squeeze_db(-0.1)


@given(st.floats(0, 3), st.floats(0, 2 * math.pi))
def test_squeezed_state_obeys_heisenberg(r, angle):
    s = PortSpectrum.squeezed(r, angle)
    assert s.heisenberg_product() == pytest.approx(1.0, rel=1e-9)
    assert s.sxx > 0 and s.spp > 0


def test_squeezed_phase_quadrature_by_default():
    s = PortSpectrum.squeezed(1.0)
    assert s.spp == pytest.approx(math.exp(-2)) and s.sxx == pytest.approx(math.exp(2))
    assert s.sxp == pytest.approx(0.0, abs=1e-15)


def test_antisqueezing_excess():
    s = PortSpectrum.squeezed(1.0, antisqueeze_r=1.5)
    assert s.spp == pytest.approx(math.exp(-2)) and s.sxx == pytest.approx(math.exp(3))
    with pytest.raises(ValueError):
        ProbeConfig(squeeze_r=1.0, antisqueeze_r=0.5)


def test_probe_rejects_negative():
    for kw in ({"power": -1.0}, {"squeeze_r": -0.1}, {"external_force_psd": -1.0}):
        with pytest.raises(ValueError):
            ProbeConfig(**kw)


def test_tabulated_force_psd():
    t = TabulatedPSD([1.0, 2.0, 3.0], [0.0, 2.0, 4.0])
    probe = ProbeConfig(external_force_psd=t)
    assert np.allclose(probe.force_psd(np.array([1.5, 2.5])), [1.0, 3.0])


def test_with_eta_keeps_intrinsic_loss():
    sys = benchmark_system(0.8)
    s2 = sys.with_eta(0.3)
    assert s2.kappa_c == sys.kappa_c and s2.eta == pytest.approx(0.3)
    s3 = sys.with_sideband_factor(5.0)
    assert s3.eta == pytest.approx(0.8) and s3.sideband_factor == pytest.approx(5.0)


def test_frequency_grid_contains_resonance():
    w = frequency_grid(hz(1e6), count=200)
    assert hz(1e6) in w and np.all(np.diff(w) > 0)


def test_x_zpf_needs_mass():
    with pytest.raises(ValueError):
        simple_system().x_zpf()
    sys = replace(simple_system(), mass=1e-12)
    assert sys.x_zpf() == pytest.approx(math.sqrt(HBAR / (2 * hz(1e6) * 1e-12)))


@given(systems(max_eta=0.49), st.floats(-5, 5))
def test_phases_odd_in_detuning(sys, d):
    delta = d * sys.kappa
    a, b = boundary_phases(sys, delta), boundary_phases(sys, -delta)
    assert a[0] == -b[0] and a[1] == -b[1]


@given(systems(), st.floats(0, 3), st.floats(0.01, 1))
def test_intracavity_photons_fall_with_detuning(sys, d, step):
    # photons per unit drive flux; the flux itself carries omega_cav + detuning
    def per_flux(x):
        dq = derive(sys, ProbeConfig(power=1e-6, detuning=x * sys.kappa))
        return dq.n_cav / dq.photon_flux_amp**2

    n = [per_flux(x) for x in (d, d + step, -(d + step))]
    assert n[1] < n[0] and n[2] == pytest.approx(n[1], rel=1e-12)
