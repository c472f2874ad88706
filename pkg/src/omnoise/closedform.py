"""Closed-form noise spectra for resonant probing (zero detuning).

All functions broadcast over ``omega`` (rad/s).  Displacement PSDs are in
x_zpf^2 per rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotResonant, ZeroTransduction
from .model import (
    PortSpectrum,
    ProbeConfig,
    SystemParams,
    effective_coupling,
    normalized_power,
    photon_flux,
)


def chi_c(sys: SystemParams, detuning, omega):
    """Optical susceptibility 1 / ((kappa/2 - i Omega)^2 + Delta^2)."""
    omega = np.asarray(omega, dtype=float)
    return 1.0 / ((sys.kappa / 2.0 - 1j * omega) ** 2 + detuning**2)


def chi_m(sys: SystemParams, omega):
    """Mechanical susceptibility 1 / (Omega_m^2 - Omega^2 - i Omega Gamma_m)."""
    omega = np.asarray(omega, dtype=float)
    # factored difference keeps full relative precision near resonance
    return 1.0 / ((sys.omega_m - omega) * (sys.omega_m + omega) - 1j * omega * sys.gamma_m)


@dataclass(frozen=True)
class OutputCoefficients:
    c_vac: np.ndarray
    c_d: np.ndarray
    c_x: np.ndarray


@dataclass(frozen=True)
class NoiseBudget:
    omega: np.ndarray
    s_imp: np.ndarray
    s_qba: np.ndarray
    s_ext: np.ndarray
    s_total: np.ndarray
    s_total_at_sideband: float
    sql: float


def _require_resonant(probe):
    if probe.detuning != 0:
        raise NotResonant(
            f"closed forms hold only at zero detuning (got {probe.detuning!r} rad/s); use the solver"
        )


def _spectra(probe):
    drive, loss = probe.drive_spectrum(), probe.loss_spectrum()
    if drive.sxp != 0 or loss.sxp != 0:
        raise ValueError("closed forms assume uncorrelated quadratures (squeeze_angle of 0 or pi/2)")
    return drive, loss


def loss_weight(eta, omega_bar):
    """Fraction 4 eta (1 - eta) / (1 + 4 omega_bar^2) of loss-port noise in the output."""
    return 4.0 * eta * (1.0 - eta) / (1.0 + 4.0 * np.asarray(omega_bar) ** 2)


def imprecision_bracket(eta, omega_bar, drive: PortSpectrum, loss: PortSpectrum):
    return drive.spp + loss_weight(eta, omega_bar) * (loss.spp - drive.spp)


def qba_bracket(eta, drive: PortSpectrum, loss: PortSpectrum):
    return drive.sxx + (1.0 - eta) * (loss.sxx - drive.sxx)


def output_coefficients(sys: SystemParams, probe: ProbeConfig, omega) -> OutputCoefficients:
    """Coefficients of the loss port, the drive and the position in epsilon * (X_out, P_out)."""
    _require_resonant(probe)
    eta = sys.eta
    ob = np.asarray(omega, dtype=float) / sys.kappa
    den = 1.0 - 2j * ob
    g = effective_coupling(sys, probe)
    return OutputCoefficients(
        c_vac=2.0 * math.sqrt(eta * (1.0 - eta)) / den,
        c_d=(2.0 * eta - 1.0 + 2j * ob) / den,
        c_x=-2.0 * g * math.sqrt(eta / sys.kappa) / den,
    )


def transduction_gain(sys, probe, omega):
    """|c_x|^2 = (4 g^2 eta / kappa) / (1 + 4 omega_bar^2)."""
    g = effective_coupling(sys, probe)
    ob = np.asarray(omega, dtype=float) / sys.kappa
    return 4.0 * g**2 * sys.eta / sys.kappa / (1.0 + 4.0 * ob**2)


def output_phase_psd(sys, probe, omega, s_x):
    """Phase-quadrature output PSD for a given displacement PSD ``s_x``."""
    _require_resonant(probe)
    drive, loss = _spectra(probe)
    w = loss_weight(sys.eta, np.asarray(omega, dtype=float) / sys.kappa)
    return (1.0 - w) * drive.spp + w * loss.spp + transduction_gain(sys, probe, omega) * s_x


def imprecision_psd(sys, probe, omega):
    _require_resonant(probe)
    drive, loss = _spectra(probe)
    s2 = photon_flux(sys, probe)
    if sys.g0 == 0 or s2 == 0:
        raise ZeroTransduction(
            "no optomechanical transduction (g0 = 0 or zero probe power): imprecision is infinite"
        )
    eta, kappa = sys.eta, sys.kappa
    ob = np.asarray(omega, dtype=float) / kappa
    pre = (1.0 + 4.0 * ob**2) * kappa**2 / (64.0 * eta**2 * sys.g0**2 * s2)
    return pre * imprecision_bracket(eta, ob, drive, loss)


def qba_force_psd(sys, probe, omega):
    """Back-action force PSD (zero-point momentum units) acting on the oscillator."""
    _require_resonant(probe)
    drive, loss = _spectra(probe)
    g = effective_coupling(sys, probe)
    ob = np.asarray(omega, dtype=float) / sys.kappa
    return (4.0 * g**2 / sys.kappa) / (1.0 + 4.0 * ob**2) * qba_bracket(sys.eta, drive, loss)


def qba_psd(sys, probe, omega):
    """Displacement PSD driven by back-action, |chi_m|^2 Omega_m^2 (4 g^2/kappa) [...] / (1 + 4 ob^2)."""
    return sys.omega_m**2 * np.abs(chi_m(sys, omega)) ** 2 * qba_force_psd(sys, probe, omega)


def external_psd(sys, probe, omega):
    return sys.omega_m**2 * np.abs(chi_m(sys, omega)) ** 2 * probe.force_psd(omega)


def displacement_psd(sys, probe, omega):
    force = probe.force_psd(omega) + qba_force_psd(sys, probe, omega)
    return sys.omega_m**2 * np.abs(chi_m(sys, omega)) ** 2 * force


def sql(sys: SystemParams) -> float:
    return 2.0 / sys.gamma_m


def total_noise_normalized(p_norm, eta, omega_m_bar, gamma_m, drive, loss):
    """Total noise at the mechanical sideband as a function of the normalised power."""
    a = imprecision_bracket(eta, omega_m_bar, drive, loss)
    b = qba_bracket(eta, drive, loss)
    return (a / p_norm + b * p_norm) / (math.sqrt(eta) * gamma_m)


def total_noise_at_sideband(sys: SystemParams, probe: ProbeConfig) -> float:
    """Imprecision plus back-action noise at Omega = Omega_m, via the normalised power.

    External forces are not included; add ``external_psd`` at omega_m for them.
    """
    _require_resonant(probe)
    drive, loss = _spectra(probe)
    if sys.g0 == 0 or probe.power == 0:
        raise ZeroTransduction("no optomechanical transduction: total noise is infinite")
    p = normalized_power(sys, effective_coupling(sys, probe))
    return float(total_noise_normalized(p, sys.eta, sys.omega_m_bar, sys.gamma_m, drive, loss))


def coherent_total_noise(p_norm, eta, gamma_m):
    return (p_norm + 1.0 / p_norm) / (gamma_m * math.sqrt(eta))


def noise_budget(sys: SystemParams, probe: ProbeConfig, omega) -> NoiseBudget:
    omega = np.asarray(omega, dtype=float)
    s_imp = imprecision_psd(sys, probe, omega)
    s_qba = qba_psd(sys, probe, omega)
    s_ext = external_psd(sys, probe, omega)
    at_sb = total_noise_at_sideband(sys, probe) + float(external_psd(sys, probe, sys.omega_m))
    return NoiseBudget(
        omega=omega,
        s_imp=s_imp,
        s_qba=s_qba,
        s_ext=s_ext,
        s_total=s_imp + s_qba + s_ext,
        s_total_at_sideband=at_sb,
        sql=sql(sys),
    )


def db_over_sql(s_total, sys):
    return 10.0 * np.log10(np.asarray(s_total) / sql(sys))
