"""Frequency-domain solution of the linearised quantum Langevin equations.

Unknowns are ordered (X_a, P_a, x, p) and inputs (X_d, P_d, X_vac, P_vac, F_ex).
Each frequency is an independent dense 4x4 complex solve, so this path works
at any detuning and shares no algebra with :mod:`omnoise.closedform`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import PortSpectrum, ProbeConfig, SystemParams, boundary_phases, effective_coupling
from .errors import SingularSystem, ZeroTransduction

INPUTS = ("X_d", "P_d", "X_vac", "P_vac", "F_ex")


@dataclass(frozen=True)
class FrameRotation:
    """Rotation of an (X, P) quadrature pair by ``angle``."""

    angle: float

    @property
    def matrix(self):
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class TransferSet:
    """Transfer coefficients from each input to the outputs, in external frames.

    ``out[k, i, j]`` maps input ``j`` (drive quadratures in the drive field's
    frame) to output quadrature ``i`` (X_out, P_out in the output field's
    frame) at ``omega[k]``; ``x[k, j]`` maps input ``j`` to the mechanical
    position.
    """

    omega: np.ndarray
    out: np.ndarray
    x: np.ndarray
    phi_d: float
    phi_out: float
    epsilon: int

    def quadrature(self, angle):
        """Transfer row of the output quadrature cos(angle) X_out + sin(angle) P_out."""
        return math.cos(angle) * self.out[:, 0, :] + math.sin(angle) * self.out[:, 1, :]

    def readout_gain(self, angle):
        """Transduction from position to the measured quadrature (via the force column)."""
        return self.quadrature(angle)[:, 4] / self.x[:, 4]


def assemble_system(sys: SystemParams, probe: ProbeConfig, omega):
    """Stacked system matrices ``A`` (n, 4, 4) and input maps ``B`` (n, 4, 5), intracavity frame."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    n = omega.size
    g = effective_coupling(sys, probe)
    delta = probe.detuning
    iw = -1j * omega
    ka = iw + sys.kappa / 2.0

    a = np.zeros((n, 4, 4), dtype=complex)
    a[:, 0, 0] = ka
    a[:, 0, 1] = delta
    a[:, 1, 0] = -delta
    a[:, 1, 1] = ka
    a[:, 1, 2] = g
    a[:, 2, 2] = iw
    a[:, 2, 3] = -sys.omega_m
    a[:, 3, 0] = g
    a[:, 3, 2] = sys.omega_m
    a[:, 3, 3] = iw + sys.gamma_m

    sex, sc = math.sqrt(sys.kappa_ex), math.sqrt(sys.kappa_c)
    b = np.zeros((n, 4, 5), dtype=complex)
    b[:, 0, 0] = sex
    b[:, 0, 2] = sc
    b[:, 1, 1] = sex
    b[:, 1, 3] = sc
    b[:, 3, 4] = 1.0
    return a, b


def solve_transfer(sys: SystemParams, probe: ProbeConfig, omega_grid) -> TransferSet:
    omega = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    a, b = assemble_system(sys, probe, omega)
    # row equilibration; does not change the solution
    scale = np.max(np.abs(a), axis=2, keepdims=True)
    try:
        sol = np.linalg.solve(a / scale, b / scale)
    except np.linalg.LinAlgError:
        sol = None
    if sol is None or not np.all(np.isfinite(sol)):
        for k in range(omega.size):
            with np.errstate(all="ignore"):
                if np.linalg.cond(a[k]) > 1e15 or sol is None or not np.all(np.isfinite(sol[k])):
                    raise SingularSystem(float(omega[k]), a[k])

    # eps * s_out = sqrt(kappa_ex) a - s_d, quadrature by quadrature
    field = math.sqrt(sys.kappa_ex) * sol[:, 0:2, :]
    field[:, 0, 0] -= 1.0
    field[:, 1, 1] -= 1.0
    out_ic = field / sys.epsilon

    phi_d, phi_out = boundary_phases(sys, probe.detuning)
    drive_rot = np.eye(5)
    drive_rot[0:2, 0:2] = FrameRotation(phi_d).matrix
    out = FrameRotation(-phi_out).matrix @ out_ic @ drive_rot
    x = sol[:, 2, :] @ drive_rot
    return TransferSet(omega=omega, out=out, x=x, phi_d=phi_d, phi_out=phi_out, epsilon=sys.epsilon)


def quadratic_form(row, drive: PortSpectrum, loss: PortSpectrum, s_ext):
    """PSD of the observable ``row @ inputs`` for independent ports."""
    s_ext = np.broadcast_to(np.asarray(s_ext, dtype=float), row.shape[:1])
    total = np.zeros(row.shape[0])
    for (ix, ip), spec in (((0, 1), drive), ((2, 3), loss)):
        tx, tp = row[:, ix], row[:, ip]
        total += np.abs(tx) ** 2 * spec.sxx + np.abs(tp) ** 2 * spec.spp
        total += 2.0 * np.real(tx * np.conj(tp) * spec.sxp)
    return total + np.abs(row[:, 4]) ** 2 * s_ext


def psd_from_transfers(
    transfers: TransferSet,
    drive: PortSpectrum,
    loss: PortSpectrum,
    s_ext=0.0,
    quadrature_angle=math.pi / 2.0,
):
    """Output PSD of the quadrature at ``quadrature_angle`` (pi/2 = phase quadrature)."""
    return quadratic_form(transfers.quadrature(quadrature_angle), drive, loss, s_ext)


def position_psd(transfers: TransferSet, drive, loss, s_ext=0.0):
    return quadratic_form(transfers.x, drive, loss, s_ext)


def probe_spectra(probe: ProbeConfig):
    return probe.drive_spectrum(), probe.loss_spectrum()


@dataclass(frozen=True)
class SolverBudget:
    """Displacement-referred budget from the solver path (any detuning).

    ``s_total`` is the measured-quadrature PSD divided by the readout gain;
    off resonance it contains imprecision/back-action cross-correlations and
    is not the plain sum of the other columns.
    """

    omega: np.ndarray
    s_imp: np.ndarray
    s_qba: np.ndarray
    s_ext: np.ndarray
    s_total: np.ndarray
    sql: float


def solver_budget(sys, probe, omega, quadrature_angle=math.pi / 2.0) -> SolverBudget:
    t = solve_transfer(sys, probe, omega)
    drive, loss = probe_spectra(probe)
    s_ext_force = probe.force_psd(t.omega)
    gain = t.readout_gain(quadrature_angle)
    if np.any(gain == 0):
        raise ZeroTransduction("position does not reach the measured quadrature: imprecision is infinite")
    direct = t.quadrature(quadrature_angle) - gain[:, None] * t.x
    direct[:, 4] = 0.0
    optical_x = t.x.copy()
    optical_x[:, 4] = 0.0
    s_imp = quadratic_form(direct, drive, loss, 0.0) / np.abs(gain) ** 2
    s_qba = quadratic_form(optical_x, drive, loss, 0.0)
    s_ext = np.abs(t.x[:, 4]) ** 2 * s_ext_force
    s_total = psd_from_transfers(t, drive, loss, s_ext_force, quadrature_angle) / np.abs(gain) ** 2
    return SolverBudget(t.omega, s_imp, s_qba, s_ext, s_total, 2.0 / sys.gamma_m)
