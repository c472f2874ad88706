"""Physical parameters, unit conventions and derived scalars.

Conventions
-----------
* Every rate stored on the dataclasses is an angular rate in rad/s.  Config
  files quote ordinary frequencies in Hz; :func:`hz` does the 2*pi conversion.
* Displacements are dimensionless (units of the zero-point motion x_zpf) and
  forces are normalised to the zero-point momentum.
* Power spectral densities are per (rad/s) on the positive-frequency axis and
  are used exactly as the closed-form expressions state them.  No one-sided
  vs. two-sided factor is applied anywhere.  Vacuum noise has unit PSD.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np

from .errors import BadSign, DegenerateCavity, NonPositiveRate, ZeroCoupling

HBAR = 1.054571817e-34  # J s
C_LIGHT = 299792458.0  # m/s
TWO_PI = 2.0 * math.pi


def hz(f):
    """Ordinary frequency (Hz) to angular frequency (rad/s)."""
    return TWO_PI * f


def wavelength_to_omega(wavelength_m):
    return TWO_PI * C_LIGHT / wavelength_m


@dataclass(frozen=True)
class SystemParams:
    """Immutable optomechanical system description (angular rates in rad/s)."""

    omega_m: float
    gamma_m: float
    kappa_c: float
    kappa_ex: float
    g0: float
    omega_cav: float
    epsilon: int = 1
    mass: float | None = None

    @property
    def kappa(self):
        return self.kappa_c + self.kappa_ex

    @property
    def eta(self):
        return self.kappa_ex / self.kappa

    @property
    def q_m(self):
        return self.omega_m / self.gamma_m

    @property
    def q_c(self):
        return self.omega_cav / self.kappa_c if self.kappa_c > 0 else math.inf

    @property
    def omega_m_bar(self):
        """Sideband resolution Omega_m / kappa."""
        return self.omega_m / self.kappa

    @property
    def sideband_factor(self):
        """Intrinsic sideband factor Omega_m / kappa_c."""
        return self.omega_m / self.kappa_c if self.kappa_c > 0 else math.inf

    def with_eta(self, eta):
        """Same system with kappa_ex chosen so that kappa_ex/kappa == eta, kappa_c fixed."""
        if not 0.0 < eta < 1.0:
            raise ValueError(f"eta must lie in (0, 1), got {eta!r}")
        return replace(self, kappa_ex=eta * self.kappa_c / (1.0 - eta))

    def with_sideband_factor(self, factor):
        """Same system with kappa_c = omega_m / factor and the escape efficiency kept."""
        eta = self.eta
        kappa_c = self.omega_m / factor
        return replace(self, kappa_c=kappa_c, kappa_ex=eta * kappa_c / (1.0 - eta))

    def x_zpf(self):
        """Zero-point motion in metres; needs ``mass``."""
        if self.mass is None:
            raise ValueError("mass is required for SI displacement conversion")
        return math.sqrt(HBAR / (2.0 * self.omega_m * self.mass))


def validate_system(sys: SystemParams) -> SystemParams:
    """Check every parameter invariant and return ``sys`` unchanged.

    Raises :class:`NonPositiveRate` when any rate is out of range (the message
    lists all violations, including a bad ``epsilon``) and :class:`BadSign` when
    only ``epsilon`` is wrong.
    """
    rate_problems = []
    for name in ("omega_m", "gamma_m", "omega_cav"):
        value = getattr(sys, name)
        if not (value > 0 and math.isfinite(value)):
            rate_problems.append(f"{name} must be positive and finite, got {value!r}")
    for name in ("kappa_c", "kappa_ex", "g0"):
        value = getattr(sys, name)
        if not (value >= 0 and math.isfinite(value)):
            rate_problems.append(f"{name} must be non-negative and finite, got {value!r}")
    if not sys.kappa_c + sys.kappa_ex > 0:
        rate_problems.append("kappa_c + kappa_ex must be positive")
    if sys.mass is not None and not sys.mass > 0:
        rate_problems.append(f"mass must be positive, got {sys.mass!r}")
    sign_problems = []
    if sys.epsilon not in (1, -1):
        sign_problems.append(f"epsilon must be +1 or -1, got {sys.epsilon!r}")
    if rate_problems:
        raise NonPositiveRate(rate_problems + sign_problems)
    if sign_problems:
        raise BadSign(sign_problems)
    return sys


@dataclass(frozen=True)
class PortSpectrum:
    """Quadrature noise of one optical input port (vacuum has sxx = spp = 1)."""

    sxx: float = 1.0
    spp: float = 1.0
    sxp: complex = 0.0

    @classmethod
    def vacuum(cls):
        return cls()

    @classmethod
    def squeezed(cls, r, angle=0.0, antisqueeze_r=None):
        """Squeezed vacuum; ``angle = 0`` squeezes the phase quadrature.

        ``antisqueeze_r`` sets a separate anti-squeezing degree for an impure
        state; by default the state is pure (equal degrees).
        """
        if r < 0:
            raise ValueError(f"squeezing degree must be >= 0, got {r!r}")
        ra = r if antisqueeze_r is None else antisqueeze_r
        anti, sq = math.exp(2.0 * ra), math.exp(-2.0 * r)
        if angle == 0.0:
            return cls(anti, sq, 0.0)
        c, s = math.cos(angle), math.sin(angle)
        return cls(c * c * anti + s * s * sq, s * s * anti + c * c * sq, c * s * (anti - sq))

    def heisenberg_product(self):
        return self.sxx * self.spp - abs(self.sxp) ** 2

    def rotated(self, angle):
        """Spectrum of the same field seen in a frame rotated by ``angle``."""
        c, s = math.cos(angle), math.sin(angle)
        v = np.array([[self.sxx, self.sxp], [np.conj(self.sxp), self.spp]], dtype=complex)
        rot = np.array([[c, -s], [s, c]])
        w = rot @ v @ rot.T
        return PortSpectrum(float(w[0, 0].real), float(w[1, 1].real), complex(w[0, 1]))


@dataclass(frozen=True, eq=False)
class TabulatedPSD:
    """Force PSD tabulated on an angular-frequency grid, linearly interpolated."""

    omega: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if omega.ndim != 1 or omega.shape != values.shape or omega.size < 2:
            raise ValueError("tabulated PSD needs matching 1-d omega/values arrays")
        if np.any(np.diff(omega) <= 0):
            raise ValueError("tabulated PSD omega grid must be strictly increasing")
        if np.any(values < 0):
            raise ValueError("force PSD must be non-negative")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)

    def __call__(self, omega):
        return np.interp(omega, self.omega, self.values)


ForcePSD = Union[float, TabulatedPSD, Callable]


@dataclass(frozen=True)
class ProbeConfig:
    """Drive settings.  ``detuning`` is omega_d - omega_cav in rad/s."""

    power: float = 0.0
    detuning: float = 0.0
    squeeze_r: float = 0.0
    squeeze_angle: float = 0.0
    loss_port_squeeze_r: float = 0.0
    external_force_psd: ForcePSD = 0.0
    antisqueeze_r: float | None = None

    def __post_init__(self):
        problems = []
        if not self.power >= 0:
            problems.append(f"power must be >= 0, got {self.power!r}")
        if not self.squeeze_r >= 0:
            problems.append(f"squeeze_r must be >= 0, got {self.squeeze_r!r}")
        if not self.loss_port_squeeze_r >= 0:
            problems.append(f"loss_port_squeeze_r must be >= 0, got {self.loss_port_squeeze_r!r}")
        if self.antisqueeze_r is not None and not self.antisqueeze_r >= self.squeeze_r:
            problems.append("antisqueeze_r must be >= squeeze_r (Heisenberg bound)")
        if isinstance(self.external_force_psd, (int, float)) and not self.external_force_psd >= 0:
            problems.append("external_force_psd must be non-negative")
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def is_coherent(self):
        return self.squeeze_r == 0 and self.loss_port_squeeze_r == 0 and not self.antisqueeze_r

    def drive_spectrum(self):
        """Drive-port spectrum in the drive field's own quadrature frame."""
        if self.squeeze_r == 0 and not self.antisqueeze_r:
            return PortSpectrum.vacuum()
        return PortSpectrum.squeezed(self.squeeze_r, self.squeeze_angle, self.antisqueeze_r)

    def loss_spectrum(self):
        if self.loss_port_squeeze_r == 0:
            return PortSpectrum.vacuum()
        return PortSpectrum.squeezed(self.loss_port_squeeze_r)

    def force_psd(self, omega):
        s = self.external_force_psd
        omega = np.asarray(omega, dtype=float)
        if callable(s):
            out = np.asarray(s(omega), dtype=float)
            if np.any(out < 0):
                raise ValueError("external force PSD evaluated negative")
            return np.broadcast_to(out, omega.shape).astype(float)
        return np.full(omega.shape, float(s))


@dataclass(frozen=True)
class DerivedQuantities:
    kappa: float
    eta: float
    photon_flux_amp: float
    abar: complex
    n_cav: float
    g_eff: float
    omega_m_bar: float
    p_norm: float
    p_min: float
    p_sql: float
    phi_d: float
    phi_out: float

    def as_dict(self):
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["abar"] = {"re": self.abar.real, "im": self.abar.imag}
        return out


def photon_flux(sys, probe):
    """Drive photon flux s_d^2 = P / (hbar omega_d) in photons/s."""
    omega_d = sys.omega_cav + probe.detuning
    return probe.power / (HBAR * omega_d)


def intracavity_amplitude(sys, probe):
    s_d = math.sqrt(photon_flux(sys, probe))
    return math.sqrt(sys.kappa_ex) * s_d / complex(sys.kappa / 2.0, -probe.detuning)


def effective_coupling(sys, probe):
    """g = 2 g0 |a|."""
    return 2.0 * sys.g0 * abs(intracavity_amplitude(sys, probe))


def minimum_sql_power(sys: SystemParams) -> float:
    """Smallest drive power in W at which the SQL can be reached."""
    if sys.g0 == 0:
        raise ZeroCoupling("g0 = 0: the SQL cannot be reached at any finite power")
    return HBAR * sys.omega_cav * sys.gamma_m * sys.omega_m**2 / (16.0 * sys.g0**2)


def sql_power(sys: SystemParams) -> float:
    """Drive power at which imprecision and back-action balance on resonance."""
    omb = sys.omega_m_bar
    factor = sys.eta**-1.5 * (1.0 + 4.0 * omb**2) / (4.0 * omb**2)
    return factor * minimum_sql_power(sys)


def normalized_power(sys, g):
    """Normalised power 4 sqrt(eta) g^2 / ((1 + 4 omb^2) Gamma_m kappa)."""
    omb = sys.omega_m_bar
    return 4.0 * math.sqrt(sys.eta) * g**2 / ((1.0 + 4.0 * omb**2) * sys.gamma_m * sys.kappa)


def boundary_phases(sys: SystemParams, detuning: float):
    """Phases (phi_d, phi_out) of drive and output fields relative to the intracavity field."""
    phi_d = -math.atan(2.0 * detuning / sys.kappa)
    split = sys.kappa_c - sys.kappa_ex
    if split == 0.0:
        phi_out = 0.0 if detuning == 0 else -math.copysign(math.pi / 2.0, detuning)
    else:
        phi_out = -math.atan(2.0 * detuning / split)
    return phi_d, phi_out


def derive(sys: SystemParams, probe: ProbeConfig) -> DerivedQuantities:
    if sys.kappa_c + sys.kappa_ex == 0:
        raise DegenerateCavity("kappa = kappa_c + kappa_ex is zero")
    validate_system(sys)
    s2 = photon_flux(sys, probe)
    abar = intracavity_amplitude(sys, probe)
    g = 2.0 * sys.g0 * abs(abar)
    if sys.g0 > 0:
        p_min, p_sql = minimum_sql_power(sys), sql_power(sys)
    else:
        p_min = p_sql = math.inf
    phi_d, phi_out = boundary_phases(sys, probe.detuning)
    return DerivedQuantities(
        kappa=sys.kappa,
        eta=sys.eta,
        photon_flux_amp=math.sqrt(s2),
        abar=abar,
        n_cav=abs(abar) ** 2,
        g_eff=g,
        omega_m_bar=sys.omega_m_bar,
        p_norm=normalized_power(sys, g),
        p_min=p_min,
        p_sql=p_sql,
        phi_d=phi_d,
        phi_out=phi_out,
    )


def squeeze_db(r):
    """Noise reduction of the squeezed quadrature in dB, 20 r / ln 10."""
    if r < 0:
        raise ValueError("squeezing degree must be >= 0")
    return 20.0 * r / math.log(10.0)


def squeeze_r_from_db(db):
    return db * math.log(10.0) / 20.0


def frequency_grid(omega_m, count=200, decades=3.0):
    """Log-spaced grid over [omega_m / 10**decades, omega_m * 10**decades] containing omega_m."""
    grid = np.logspace(-decades, decades, count) * omega_m
    if not np.any(grid == omega_m):
        grid = np.sort(np.append(grid, omega_m))
    return grid


def benchmark_system(eta=0.8, **overrides) -> SystemParams:
    """Whispering-gallery resonator at 78 MHz, Q_m = 9600, g0 = 2pi 1.7 kHz, Omega_m/kappa_c = 22.

    The optical frequency is taken as Q_c * kappa_c with Q_c = 5.5e7 (about 1.54 um).
    """
    omega_m = hz(78e6)
    kappa_c = omega_m / 22.0
    params = dict(
        omega_m=omega_m,
        gamma_m=omega_m / 9600.0,
        kappa_c=kappa_c,
        kappa_ex=eta * kappa_c / (1.0 - eta),
        g0=hz(1.7e3),
        omega_cav=5.5e7 * kappa_c,
    )
    params.update(overrides)
    return SystemParams(**params)
