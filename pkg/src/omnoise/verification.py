"""Oracle cross-checks between the solver and the closed forms, plus property checks.

``run_verification`` backs the ``verify`` CLI command.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import analysis as an
from . import closedform as cf
from . import solver as sv
from .errors import NoEquivalent, ZeroTransduction
from .model import (
    PortSpectrum,
    ProbeConfig,
    SystemParams,
    frequency_grid,
    hz,
    minimum_sql_power,
    sql_power,
    benchmark_system,
)

ORACLE_RTOL = 1e-9
ALGEBRA_RTOL = 1e-12


def max_rel_dev(a, b):
    a, b = np.asarray(a), np.asarray(b)
    den = np.maximum(np.abs(a), np.abs(b))
    diff = np.abs(a - b)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(den == 0, 0.0, diff / den)
    return float(np.max(rel))


@dataclass
class OracleReport:
    deviations: dict
    tolerance: float = ORACLE_RTOL

    @property
    def passed(self):
        return all(v is None or v < self.tolerance for v in self.deviations.values())

    @property
    def skipped(self):
        return [k for k, v in self.deviations.items() if v is None]


def verify_against_closedform(sys: SystemParams, probe: ProbeConfig, omega_grid,
                              imprecision_scale=1.0) -> OracleReport:
    """Largest relative solver/closed-form deviation for every compared quantity.

    ``imprecision_scale`` multiplies the closed-form imprecision before the
    comparison; it exists to prove the harness catches a wrong formula.
    """
    omega = np.asarray(omega_grid, dtype=float)
    t = sv.solve_transfer(sys, probe, omega)
    drive, loss = sv.probe_spectra(probe)
    co = cf.output_coefficients(sys, probe, omega)
    eps = sys.epsilon
    dev = {
        "c_d": max(max_rel_dev(eps * t.out[:, 0, 0], co.c_d), max_rel_dev(eps * t.out[:, 1, 1], co.c_d)),
        "c_vac": max(max_rel_dev(eps * t.out[:, 0, 2], co.c_vac), max_rel_dev(eps * t.out[:, 1, 3], co.c_vac)),
    }
    g_present = sys.g0 > 0 and probe.power > 0
    dev["c_x"] = max_rel_dev(eps * t.readout_gain(math.pi / 2), co.c_x) if g_present else None

    s_ext = probe.force_psd(omega)
    dev["output_phase_psd"] = max_rel_dev(
        sv.psd_from_transfers(t, drive, loss, s_ext),
        cf.output_phase_psd(sys, probe, omega, cf.displacement_psd(sys, probe, omega)),
    )
    optical_x = t.x.copy()
    optical_x[:, 4] = 0.0
    dev["qba_psd"] = max_rel_dev(sv.quadratic_form(optical_x, drive, loss, 0.0), cf.qba_psd(sys, probe, omega))
    try:
        s_imp = imprecision_scale * cf.imprecision_psd(sys, probe, omega)
    except ZeroTransduction:
        dev["imprecision_psd"] = None
    else:
        gain = t.readout_gain(math.pi / 2)
        direct = t.quadrature(math.pi / 2) - gain[:, None] * t.x
        direct[:, 4] = 0.0
        dev["imprecision_psd"] = max_rel_dev(sv.quadratic_form(direct, drive, loss, 0.0) / np.abs(gain) ** 2, s_imp)
    return OracleReport(dev)


def random_system(rng, eta=None, omega_m_bar=None):
    """Random physical system drawn over the ranges used by the oracle checks."""
    eta = rng.uniform(0.01, 0.999) if eta is None else eta
    omb = 10 ** rng.uniform(-2, 2) if omega_m_bar is None else omega_m_bar
    omega_m = hz(10 ** rng.uniform(5, 9))
    kappa = omega_m / omb
    return SystemParams(
        omega_m=omega_m,
        gamma_m=omega_m / 10 ** rng.uniform(1, 5),
        kappa_c=(1.0 - eta) * kappa,
        kappa_ex=eta * kappa,
        g0=hz(10 ** rng.uniform(1, 4)),
        omega_cav=hz(1.94e14),
        epsilon=int(rng.choice([1, -1])),
    )


def random_probe(rng, sys, r=None):
    r = rng.uniform(0, 2) if r is None else r
    return ProbeConfig(
        power=10 ** rng.uniform(-2, 2) * sql_power(sys),
        squeeze_r=r,
        loss_port_squeeze_r=rng.uniform(0, 1) if rng.random() < 0.5 else 0.0,
    )


# ------------------------------------------------------------------ suite


@dataclass
class Check:
    name: str
    status: str
    detail: str = ""
    metric: float | None = None
    tolerance: float | None = None

    def line(self):
        return f"{self.status.upper():4s} {self.name}: {self.detail}"


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    elapsed_s: float = 0.0

    @property
    def passed(self):
        return all(c.status != "fail" for c in self.checks)

    def as_dict(self):
        return {
            "passed": self.passed,
            "elapsed_s": self.elapsed_s,
            "checks": [c.__dict__ for c in self.checks],
        }


def _metric_check(name, metric, tol, what):
    status = "pass" if metric < tol else "fail"
    return Check(name, status, f"{what} max rel dev {metric:.3e} (tol {tol:g})", metric, tol)


def _oracle_config(sys, probe, scale):
    probe0 = replace(probe, detuning=0.0)
    rep = verify_against_closedform(sys, probe0, frequency_grid(sys.omega_m, 200), scale)
    worst = max(v for v in rep.deviations.values() if v is not None)
    failing = [k for k, v in rep.deviations.items() if v is not None and v >= rep.tolerance]
    detail = f"worst {worst:.3e} over 201 frequencies"
    if rep.skipped:
        detail += f"; skipped {', '.join(rep.skipped)}"
    if failing:
        detail += f"; failing {', '.join(failing)}"
    return Check("oracle_equivalence_config", "pass" if rep.passed else "fail", detail, worst, rep.tolerance)


def _oracle_random(draws, rng, scale):
    worst, failing = 0.0, set()
    for _ in range(draws):
        sys = random_system(rng)
        probe = random_probe(rng, sys)
        rep = verify_against_closedform(sys, probe, np.logspace(-3, 3, 200) * sys.omega_m, scale)
        for k, v in rep.deviations.items():
            if v is not None:
                worst = max(worst, v)
                if v >= rep.tolerance:
                    failing.add(k)
    detail = f"{draws} draws x 200 frequencies, worst {worst:.3e}"
    if failing:
        detail += f"; failing {', '.join(sorted(failing))}"
    return Check("oracle_equivalence_random", "fail" if failing else "pass", detail, worst, ORACLE_RTOL)


def _shot_noise(draws, rng):
    worst = 0.0
    for _ in range(draws):
        sys = replace(random_system(rng), g0=0.0)
        probe = ProbeConfig(power=1e-6, detuning=rng.uniform(-3, 3) * sys.kappa)
        t = sv.solve_transfer(sys, probe, np.logspace(-3, 3, 50) * sys.omega_m)
        for theta in rng.uniform(0, 2 * math.pi, 5):
            s = sv.psd_from_transfers(t, PortSpectrum(), PortSpectrum(), 0.0, theta)
            worst = max(worst, float(np.max(np.abs(s - 1.0))))
    return _metric_check("shot_noise_normalization", worst, ALGEBRA_RTOL, "vacuum output PSD vs 1,")


def _unitarity(rng):
    eta = rng.uniform(0, 1, 2000)
    ob = 10 ** rng.uniform(-4, 4, 2000)
    c_vac = 2 * np.sqrt(eta * (1 - eta)) / (1 - 2j * ob)
    c_d = (2 * eta - 1 + 2j * ob) / (1 - 2j * ob)
    worst = float(np.max(np.abs(np.abs(c_vac) ** 2 + np.abs(c_d) ** 2 - 1)))
    return _metric_check("passive_unitarity", worst, ALGEBRA_RTOL, "|c_vac|^2+|c_d|^2 vs 1,")


def _decomposition(sys, probe, scale):
    if sys.g0 == 0 or probe.power == 0:
        return Check("total_decomposition", "skip", "no transduction")
    probe0 = replace(probe, detuning=0.0, external_force_psd=0.0)
    total = cf.total_noise_at_sideband(sys, probe0)
    parts = scale * float(cf.imprecision_psd(sys, probe0, sys.omega_m)) + float(cf.qba_psd(sys, probe0, sys.omega_m))
    return _metric_check("total_decomposition", abs(total - parts) / total, ALGEBRA_RTOL, "total vs imp+qba,")


def _sql_identity(sys):
    lossless = replace(sys, kappa_c=0.0, kappa_ex=sys.kappa)
    probe = ProbeConfig(power=sql_power(lossless))
    total = cf.total_noise_at_sideband(lossless, probe)
    return _metric_check("sql_identity", abs(total - cf.sql(sys)) / cf.sql(sys), ALGEBRA_RTOL,
                         "coherent total at P_norm=1, eta=1 vs 2/Gamma_m,")


def _optimizer(draws, rng):
    worst = 0.0
    for _ in range(draws):
        sys = random_system(rng)
        probe = random_probe(rng, sys)
        if probe.is_coherent:
            continue
        opt = an.optimize_power(sys, probe)
        a, b = an._brackets(sys, probe)
        worst = max(worst, abs(opt.p_norm / math.sqrt(a / b) - 1))
    coh = an.optimize_power(benchmark_system(), ProbeConfig(power=1e-6))
    check = _metric_check("optimizer_bracket_ratio", worst, 1e-8, "golden vs analytic optimum,")
    if coh.p_norm != 1.0:
        check.status = "fail"
        check.detail += f"; coherent optimum {coh.p_norm!r} != 1"
    return check


def _pmin():
    p = minimum_sql_power(benchmark_system())
    dev = abs(p / 860e-9 - 1)
    status = "pass" if dev <= 0.02 else "fail"
    return Check("pmin_reproduction", status, f"P_min = {p * 1e9:.1f} nW (860 nW within 2%)", dev, 0.02)


def _equivalence(r_values):
    lossless = replace(benchmark_system(), kappa_c=0.0, kappa_ex=benchmark_system().kappa)
    worst = 0.0
    for r in r_values:
        for p_norm in (0.01, 0.3, 1.0, 2.0, 30.0):
            drive = PortSpectrum.squeezed(r)
            sq = cf.total_noise_normalized(p_norm, 1.0, lossless.omega_m_bar, lossless.gamma_m, drive, PortSpectrum())
            coh = cf.coherent_total_noise(math.exp(2 * r) * p_norm, 1.0, lossless.gamma_m)
            worst = max(worst, abs(sq - coh) / coh)
    check = _metric_check("squeezing_power_equivalence", worst, ALGEBRA_RTOL, "eta=1 squeezed vs boosted coherent,")
    base = benchmark_system()
    for r in r_values:
        try:
            eq = an.squeezing_power_equivalence(base, 0.2, 4 * minimum_sql_power(base), r)
        except NoEquivalent:
            continue
        if not eq.ratio > math.exp(2 * r):
            check.status = "fail"
            check.detail += f"; eta=0.2 ratio {eq.ratio:.4g} <= e^2r at r={r:g}"
    return check


def _critical_coupling(r):
    sys = benchmark_system(0.5)
    sys = replace(sys, omega_m=1e-4 * sys.kappa, gamma_m=1e-4 * sys.kappa / 9600)
    coh = float(cf.imprecision_psd(sys, ProbeConfig(power=1e-6), sys.omega_m))
    sq = float(cf.imprecision_psd(sys, ProbeConfig(power=1e-6, squeeze_r=r), sys.omega_m))
    return _metric_check("critical_coupling_no_benefit", abs(sq - coh) / coh, 1e-3,
                         f"imprecision change r=0 -> r={r:g},")


def _figure_trends(r):
    detail = []
    ok = True
    for fig_id, pick in (("fig1", np.min), ("fig2", np.max)):
        ds = an.figure_dataset(fig_id, squeeze_r=r if r > 0 else 1.0, eta_count=199)
        col = "s_imp" if fig_id == "fig1" else "s_qba"
        m = ds.markers()
        modes = ("coherent", "squeezed") if r > 0 else ("coherent",)
        for mode in modes:
            sel = np.char.startswith(m["series"].astype(str), mode)
            vals = m[col][sel][np.argsort(m["sideband_factor"][sel])]
            diffs = np.diff(vals)
            good = np.all(diffs < 0) if fig_id == "fig1" else np.all(diffs > 0)
            ok &= bool(good)
            detail.append(f"{fig_id}/{mode} {'monotone' if good else 'NOT monotone'}")
    return Check("figure_trends", "pass" if ok else "fail", ", ".join(detail))


def _dynamical_backaction():
    sys = SystemParams(hz(1e6), hz(100.0), hz(2e5), hz(2e5), hz(100.0), hz(1.94e14))

    def width(delta):
        w = sys.omega_m + np.linspace(-20, 20, 8001) * sys.gamma_m
        t = sv.solve_transfer(sys, ProbeConfig(power=1e-9, detuning=delta), w)
        y = np.abs(t.x[:, 4]) ** 2
        above = w[y >= y.max() / 2]
        return (above[-1] - above[0]) / sys.gamma_m

    red, blue = width(-sys.kappa / 2), width(sys.kappa / 2)
    bare = width(0.0)
    ok = red > bare > blue
    return Check("dynamical_backaction_sign", "pass" if ok else "fail",
                 f"FWHM/Gamma_m red {red:.3f}, resonant {bare:.3f}, blue {blue:.3f}")


def run_verification(sys: SystemParams | None = None, probe: ProbeConfig | None = None,
                     draws=100, seed=0, imprecision_scale=1.0) -> VerificationReport:
    start = time.perf_counter()
    sys = sys if sys is not None else benchmark_system()
    if probe is None:
        probe = ProbeConfig(power=minimum_sql_power(sys) if sys.g0 > 0 else 1e-6, squeeze_r=1.0)
    r = probe.squeeze_r
    rng = np.random.default_rng(seed)
    report = VerificationReport()
    add = report.checks.append
    add(_pmin())
    add(_sql_identity(sys))
    add(_oracle_config(sys, probe, imprecision_scale))
    add(_oracle_random(draws, rng, imprecision_scale))
    add(_shot_noise(max(draws // 5, 1), rng))
    add(_unitarity(rng))
    add(_decomposition(sys, probe, imprecision_scale))
    add(_optimizer(draws, rng))
    add(_dynamical_backaction())
    add(_figure_trends(r))
    if r > 0:
        add(_equivalence(sorted({0.5, 1.0, math.log(10) / 2, r})))
        add(_critical_coupling(r))
    else:
        add(Check("squeezing_power_equivalence", "skip", "config has no squeezing (r = 0)"))
        add(Check("critical_coupling_no_benefit", "skip", "config has no squeezing (r = 0)"))
    report.elapsed_s = time.perf_counter() - start
    return report
