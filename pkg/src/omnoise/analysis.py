"""Optimisers, squeezing/power trade-offs, sweeps and figure datasets.

Everything here works at the mechanical sideband with resonant probing and
is built on :mod:`omnoise.closedform`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import bisect

from . import closedform as cf
from .errors import NoEquivalent, NotResonant
from .model import (
    ProbeConfig,
    SystemParams,
    derive,
    minimum_sql_power,
    sql_power,
    squeeze_db,
    squeeze_r_from_db,
    validate_system,
    benchmark_system,
)
from .optim import golden_section

ETA_MIN, ETA_MAX = 1e-3, 1.0 - 1e-3


# ---------------------------------------------------------------- optimisers


@dataclass(frozen=True)
class PowerOptimum:
    power: float
    p_norm: float
    s_min: float
    analytic: bool


@dataclass(frozen=True)
class CouplingOptimum:
    eta: float
    s_min: float
    boundary_attracted: bool


def _resonant(probe):
    if probe.detuning != 0:
        raise NotResonant("optimisers use the resonant closed forms; set detuning to 0")


def _brackets(sys, probe):
    drive, loss = probe.drive_spectrum(), probe.loss_spectrum()
    a = cf.imprecision_bracket(sys.eta, sys.omega_m_bar, drive, loss)
    b = cf.qba_bracket(sys.eta, drive, loss)
    return float(a), float(b)


def minimize_two_term(a, b):
    """Golden-section minimum of a/p + b*p over p > 0, searched in log p.

    Returns the minimiser p.  Differences are evaluated with expm1 so that the
    search resolves the minimum to ~1e-12 in log p.
    """

    def f(u):
        return a * math.exp(-u) + b * math.exp(u)

    def diff(u1, u2):
        return a * math.exp(-u2) * math.expm1(u2 - u1) + b * math.exp(u2) * math.expm1(u1 - u2)

    u, _ = golden_section(f, -50.0, 50.0, xtol=1e-12, diff=diff)
    return math.exp(u)


def optimize_power(sys: SystemParams, probe: ProbeConfig, eta=None) -> PowerOptimum:
    """Probe power minimising the total noise at the sideband for fixed coupling."""
    _resonant(probe)
    if eta is not None:
        sys = sys.with_eta(eta)
    validate_system(sys)
    p_sql = sql_power(sys)
    if probe.is_coherent:
        p_star = 1.0
        s_min = cf.coherent_total_noise(1.0, sys.eta, sys.gamma_m)
        return PowerOptimum(p_sql, p_star, s_min, analytic=True)
    a, b = _brackets(sys, probe)
    p_star = minimize_two_term(a, b)
    drive, loss = probe.drive_spectrum(), probe.loss_spectrum()
    s_min = float(cf.total_noise_normalized(p_star, sys.eta, sys.omega_m_bar, sys.gamma_m, drive, loss))
    return PowerOptimum(p_star * p_sql, p_star, s_min, analytic=False)


def _logit(eta):
    return math.log(eta / (1.0 - eta))


def _expit(u):
    return 1.0 / (1.0 + math.exp(-u))


def optimize_coupling(sys: SystemParams, probe: ProbeConfig, eta_range=(1e-4, 1.0 - 1e-4), count=401):
    """Escape efficiency minimising the total noise at fixed physical power.

    kappa_c is held fixed, so both g and the normalised power move with eta.
    """
    _resonant(probe)

    def noise(u):
        return cf.total_noise_at_sideband(sys.with_eta(_expit(u)), probe)

    us = np.linspace(_logit(eta_range[0]), _logit(eta_range[1]), count)
    values = np.array([noise(u) for u in us])
    k = int(np.argmin(values))
    lo, hi = us[max(k - 1, 0)], us[min(k + 1, count - 1)]
    u_star, s_min = golden_section(noise, lo, hi, xtol=1e-10)
    if values[k] < s_min:
        u_star, s_min = us[k], values[k]
    eta_star = _expit(u_star)
    return CouplingOptimum(eta_star, float(s_min), boundary_attracted=eta_star > 1.0 - 1e-3)


# ------------------------------------------------------ squeezing vs power


@dataclass(frozen=True)
class Equivalence:
    ratio: float
    deviation: float
    equivalent_power: float
    imprecision_dominated: bool


def squeezing_power_equivalence(sys: SystemParams, eta, power, r) -> Equivalence:
    """Coherent power giving the same total noise as squeezed probing at (power, r).

    Of the two coherent powers with equal noise, the one on the same side of
    the coherent optimum as the squeezed operating point is returned (lower
    branch when imprecision dominates).  ``deviation`` is ratio / e^{2r} - 1.
    """
    if eta is not None:
        sys = sys.with_eta(eta)
    validate_system(sys)
    squeezed = ProbeConfig(power=power, squeeze_r=r)
    target = cf.total_noise_at_sideband(sys, squeezed)
    p_sql = sql_power(sys)
    floor = cf.coherent_total_noise(1.0, sys.eta, sys.gamma_m)
    if target < floor:
        raise NoEquivalent(
            f"squeezed noise {target:.6g} is below the coherent minimum {floor:.6g}: "
            "no coherent power matches"
        )
    a, b = _brackets(sys, squeezed)
    p_norm = power / p_sql
    low_branch = a / p_norm >= b * p_norm

    def excess(log_p):
        return cf.total_noise_at_sideband(sys, ProbeConfig(power=math.exp(log_p))) - target

    ref = math.log(p_sql)
    if target == floor:
        log_p = ref
    elif low_branch:
        log_p = bisect(excess, ref - 60.0, ref, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    else:
        log_p = bisect(excess, ref, ref + 60.0, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)
    p_equiv = math.exp(log_p)
    ratio = p_equiv / power
    return Equivalence(ratio, ratio / math.exp(2.0 * r) - 1.0, p_equiv, low_branch)


# -------------------------------------------------------------------- sweeps

SWEEP_VARIABLES = ("eta", "power", "squeeze_r", "sideband_resolution")


@dataclass(frozen=True)
class GridSpec:
    min: float
    max: float
    count: int
    spacing: str = "linear"

    def values(self):
        if self.count < 1:
            raise ValueError("grid count must be >= 1")
        if self.spacing == "log":
            return np.logspace(math.log10(self.min), math.log10(self.max), self.count)
        if self.spacing == "linear":
            return np.linspace(self.min, self.max, self.count)
        raise ValueError(f"unknown grid spacing {self.spacing!r}")


@dataclass(frozen=True, eq=False)
class SweepSpec:
    variable: str
    grid: object
    system: SystemParams
    probe: ProbeConfig

    def values(self):
        vals = self.grid.values() if isinstance(self.grid, GridSpec) else np.asarray(self.grid, float)
        if vals.size == 0:
            raise ValueError("sweep grid is empty")
        if np.any(np.diff(vals) <= 0):
            raise ValueError("sweep grid must be strictly increasing")
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        if self.variable == "eta" and (vals[0] <= 0 or vals[-1] >= 1):
            raise ValueError("eta grid must lie inside (0, 1)")
        if self.variable in ("power", "sideband_resolution") and vals[0] <= 0:
            raise ValueError(f"{self.variable} grid must be positive")
        if self.variable == "squeeze_r" and vals[0] < 0:
            raise ValueError("squeeze_r grid must be non-negative")
        return vals


def _point(spec: SweepSpec, value):
    sys, probe = spec.system, spec.probe
    if spec.variable == "eta":
        sys = sys.with_eta(value)
    elif spec.variable == "power":
        probe = replace(probe, power=value)
    elif spec.variable == "squeeze_r":
        probe = replace(probe, squeeze_r=value)
    else:
        sys = sys.with_sideband_factor(value)
    return sys, probe


def sweep(spec: SweepSpec):
    """Sideband noise figures along one parameter; returns a dict of columns."""
    vals = spec.values()
    rows = {k: [] for k in ("value", "eta", "p_norm", "s_imp", "s_qba", "s_total", "db_over_sql")}
    for v in vals:
        sys, probe = _point(spec, float(v))
        d = derive(sys, probe)
        s_imp = float(cf.imprecision_psd(sys, probe, sys.omega_m))
        s_qba = float(cf.qba_psd(sys, probe, sys.omega_m))
        s_tot = cf.total_noise_at_sideband(sys, probe)
        for k, x in zip(rows, (v, sys.eta, d.p_norm, s_imp, s_qba, s_tot, float(cf.db_over_sql(s_tot, sys)))):
            rows[k].append(float(x))
    return {k: np.array(v) for k, v in rows.items()}


# ------------------------------------------------------------------- figures

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4")


@dataclass(eq=False)
class FigureDataset:
    id: str
    columns: dict
    axes: dict
    provenance: dict = field(default_factory=dict)

    def numeric_columns(self):
        return {k: v for k, v in self.columns.items() if np.asarray(v).dtype.kind in "fiu"}

    def series(self, name):
        """Rows of one series (marker rows excluded) as a dict of arrays."""
        mask = np.asarray(self.columns["series"]) == name
        if "marker" in self.columns:
            mask &= np.asarray(self.columns["marker"]) == 0
        return {k: np.asarray(v)[mask] for k, v in self.columns.items()}

    def markers(self):
        mask = np.asarray(self.columns["marker"]) == 1
        return {k: np.asarray(v)[mask] for k, v in self.columns.items()}


def _eta_grid(opts):
    return np.linspace(opts["eta_min"], opts["eta_max"], opts["eta_count"])


def _sideband_trace(sys0, probe, factor, etas, quantity):
    base = sys0.with_sideband_factor(factor)

    def value(eta):
        sys = base.with_eta(eta)
        fn = cf.imprecision_psd if quantity == "s_imp" else cf.qba_psd
        return float(fn(sys, probe, sys.omega_m))

    return value, np.array([value(e) for e in etas])


def _fig12(fig_id, sys0, opts):
    quantity = "s_imp" if fig_id == "fig1" else "s_qba"
    sign = 1.0 if fig_id == "fig1" else -1.0
    etas = _eta_grid(opts)
    power = opts["power_w"] if opts["power_w"] is not None else minimum_sql_power(sys0)
    cols = {k: [] for k in ("series", "sideband_factor", "squeeze_r", "squeeze_db", "eta", quantity, "marker")}

    def add(series, factor, r, eta, val, marker):
        for k, x in zip(cols, (series, factor, r, squeeze_db(r), eta, val, marker)):
            cols[k].append(x)

    for factor in opts["sideband_factors"]:
        for mode, r in (("coherent", 0.0), ("squeezed", opts["squeeze_r"])):
            probe = ProbeConfig(power=power, squeeze_r=r)
            value, trace = _sideband_trace(sys0, probe, factor, etas, quantity)
            name = f"{mode}_sbf{factor:g}"
            for e, v in zip(etas, trace):
                add(name, factor, r, float(e), float(v), 0)
            k = int(np.argmin(sign * trace))
            lo, hi = etas[max(k - 1, 0)], etas[min(k + 1, etas.size - 1)]
            e_star, v_star = golden_section(lambda e: sign * value(e), lo, hi, xtol=1e-12)
            v_star = sign * v_star
            if sign * trace[k] < sign * v_star:
                e_star, v_star = float(etas[k]), float(trace[k])
            add(name, factor, r, float(e_star), float(v_star), 1)
    axes = {
        "eta": "escape efficiency kappa_ex/kappa",
        quantity: "displacement PSD at Omega_m, x_zpf^2 per rad/s",
        "sideband_factor": "Omega_m / kappa_c",
        "marker": "1 = extremum of the series (minimum for fig1, maximum for fig2)",
    }
    return cols, axes


def _contour_flags(db, level):
    """Cells whose value and a right/upper neighbour straddle ``level``."""
    above = db >= level
    flag = np.zeros(db.shape, dtype=int)
    flag[:-1, :] |= above[:-1, :] != above[1:, :]
    flag[:, :-1] |= above[:, :-1] != above[:, 1:]
    return flag


def _fig3(sys0, opts):
    sys = sys0.with_sideband_factor(opts["sideband_factor"]).with_eta(opts["eta"])
    p_min = minimum_sql_power(sys)
    rel_db = np.linspace(opts["power_rel_db_min"], opts["power_rel_db_max"], opts["power_count"])
    sq_db = np.linspace(opts["squeeze_db_min"], opts["squeeze_db_max"], opts["squeeze_count"])
    total = np.empty((rel_db.size, sq_db.size))
    for i, pdb in enumerate(rel_db):
        for j, sdb in enumerate(sq_db):
            r = squeeze_r_from_db(sdb)
            anti = squeeze_r_from_db(sdb + opts["antisqueeze_excess_db"]) if r > 0 else None
            probe = ProbeConfig(power=p_min * 10 ** (pdb / 10), squeeze_r=r, antisqueeze_r=anti)
            total[i, j] = cf.total_noise_at_sideband(sys, probe)
    db = cf.db_over_sql(total, sys)
    pi, sj = np.meshgrid(np.arange(rel_db.size), np.arange(sq_db.size), indexing="ij")
    cols = {
        "power_w": p_min * 10 ** (rel_db[pi] / 10),
        "power_rel_pmin_db": rel_db[pi],
        "squeeze_db": sq_db[sj],
        "squeeze_r": np.array([squeeze_r_from_db(s) for s in sq_db])[sj],
        "s_total": total,
        "db_over_sql": db,
    }
    for level in opts["contour_levels_db"]:
        cols[f"contour_{level:g}db"] = _contour_flags(db, level)
    cols = {k: np.asarray(v).ravel() for k, v in cols.items()}
    axes = {
        "power_rel_pmin_db": "probe power over P_min, dB",
        "squeeze_db": "phase-quadrature noise reduction, dB",
        "db_over_sql": "total noise over the SQL, dB",
        "contour_*db": "1 where the cell straddles that dB-over-SQL level",
    }
    return cols, axes


def _fig4(sys0, opts):
    base = sys0.with_sideband_factor(opts["sideband_factor"])
    p_min = minimum_sql_power(base)
    etas = _eta_grid(opts)
    r = squeeze_r_from_db(opts["squeeze_db"])
    cols = {k: [] for k in ("series", "power_rel_pmin_db", "squeeze_db", "eta", "s_total", "db_over_sql")}
    for pdb in opts["power_rel_db"]:
        for mode, rr in (("coherent", 0.0), ("squeezed", r)):
            probe = ProbeConfig(power=p_min * 10 ** (pdb / 10), squeeze_r=rr)
            for e in etas:
                sys = base.with_eta(float(e))
                s = cf.total_noise_at_sideband(sys, probe)
                for k, x in zip(cols, (f"{mode}_{pdb:+g}db", float(pdb), squeeze_db(rr), float(e), s,
                                       float(cf.db_over_sql(s, sys)))):
                    cols[k].append(x)
    for e in etas:
        # power_rel_pmin_db is meaningless on the SQL line; left at 0
        for k, x in zip(cols, ("sql", 0.0, 0.0, float(e), cf.sql(base), 0.0)):
            cols[k].append(x)
    axes = {
        "eta": "escape efficiency kappa_ex/kappa",
        "s_total": "total noise at Omega_m, x_zpf^2 per rad/s",
        "db_over_sql": "total noise over the SQL, dB",
    }
    return cols, axes


FIGURE_DEFAULTS = {
    "fig1": dict(sideband_factors=[0.1, 1.0, 10.0, 100.0], squeeze_r=1.0, eta_min=ETA_MIN,
                 eta_max=ETA_MAX, eta_count=999, power_w=None),
    "fig3": dict(eta=0.8, sideband_factor=22.0, power_rel_db_min=-30.0, power_rel_db_max=10.0,
                 power_count=81, squeeze_db_min=0.0, squeeze_db_max=20.0, squeeze_count=81,
                 antisqueeze_excess_db=0.0, contour_levels_db=[3.0, 10.0, 20.0]),
    "fig4": dict(sideband_factor=22.0, power_rel_db=[-6.0, 0.0, 6.0], squeeze_db=6.0,
                 eta_min=ETA_MIN, eta_max=ETA_MAX, eta_count=999),
}
FIGURE_DEFAULTS["fig2"] = dict(FIGURE_DEFAULTS["fig1"])


def figure_dataset(fig_id, sys_template: SystemParams | None = None, **options) -> FigureDataset:
    """Dataset behind one of the four figures; ``options`` override FIGURE_DEFAULTS."""
    if fig_id not in FIGURE_IDS:
        raise ValueError(f"unknown figure id {fig_id!r}; expected one of {FIGURE_IDS}")
    sys0 = validate_system(sys_template if sys_template is not None else benchmark_system())
    unknown = set(options) - set(FIGURE_DEFAULTS[fig_id])
    if unknown:
        raise ValueError(f"unknown options for {fig_id}: {sorted(unknown)}")
    opts = {**FIGURE_DEFAULTS[fig_id], **options}
    if fig_id in ("fig1", "fig2"):
        cols, axes = _fig12(fig_id, sys0, opts)
    elif fig_id == "fig3":
        cols, axes = _fig3(sys0, opts)
    else:
        cols, axes = _fig4(sys0, opts)
    cols = {k: np.asarray(v) for k, v in cols.items()}
    provenance = {"id": fig_id, "system": asdict(sys0), "options": opts}
    return FigureDataset(fig_id, cols, axes, provenance)


def rerun(provenance) -> FigureDataset:
    """Rebuild a dataset from its provenance echo."""
    return figure_dataset(provenance["id"], SystemParams(**provenance["system"]), **provenance["options"])
