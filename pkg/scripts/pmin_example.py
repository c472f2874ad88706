"""Minimum SQL power and optimum operating points for the 78 MHz benchmark resonator."""

import math

from omnoise import analysis as an
from omnoise import closedform as cf
from omnoise.model import ProbeConfig, benchmark_system, derive, minimum_sql_power, squeeze_db

sys = benchmark_system(eta=0.8)
p_min = minimum_sql_power(sys)
d = derive(sys, ProbeConfig(power=p_min))
print(f"P_min           = {p_min * 1e9:.1f} nW")
print(f"P_sql (eta=0.8) = {d.p_sql * 1e9:.1f} nW")
print(f"Omega_m/kappa   = {sys.omega_m_bar:.3f}")
print(f"n_cav at P_min  = {d.n_cav:.4g},  g = 2pi x {d.g_eff / 2 / math.pi / 1e6:.3f} MHz")

for r in (0.0, 0.5, 1.0):
    probe = ProbeConfig(power=p_min, squeeze_r=r)
    s = cf.total_noise_at_sideband(sys, probe)
    opt = an.optimize_power(sys, probe)
    print(f"r = {r:.1f} ({squeeze_db(r):4.1f} dB): at P_min {float(cf.db_over_sql(s, sys)):+.3f} dB over SQL; "
          f"optimum {opt.power * 1e9:7.1f} nW -> {float(cf.db_over_sql(opt.s_min, sys)):+.3f} dB")

opt = an.optimize_coupling(sys, ProbeConfig(power=p_min))
print(f"best escape efficiency at P_min, coherent: eta* = {opt.eta:.4f}")
