"""How much coherent power a given amount of squeezing is worth, versus escape efficiency."""

import math

import numpy as np

from omnoise import analysis as an
from omnoise import solver as sv
from omnoise.errors import NoEquivalent
from omnoise.model import ProbeConfig, benchmark_system, minimum_sql_power, squeeze_r_from_db

sys = benchmark_system()
p_min = minimum_sql_power(sys)
print(f"{'eta':>6} {'P/P_min':>8} {'dB sq':>6} {'ratio':>9} {'e^2r':>7} {'branch':>8}")
for eta in (0.2, 0.5, 0.8, 0.95, 0.999):
    for scale in (0.25, 1.0, 4.0):
        for db in (3.0, 6.0, 10.0):
            r = squeeze_r_from_db(db)
            try:
                eq = an.squeezing_power_equivalence(sys, eta, scale * p_min, r)
                text = f"{eq.ratio:9.3f} {math.exp(2 * r):7.3f} {'imp' if eq.imprecision_dominated else 'qba':>8}"
            except NoEquivalent:
                text = f"{'none':>9} {math.exp(2 * r):7.3f} {'-':>8}"
            print(f"{eta:6.3f} {scale:8.2f} {db:6.1f} {text}")

# detuned probing can only be studied with the solver
w = np.linspace(0.999, 1.001, 5) * sys.omega_m
for det in (-0.5, 0.0, 0.5):
    b = sv.solver_budget(sys, ProbeConfig(power=p_min, detuning=det * sys.kappa), w)
    print(f"detuning {det:+.1f} kappa: total/SQL at Omega_m = {b.s_total[2] / b.sql:.4f}")
