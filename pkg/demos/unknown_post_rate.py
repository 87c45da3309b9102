"""
Generalized CUSUM when the post-change rate is unknown
======================================================

Only a range for the new firing probability is assumed.  Both detectors
are calibrated to the same false-alarm rate before comparing delays.
"""

import numpy as np

from neuroqcd import evaluation, models, simulate
from neuroqcd.detectors import Cusum, Gcusum, GlrConfig, gcusum_statistic
from neuroqcd.models import ParameterSet

eps = models.BERNOULLI_EPS
f0, f1 = models.bernoulli(0.05), models.bernoulli(0.25)

known = Cusum(f0, f1)
glr = Gcusum(GlrConfig("bernoulli", ParameterSet(eps, 0.05), ParameterSet(0.1, 1 - eps), window=200))

cal = {
    "cusum": evaluation.calibrate_threshold(known, f0, 300, runs=100, seed=0, bracket=(0.5, 10)),
    "gcusum": evaluation.calibrate_threshold(glr, f0, 300, runs=100, seed=0, bracket=(2, 12)),
}
for name, res in cal.items():
    print(f"{name:7s} A = {res.threshold:.3f}  ARL ~ {res.estimated_arl:.0f} +- {res.arl_std_error:.0f}")

spec = simulate.ChangeSpec(f0, f1, change_point=100, length=1000)
for name, det in (("cusum", known), ("gcusum", glr)):
    d = evaluation.estimate_delay(det, spec, cal[name].threshold, runs=100, seed=1)
    print(f"{name:7s} median delay {d.median_delay:.0f} bins, {d.missed} early alarms")

# the statistic can go negative: there is no 'no change yet' candidate
print("G_4 on four silent bins:", gcusum_statistic(glr.config, np.zeros(4)))
