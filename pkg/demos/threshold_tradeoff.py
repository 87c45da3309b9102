"""
Choosing a threshold
====================

Raising the threshold buys a longer run to false alarm at the price of a
longer detection delay.  Both are estimated by simulation.
"""

from neuroqcd import evaluation, models, simulate
from neuroqcd.detectors import Cusum

f0, f1 = models.bernoulli(0.05), models.bernoulli(0.25)
det = Cusum(f0, f1)
spec = simulate.ChangeSpec(f0, f1, change_point=1, length=2000)

print(" A     ARL    delay")
for row in evaluation.tradeoff_table(det, spec, [1, 2, 3, 4, 6], runs=300, seed=0, max_length=20_000):
    print(f"{row.threshold:3.0f} {row.estimated_arl:7.0f} {row.mean_delay:8.1f}")

# the smallest threshold whose ARL reaches 1000 bins
res = evaluation.calibrate_threshold(det, f0, 1000, runs=300, seed=0)
print("A for ARL 1000: %.3f (estimate %.0f, %d censored runs)" % (
    res.threshold, res.estimated_arl, res.censored_runs))
