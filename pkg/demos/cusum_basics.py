"""
CUSUM on a Bernoulli spike stream
=================================

A neuron fires with probability 0.05 per bin and switches to 0.25 at bin
500.  The CUSUM statistic hovers near zero, then climbs roughly linearly.
"""

import numpy as np

from neuroqcd import detectors, models, simulate

f0 = models.bernoulli(0.05)
f1 = models.bernoulli(0.25)

# expected log-likelihood ratio per bin, before and after the change
print("drift before: %+.4f" % -models.kl_divergence(f0, f1))
print("drift after:  %+.4f" % models.kl_divergence(f1, f0))

spec = simulate.ChangeSpec(f0, f1, change_point=500, length=1000)
x = simulate.gen_iid_change(spec, seed=1)

report = detectors.cusum_run(f0, f1, x, threshold=5.0)
print("alarm at bin", report.stopping_time)

# the recursion and the explicit maximisation over change points agree
path = detectors.cusum_run(f0, f1, x, np.inf).statistic_path
print("max |recursive - max-form| =", np.abs(path - detectors.cusum_maxform(f0, f1, x)).max())

# one step at a time, as a streaming consumer would
state = detectors.DetectorState(threshold=5.0)
for value in x:
    state = detectors.cusum_step(state, models.log_likelihood_ratio(f0, f1, value))
    if state.stopped:
        break
print("streaming alarm at bin", state.stopping_time)
