"""
Detecting a learned response in trial-structured spike data
===========================================================

45 trials of 100 bins with a cue at bin 25.  From trial 16 on the neuron
responds to the cue.  The baseline is learned from the first five trials
and the whole session is monitored as one concatenated stream.
"""

import math

from neuroqcd import simulate, summary
from neuroqcd.detectors import DeviationCusum

BINS = 100


def first_alarm_trial(det, x, threshold):
    r = det.run(x, threshold)
    if not r.detected:
        return None
    return simulate.trial_of_sample(det.sample_index(r.stopping_time), BINS)


# elevated firing after the cue: the mean statistic picks it up
session = simulate.gen_trial_experiment(seed=4)
x = simulate.concat_trials(session)
mean_det = DeviationCusum(summary.fit_summary("mean", x[: 5 * BINS], lam=0.05))
print("immediate response, mean statistic: trial", first_alarm_trial(mean_det, x, 8.0))

# a periodic response with the same spike count per trial: the rate is
# unchanged, but power concentrates at frequency pi/2 (period 4 bins)
session = simulate.gen_trial_experiment(post_rate=0.2, response=simulate.Response.periodic(4), seed=4)
x = simulate.concat_trials(session)
print("spikes per trial before/after: %.2f / %.2f" % (
    session.spikes[:15].sum(1).mean(), session.spikes[15:].sum(1).mean()))
mean_det = DeviationCusum(summary.fit_summary("mean", x[: 5 * BINS], lam=0.05))
print("periodic response, mean statistic:  ", first_alarm_trial(mean_det, x, 8.0))

band = (math.pi / 2 - 0.01, math.pi / 2 + 0.01)
stat = summary.fit_summary("spectral", x[: 5 * BINS], BINS, 1, lam=0.05, band=band)
spec_det = DeviationCusum(stat, stride=BINS)  # one evaluation per trial
print("periodic response, spectral statistic: trial", first_alarm_trial(spec_det, x, 1.0))
