"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline;
they are also echoed in the terminal summary.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from neuroqcd import detectors, evaluation, models, simulate, spectral, summary
from neuroqcd.detectors import Cusum, DeviationCusum, Gcusum, GlrConfig
from neuroqcd.models import ParameterSet
from neuroqcd.simulate import ChangeSpec, Response

import oracles

pytestmark = pytest.mark.slow

EPS = models.BERNOULLI_EPS
F0, F1 = models.bernoulli(0.05), models.bernoulli(0.25)
RESULTS = {}


def report(capsys, number, name, passed, detail):
    line = f"criterion {number} [{name}]: {'PASS' if passed else 'FAIL'} ({detail})"
    RESULTS[number] = line
    with capsys.disabled():
        print("\n" + line)
    assert passed, line


def random_model_pair(rng):
    fam = rng.choice(["bernoulli", "poisson", "gaussian_mean"])
    if fam == "bernoulli":
        p = rng.uniform(0.01, 0.99, 2)
        return models.bernoulli(p[0]), models.bernoulli(p[1])
    if fam == "poisson":
        r = rng.uniform(0.1, 10.0, 2)
        return models.poisson(r[0]), models.poisson(r[1])
    m = rng.normal(0.0, 2.0, 2)
    v = rng.uniform(0.2, 4.0)
    return models.gaussian_mean(m[0], v), models.gaussian_mean(m[1], v)


# ---------------------------------------------------------------- 1


def test_criterion_1_cusum_equivalence(capsys):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        f0, f1 = random_model_pair(rng)
        truth = f0 if rng.random() < 0.5 else f1
        x = models.sample(truth, int(rng.integers(1, 201)), rng)
        rec = detectors.cusum_run(f0, f1, x, math.inf).statistic_path
        worst = max(worst, float(np.max(np.abs(rec - detectors.cusum_maxform(f0, f1, x)))))
    elapsed = time.perf_counter() - start
    report(capsys, 1, "CUSUM recursion equals max-form", worst <= 1e-9 and elapsed < 10.0,
           f"1000 sequences, max |diff| {worst:.2e} <= 1e-9, {elapsed:.2f} s < 10 s")


# ---------------------------------------------------------------- 2


def test_criterion_2_drift_signs(capsys):
    n = 100_000
    checks = []
    for truth, seed, target in ((F0, 10, -models.kl_divergence(F0, F1)),
                                (F1, 11, models.kl_divergence(F1, F0))):
        ell = models.llr_sequence(F0, F1, models.sample(truth, n, seed))
        se = ell.std(ddof=1) / math.sqrt(n)
        checks.append((ell.mean(), target, se, abs(ell.mean() - target) <= 3 * se))
    detail = "; ".join(f"mean {m:+.5f} vs {t:+.5f} (3 SE = {3 * s:.5f})" for m, t, s, _ in checks)
    report(capsys, 2, "LLR drift signs", all(c[-1] for c in checks), detail)


# ---------------------------------------------------------------- 3


def test_criterion_3_tradeoff_monotone(capsys):
    start = time.perf_counter()
    thresholds = [1.0, 2.0, 3.0, 4.0, 6.0]
    spec = ChangeSpec(F0, F1, change_point=1, length=2000)
    rows = evaluation.tradeoff_table(Cusum(F0, F1), spec, thresholds, runs=500, seed=3,
                                     max_length=20_000)
    elapsed = time.perf_counter() - start
    arl = [r.estimated_arl for r in rows]
    delay = [r.mean_delay for r in rows]
    rho_arl = oracles.spearman(thresholds, arl)
    rho_delay = oracles.spearman(thresholds, delay)
    ok = rho_arl > 0.9 and rho_delay > 0.9 and elapsed < 120
    report(capsys, 3, "ARL and delay increase with threshold", ok,
           f"Spearman ARL {rho_arl:.3f}, delay {rho_delay:.3f} (> 0.9), "
           f"ARL {[round(a) for a in arl]}, delay {[round(d, 1) for d in delay]}, {elapsed:.1f} s")


# ---------------------------------------------------------------- 4


def test_criterion_4a_gcusum_singletons(capsys):
    rng = np.random.default_rng(77)
    worst = 0.0
    for _ in range(200):
        fam = rng.choice(["bernoulli", "poisson", "gaussian_mean"])
        lo, hi = {"bernoulli": (0.01, 0.99), "poisson": (0.1, 10.0), "gaussian_mean": (-3.0, 3.0)}[fam]
        p0, p1 = np.sort(rng.uniform(lo, hi, 2))
        if rng.random() < 0.5:
            p0, p1 = p1, p0
        window = int(rng.integers(2, 60))
        cfg = GlrConfig(fam, ParameterSet(p0, p0), ParameterSet(p1, p1), window=window)
        x = models.sample(models.ParametricModel(fam, p1 if rng.random() < 0.5 else p0),
                          int(rng.integers(1, 201)), rng)
        got = detectors.gcusum_path(cfg, x)
        ref = oracles.windowed_maxform(fam, p0, p1, x, window)
        worst = max(worst, float(np.max(np.abs(got - ref))))
    report(capsys, "4a", "GCUSUM with singleton sets equals windowed max-form", worst <= 1e-9,
           f"200 sequences, max |diff| {worst:.2e} <= 1e-9")


def test_criterion_4b_gcusum_delay(capsys):
    gamma, runs, target = 100, 300, 500.0
    known = Cusum(F0, F1)
    glr = Gcusum(GlrConfig("bernoulli", ParameterSet(EPS, 0.05), ParameterSet(0.1, 1 - EPS)))
    # equal false-alarm rates: both calibrated to the same ARL on common streams
    cal_known = evaluation.calibrate_threshold(known, F0, target, runs=200, seed=40,
                                               max_length=5000, bracket=(0.5, 10.0), rel_tol=0.1)
    cal_glr = evaluation.calibrate_threshold(glr, F0, target, runs=200, seed=40,
                                             max_length=5000, bracket=(2.0, 12.0), rel_tol=0.1)
    spec = ChangeSpec(F0, F1, change_point=gamma, length=1500)
    taus = {}
    for name, det, cal in (("cusum", known, cal_known), ("gcusum", glr, cal_glr)):
        out = []
        for i in range(runs):
            r = det.run(simulate.gen_iid_change(spec, models.rng_for(41, i)), cal.threshold)
            out.append(r.stopping_time if r.detected else None)
        taus[name] = out
    paired = [(a - gamma, b - gamma) for a, b in zip(taus["cusum"], taus["gcusum"])
              if a is not None and b is not None and a >= gamma and b >= gamma]
    med_known = float(np.median([p[0] for p in paired]))
    med_glr = float(np.median([p[1] for p in paired]))
    ok = cal_known.reached and cal_glr.reached and len(paired) >= 100 and med_glr <= 2 * med_known
    report(capsys, "4b", "GCUSUM delay within 2x of known-parameter CUSUM", ok,
           f"{runs} paired runs ({len(paired)} both post-change), ARL-matched A = "
           f"{cal_known.threshold:.3f} / {cal_glr.threshold:.3f}, median delay "
           f"{med_glr:.1f} vs {med_known:.1f} (limit {2 * med_known:.1f})")


# ---------------------------------------------------------------- 5


def test_criterion_5_noniid_oracles(capsys):
    rng = np.random.default_rng(5)
    worst_full = worst_reset = 0.0
    for _ in range(100):
        a0, a1 = rng.uniform(-0.9, 0.9, 2)
        v = rng.uniform(0.3, 3.0)
        f0, f1 = models.ar1(a0, v), models.ar1(a1, v)
        x = models.sample(f1 if rng.random() < 0.5 else f0, int(rng.integers(1, 51)), rng)
        full = detectors.noniid_cusum_run(f0, f1, x, math.inf).statistic_path
        worst_full = max(worst_full, float(np.max(np.abs(full - oracles.ar1_bruteforce(a0, a1, x, v)))))
        y = x[:30]
        reset = detectors.noniid_cusum_run_reset(f0, f1, y, math.inf, window=len(y) + 1).statistic_path
        ref = oracles.ar1_bruteforce(a0, a1, y, v, reset=True)
        worst_reset = max(worst_reset, float(np.max(np.abs(reset - ref))))
    report(capsys, 5, "dependent-data CUSUM equals brute force",
           max(worst_full, worst_reset) <= 1e-9,
           f"100 AR(1) paths, full-history max |diff| {worst_full:.2e}, "
           f"reset max |diff| {worst_reset:.2e} (<= 1e-9)")


# ---------------------------------------------------------------- 6 and 7

BASELINE_TRIALS = 5
MEAN_THRESHOLD = 8.0
SPECTRAL_THRESHOLD = 1.0
SPECTRAL_BAND = (math.pi / 2 - 0.01, math.pi / 2 + 0.01)


def mean_detector(x, bins):
    baseline = x[: BASELINE_TRIALS * bins]
    return DeviationCusum(summary.fit_summary("mean", baseline, lam=0.05))


def spectral_detector(x, bins):
    baseline = x[: BASELINE_TRIALS * bins]
    stat = summary.fit_summary("spectral", baseline, bins, 1, lam=0.05, band=SPECTRAL_BAND)
    return DeviationCusum(stat, stride=bins)


def alarm_trial(make, trial_set, threshold):
    """Trial holding the alarm sample, or None."""
    x = simulate.concat_trials(trial_set)
    det = make(x, trial_set.bins)
    r = det.run(x, threshold)
    if not r.detected:
        return None
    return simulate.trial_of_sample(det.sample_index(r.stopping_time), trial_set.bins)


def test_criterion_6_immediate_response(capsys):
    seeds = range(100)
    changed = [alarm_trial(mean_detector, simulate.gen_trial_experiment(seed=s), MEAN_THRESHOLD)
               for s in seeds]
    hit = sum(t is not None and 16 <= t <= 25 for t in changed)
    quiet = [alarm_trial(mean_detector, simulate.gen_trial_experiment(change_trial=46, seed=s),
                         MEAN_THRESHOLD) for s in seeds]
    silent = sum(t is None or t > 15 for t in quiet)
    report(capsys, 6, "immediate response, mean statistic", hit >= 95 and silent >= 95,
           f"A = {MEAN_THRESHOLD}: alarm in trials 16-25 for {hit}/100 changed runs (>= 95); "
           f"no alarm in trials 1-15 for {silent}/100 baseline runs (>= 95)")


def test_criterion_7_rate_matched_periodic(capsys):
    spec_hit = mean_silent = 0
    for s in range(100):
        trials = simulate.gen_trial_experiment(post_rate=0.2, response=Response.periodic(4), seed=s)
        t = alarm_trial(spectral_detector, trials, SPECTRAL_THRESHOLD)
        spec_hit += t is not None and 16 <= t <= 30
        mean_silent += alarm_trial(mean_detector, trials, MEAN_THRESHOLD) is None
    report(capsys, 7, "rate-matched periodic response", spec_hit >= 90 and mean_silent >= 90,
           f"spectral (band pi/2 +- 0.01, A = {SPECTRAL_THRESHOLD}) alarms in trials 16-30 for "
           f"{spec_hit}/100 (>= 90); mean statistic (A = {MEAN_THRESHOLD}) silent over 45 trials "
           f"for {mean_silent}/100 (>= 90)")


# ---------------------------------------------------------------- 8


def test_criterion_8_parseval(capsys):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(4, 513))
        x = rng.normal(rng.normal(0, 5), rng.uniform(0.1, 10), d)
        total = spectral.spectral_mass(spectral.periodogram(x))
        expected = d * x.var()
        worst = max(worst, abs(total - expected) / max(1.0, expected))
    report(capsys, 8, "Parseval", worst <= 1e-9,
           f"1000 windows, max relative error {worst:.2e} <= 1e-9")


# ---------------------------------------------------------------- 9


def test_criterion_9_cli_determinism(capsys, tmp_path):
    data = tmp_path / "trials.csv"

    def qcd(*argv):
        return subprocess.run([sys.executable, "-m", "neuroqcd", *map(str, argv)],
                              capture_output=True, text=True, check=False)

    commands = {
        "simulate": lambda out: ("simulate", "--seed", 9, "--out", out),
        "detect": lambda out: ("detect", "--input", data, "--threshold", MEAN_THRESHOLD, "--out", out),
        "calibrate": lambda out: ("calibrate", "--detector", "cusum", "--param0", 0.05, "--param1",
                                  0.25, "--target-arl", 100, "--runs", 100, "--seed", 9, "--out", out),
        "evaluate": lambda out: ("evaluate", "--detector", "cusum", "--param0", 0.05, "--param1",
                                 0.25, "--thresholds", "1,2,4", "--runs", 100, "--seed", 9,
                                 "--out", out),
    }
    assert qcd("simulate", "--seed", 9, "--out", data).returncode == 0
    same = {}
    for name, argv in commands.items():
        blobs = []
        for rep in range(2):
            out = tmp_path / f"{name}{rep}.csv"
            proc = qcd(*argv(out))
            assert proc.returncode in (0, 1), proc.stderr
            blobs.append(out.read_bytes())
        same[name] = blobs[0] == blobs[1] and len(blobs[0]) > 0
    report(capsys, 9, "CLI determinism", all(same.values()),
           ", ".join(f"{k} {'identical' if v else 'DIFFERS'}" for k, v in same.items()))
