"""Monte Carlo calibration: run length to false alarm, detection delay, thresholds.

Run ``i`` of an experiment seeded with ``seed`` always draws its data from
``rng_for(seed, i)``, so results do not depend on execution order and
different detectors or thresholds evaluated with the same seed see the same
streams (common random numbers).  Under common random numbers the
estimated run length is exactly nondecreasing in the threshold, which the
bisection in :func:`calibrate_threshold` relies on.

A detector is any object with ``run(observations, threshold)`` returning a
:class:`~neuroqcd.detectors.StoppingReport` and ``sample_index(n)`` mapping
its time index to the 1-based sample of the last observation used (see the
configurations in :mod:`neuroqcd.detectors`).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from neuroqcd import models
from neuroqcd.models import ParametricModel
from neuroqcd.simulate import ChangeSpec, gen_iid_change

log = logging.getLogger(__name__)

DEFAULT_BRACKET = (0.1, 50.0)


@dataclass(frozen=True)
class CalibrationResult:
    """Estimated average run length to false alarm at ``threshold``.

    When some runs reach ``max_length`` without an alarm they count as
    ``max_length`` and ``estimated_arl`` is only a lower bound
    (``lower_bound`` is then set).  ``reached`` is False when calibration
    could not hit the target inside its bracket.
    """

    threshold: float
    estimated_arl: float
    arl_std_error: float
    runs: int
    censored_runs: int
    reached: bool = True

    @property
    def lower_bound(self) -> bool:
        return self.censored_runs > 0


@dataclass(frozen=True)
class DelayResult:
    """Detection delay ``tau - gamma`` over runs that alarmed at or after ``gamma``.

    ``missed`` counts false alarms (``tau < gamma``), ``censored`` runs
    that never alarmed; both are excluded from the delay statistics.
    """

    threshold: float
    mean_delay: float
    delay_std_error: float
    median_delay: float
    missed: int
    censored: int
    runs: int
    delays: np.ndarray

    @property
    def flagged(self) -> bool:
        return self.censored > 0 or self.missed == self.runs


@dataclass(frozen=True)
class TradeoffRow:
    threshold: float
    estimated_arl: float
    arl_std_error: float
    arl_censored: int
    mean_delay: float
    delay_std_error: float
    missed: int


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    if values.size == 0:
        return math.nan, math.nan
    se = values.std(ddof=1) / math.sqrt(values.size) if values.size > 1 else 0.0
    return float(values.mean()), float(se)


def run_lengths(detector, pre_model: ParametricModel, threshold: float, runs: int,
                max_length: int, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Per-run sample index of the first alarm (or ``max_length``) and censoring flags."""
    if runs < 1 or max_length < 1:
        raise ValueError("runs and max_length must be >= 1")
    lengths = np.empty(runs)
    censored = np.zeros(runs, dtype=bool)
    for i in range(runs):
        stream = models.sample(pre_model, max_length, models.rng_for(seed, i))
        report = detector.run(stream, threshold)
        if report.detected:
            lengths[i] = detector.sample_index(report.stopping_time)
        else:
            lengths[i] = max_length
            censored[i] = True
    return lengths, censored


def estimate_arl(detector, pre_model: ParametricModel, threshold: float, runs: int = 500,
                 max_length: int = 10_000, seed: int = 0) -> CalibrationResult:
    lengths, censored = run_lengths(detector, pre_model, threshold, runs, max_length, seed)
    arl, se = _mean_se(lengths)
    result = CalibrationResult(float(threshold), arl, se, runs, int(censored.sum()))
    if result.lower_bound:
        log.info("threshold %.4g: %d/%d runs censored at %d, ARL is a lower bound",
                 threshold, result.censored_runs, runs, max_length)
    return result


def estimate_delay(detector, spec: ChangeSpec, threshold: float, runs: int = 500,
                   seed: int = 0) -> DelayResult:
    if runs < 1:
        raise ValueError("runs must be >= 1")
    gamma = spec.length + 1 if spec.change_point is None else spec.change_point
    delays = []
    missed = censored = 0
    for i in range(runs):
        stream = gen_iid_change(spec, models.rng_for(seed, i))
        report = detector.run(stream, threshold)
        if not report.detected:
            censored += 1
            continue
        tau = detector.sample_index(report.stopping_time)
        if tau < gamma:
            missed += 1
        else:
            delays.append(tau - gamma)
    d = np.asarray(delays, dtype=float)
    mean, se = _mean_se(d)
    median = float(np.median(d)) if d.size else math.nan
    return DelayResult(float(threshold), mean, se, median, missed, censored, runs, d)


def calibrate_threshold(
    detector,
    pre_model: ParametricModel,
    target_arl: float,
    runs: int = 500,
    seed: int = 0,
    max_length: int | None = None,
    bracket: tuple[float, float] = DEFAULT_BRACKET,
    rel_tol: float = 0.2,
    max_iter: int = 12,
) -> CalibrationResult:
    """Smallest tested threshold whose estimated ARL reaches ``target_arl``.

    Bisection over ``bracket``; stops once the ARL at the upper end is within
    ``rel_tol`` of the target or after ``max_iter`` halvings.  Runs are
    censored at ``max_length`` (default ``10 * target_arl``).
    """
    if target_arl < 1:
        raise ValueError("target_arl must be >= 1")
    lo, hi = bracket
    if not 0 <= lo < hi:
        raise ValueError(f"invalid bracket {bracket}")
    if max_length is None:
        max_length = max(10, int(math.ceil(10 * target_arl)))

    def arl_at(a: float) -> CalibrationResult:
        return estimate_arl(detector, pre_model, a, runs, max_length, seed)

    low = arl_at(lo)
    if low.estimated_arl >= target_arl:
        return low
    high = arl_at(hi)
    if high.estimated_arl < target_arl:
        log.warning("target ARL %.4g unreachable below threshold %.4g", target_arl, hi)
        return CalibrationResult(high.threshold, high.estimated_arl, high.arl_std_error,
                                 high.runs, high.censored_runs, reached=False)
    for _ in range(max_iter):
        if abs(high.estimated_arl - target_arl) <= rel_tol * target_arl:
            break
        mid = 0.5 * (lo + hi)
        res = arl_at(mid)
        log.debug("bisection A=%.5g ARL=%.5g", mid, res.estimated_arl)
        if res.estimated_arl >= target_arl:
            hi, high = mid, res
        else:
            lo = mid
    return high


def tradeoff_table(detector, spec: ChangeSpec, thresholds: Sequence[float], runs: int = 500,
                   seed: int = 0, max_length: int = 10_000) -> list[TradeoffRow]:
    """ARL under the pre-change model and delay under ``spec`` for each threshold."""
    thresholds = list(thresholds)
    if not thresholds:
        raise ValueError("need at least one threshold")
    rows = []
    for a in thresholds:
        arl = estimate_arl(detector, spec.pre, a, runs, max_length, seed)
        delay = estimate_delay(detector, spec, a, runs, seed)
        rows.append(TradeoffRow(float(a), arl.estimated_arl, arl.arl_std_error,
                                arl.censored_runs, delay.mean_delay, delay.delay_std_error,
                                delay.missed))
    return rows
