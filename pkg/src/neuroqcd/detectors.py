"""Streaming change detectors.

Four statistics share one stopping rule, ``tau = min{n >= 1: stat_n > A}``:

- CUSUM with known pre/post densities (``W_n = (W_{n-1} + llr_n)^+``),
- generalized CUSUM (GLR over the change point and over the parameters,
  constrained to disjoint intervals),
- CUSUM for dependent data, either conditioning every increment on the full
  history or restarting the conditioning at each candidate change point,
- Deviation-CUSUM on a summary statistic ``h`` with learned baseline mean.

Single steps operate on an immutable :class:`DetectorState`.  The ``*_run``
functions process a whole sequence and return a :class:`StoppingReport`;
they stop consuming input at the first alarm.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from neuroqcd import models
from neuroqcd.models import Family, ParameterSet, ParametricModel
from neuroqcd.summary import summary_values

DEFAULT_GLR_WINDOW = 200


@dataclass(frozen=True)
class DetectorState:
    statistic: float = 0.0
    n: int = 0
    threshold: float = math.inf
    stopped: bool = False
    stopping_time: int | None = None


@dataclass(frozen=True)
class StoppingReport:
    stopping_time: int | None
    statistic_path: np.ndarray
    threshold: float

    @property
    def detected(self) -> bool:
        return self.stopping_time is not None


def _check_threshold(threshold: float) -> float:
    threshold = float(threshold)
    if math.isnan(threshold) or threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    return threshold


def _advance(state: DetectorState, statistic: float) -> DetectorState:
    n = state.n + 1
    if statistic > state.threshold:
        return DetectorState(statistic, n, state.threshold, True, n)
    return replace(state, statistic=statistic, n=n)


def cusum_step(state: DetectorState, llr: float) -> DetectorState:
    """One CUSUM update; a stopped state is returned unchanged."""
    if state.stopped:
        return state
    if not math.isfinite(llr):
        raise ValueError(f"non-finite increment {llr!r}")
    return _advance(state, max(state.statistic + llr, 0.0))


def _fold_plus(increments, threshold: float) -> StoppingReport:
    # plain-float loop: same recursion as cusum_step without per-step allocation
    path = []
    w = 0.0
    tau = None
    for n, inc in enumerate(np.asarray(increments, dtype=float).tolist(), start=1):
        if not math.isfinite(inc):
            raise ValueError(f"non-finite increment at n={n}")
        w = w + inc
        if w < 0.0:
            w = 0.0
        path.append(w)
        if w > threshold:
            tau = n
            break
    return StoppingReport(tau, np.asarray(path, dtype=float), threshold)


def cusum_run(
    f0: ParametricModel, f1: ParametricModel, observations, threshold: float
) -> StoppingReport:
    threshold = _check_threshold(threshold)
    return _fold_plus(models.llr_sequence(f0, f1, observations), threshold)


def cusum_maxform(f0: ParametricModel, f1: ParametricModel, observations) -> np.ndarray:
    """CUSUM path by explicit maximisation over every change point.

    ``W_n = max_{1<=k<=n+1} sum_{i=k}^n llr_i`` evaluated directly in
    O(n^2) time and memory.  Meant as a reference for the recursive form.
    """
    terms = models.llr_sequence(f0, f1, observations)
    n = terms.size
    if n == 0:
        return np.zeros(0)
    # sums[n-1, k-1] = llr_k + ... + llr_n for k <= n
    csum = np.concatenate([[0.0], np.cumsum(terms)])
    sums = csum[1:, None] - csum[None, :-1]
    sums[np.triu_indices(n, 1)] = -np.inf
    return np.maximum(sums.max(axis=1), 0.0)  # 0 is the k = n + 1 term


# --------------------------------------------------------------------------
# generalized CUSUM


@dataclass(frozen=True)
class GlrConfig:
    """Generalized CUSUM setup.

    ``window`` bounds the candidate change points to the last ``window``
    positions.  ``variance`` is the known variance for ``gaussian_mean``.
    """

    family: Family
    theta0_set: ParameterSet
    theta1_set: ParameterSet
    window: int = DEFAULT_GLR_WINDOW
    variance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not self.family.iid:
            raise ValueError("generalized CUSUM needs an iid exponential family")
        self.theta0_set.check_family(self.family)
        self.theta1_set.check_family(self.family)
        if not self.theta0_set.disjoint(self.theta1_set):
            raise ValueError("pre- and post-change parameter sets must be disjoint")
        if self.window < 2:
            raise ValueError("window must be >= 2")
        if self.family is Family.GAUSSIAN_MEAN and not self.variance > 0:
            raise ValueError("variance must be > 0")


def _max_loglik(config: GlrConfig, interval: ParameterSet, total, count):
    total = np.asarray(total, dtype=float)
    count = np.asarray(count, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = np.clip(total / np.maximum(count, 1.0), interval.lower, interval.upper)
        ll = models.profile_log_likelihood(config.family, theta, total, count, config.variance)
    return np.where(count > 0, ll, 0.0)


def _glr_block(config: GlrConfig, csum: np.ndarray, ns: np.ndarray) -> np.ndarray:
    """``G_n`` for every ``n`` in ``ns`` given prefix sums ``csum`` (csum[0] = 0)."""
    w = config.window
    offsets = np.arange(w)
    k = ns[:, None] - offsets[None, :]  # candidate change points, newest first
    valid = k >= 1
    k = np.where(valid, k, 1)
    n = ns[:, None].astype(float)
    pre_sum = csum[k - 1]
    post_sum = csum[ns][:, None] - pre_sum
    pre = _max_loglik(config, config.theta0_set, pre_sum, k - 1)
    post = _max_loglik(config, config.theta1_set, post_sum, n - k + 1)
    null = _max_loglik(config, config.theta0_set, csum[ns], ns)
    g = np.where(valid, pre + post, -np.inf).max(axis=1)
    return g - null


def _glr_prefix(config: GlrConfig, observations) -> np.ndarray:
    x = np.asarray(observations, dtype=float)
    if x.size == 0:
        raise ValueError("observations must be nonempty")
    models.check_support(config.family, x)
    return np.concatenate(([0.0], np.cumsum(x)))


def gcusum_statistic(config: GlrConfig, observations) -> float:
    """``G_n`` after the last observation.

    May be negative: there is no ``k = n + 1`` candidate.  A split with an
    empty pre-change segment contributes 0 for that segment.
    """
    csum = _glr_prefix(config, observations)
    n = len(csum) - 1
    return float(_glr_block(config, csum, np.array([n]))[0])


def gcusum_path(config: GlrConfig, observations) -> np.ndarray:
    csum = _glr_prefix(config, observations)
    return _glr_block(config, csum, np.arange(1, len(csum)))


def gcusum_run(
    config: GlrConfig, observations, threshold: float, chunk: int = 256
) -> StoppingReport:
    threshold = _check_threshold(threshold)
    csum = _glr_prefix(config, observations)
    total = len(csum) - 1
    pieces = []
    for start in range(1, total + 1, chunk):
        ns = np.arange(start, min(start + chunk, total + 1))
        g = _glr_block(config, csum, ns)
        hits = np.flatnonzero(g > threshold)
        if hits.size:
            pieces.append(g[: hits[0] + 1])
            return StoppingReport(int(ns[hits[0]]), np.concatenate(pieces), threshold)
        pieces.append(g)
    return StoppingReport(None, np.concatenate(pieces), threshold)


# --------------------------------------------------------------------------
# dependent data


def _check_conditional_pair(f0: ParametricModel, f1: ParametricModel) -> None:
    models._check_same_family(f0, f1)


def noniid_cusum_step_fullhistory(
    state: DetectorState,
    f0: ParametricModel,
    f1: ParametricModel,
    x: float,
    history: Sequence[float],
) -> DetectorState:
    """CUSUM step whose increment conditions on the whole past.

    The conditioning does not depend on the candidate change point, so the
    maximum over change points collapses to the ordinary ``(.)^+``
    recursion.
    """
    _check_conditional_pair(f0, f1)
    return cusum_step(state, models.log_likelihood_ratio(f0, f1, x, history))


def noniid_cusum_run(
    f0: ParametricModel, f1: ParametricModel, observations, threshold: float
) -> StoppingReport:
    threshold = _check_threshold(threshold)
    _check_conditional_pair(f0, f1)
    return _fold_plus(models.llr_sequence(f0, f1, observations), threshold)


def noniid_cusum_maxform(
    f0: ParametricModel, f1: ParametricModel, observations, reset: bool = False
) -> np.ndarray:
    """Brute-force O(n^2) dependent-data CUSUM path.

    With ``reset=False`` term ``i`` conditions on ``X_1..X_{i-1}``; with
    ``reset=True`` it conditions on ``X_k..X_{i-1}`` only.
    """
    x = [float(v) for v in observations]
    out = np.zeros(len(x))
    for n in range(1, len(x) + 1):
        best = 0.0
        for k in range(1, n + 1):
            s = 0.0
            for i in range(k, n + 1):
                hist = x[k - 1 : i - 1] if reset else x[: i - 1]
                s += models.log_likelihood_ratio(f0, f1, x[i - 1], hist)
            best = max(best, s)
        out[n - 1] = best
    return out


def noniid_cusum_run_reset(
    f0: ParametricModel,
    f1: ParametricModel,
    observations,
    threshold: float,
    window: int,
) -> StoppingReport:
    """Dependent-data CUSUM treating pre- and post-change segments as independent.

    One accumulator is kept per candidate change point ``k`` among the last
    ``window`` positions.  The first post-change term of candidate ``k``
    conditions on nothing (AR(1) conditional mean 0); later terms
    condition on ``X_k..X_{i-1}``, which for AR(1) is just ``X_{i-1}``.
    """
    threshold = _check_threshold(threshold)
    _check_conditional_pair(f0, f1)
    if window < 2:
        raise ValueError("window must be >= 2")
    x = np.asarray(observations, dtype=float)
    models.check_support(f0.family, x)
    # increment when conditioning on the full past vs on nothing
    chained = models.llr_sequence(f0, f1, x).tolist()
    fresh = (
        models.llr_sequence(f0, f1, x) if f0.family.iid else _standing_start_llr(f0, f1, x)
    ).tolist()

    candidates: deque[float] = deque()
    path = []
    tau = None
    for n in range(1, len(x) + 1):
        inc = chained[n - 1]
        for j in range(len(candidates)):
            candidates[j] += inc
        candidates.append(fresh[n - 1])
        if len(candidates) > window:
            candidates.popleft()
        w = max(0.0, max(candidates))
        path.append(w)
        if w > threshold:
            tau = n
            break
    return StoppingReport(tau, np.asarray(path), threshold)


def _standing_start_llr(f0: ParametricModel, f1: ParametricModel, x: np.ndarray) -> np.ndarray:
    return np.array([models.log_likelihood_ratio(f0, f1, v, ()) for v in x.tolist()])


# --------------------------------------------------------------------------
# Deviation-CUSUM


def deviation_cusum_step(
    state: DetectorState, h_value: float, mu0: float, lam: float
) -> DetectorState:
    """``W_n = (W_{n-1} + h - mu0 - lam)^+`` with the usual stopping rule."""
    if not lam > 0:
        raise ValueError("lambda must be > 0")
    if state.stopped:
        return state
    if not math.isfinite(h_value):
        raise ValueError(f"non-finite summary value {h_value!r}")
    return _advance(state, max(state.statistic + h_value - mu0 - lam, 0.0))


def deviation_cusum_run(stat, observations, threshold: float, stride: int = 1) -> StoppingReport:
    """Run Deviation-CUSUM over sliding windows of ``stat.window_length``.

    Windows end at samples ``L, L + stride, L + 2*stride, ...`` (1-based,
    ``L`` the window length).  The returned time index counts windows.
    """
    threshold = _check_threshold(threshold)
    h = summary_values(stat, observations, stride)
    return _fold_plus(h - stat.mu0 - stat.lam, threshold)


def window_end_sample(window_index: int, window_length: int, stride: int) -> int:
    """1-based sample index of the last observation in window ``window_index``."""
    return (window_index - 1) * stride + window_length


# --------------------------------------------------------------------------
# detector configurations: a uniform ``run(observations, threshold)`` surface
# used by the Monte Carlo harness


@dataclass(frozen=True)
class Cusum:
    f0: ParametricModel
    f1: ParametricModel

    def run(self, observations, threshold: float) -> StoppingReport:
        return cusum_run(self.f0, self.f1, observations, threshold)

    def sample_index(self, n: int) -> int:
        return n


@dataclass(frozen=True)
class Gcusum:
    config: GlrConfig

    def run(self, observations, threshold: float) -> StoppingReport:
        return gcusum_run(self.config, observations, threshold)

    def sample_index(self, n: int) -> int:
        return n


@dataclass(frozen=True)
class NoniidCusum:
    """Dependent-data CUSUM; ``reset`` selects per-candidate conditioning."""

    f0: ParametricModel
    f1: ParametricModel
    reset: bool = False
    window: int = DEFAULT_GLR_WINDOW

    def run(self, observations, threshold: float) -> StoppingReport:
        if self.reset:
            return noniid_cusum_run_reset(self.f0, self.f1, observations, threshold, self.window)
        return noniid_cusum_run(self.f0, self.f1, observations, threshold)

    def sample_index(self, n: int) -> int:
        return n


@dataclass(frozen=True)
class DeviationCusum:
    stat: object  # summary.SummaryStatistic
    stride: int = 1

    def run(self, observations, threshold: float) -> StoppingReport:
        return deviation_cusum_run(self.stat, observations, threshold, self.stride)

    def sample_index(self, n: int) -> int:
        return window_end_sample(n, self.stat.window_length, self.stride)
