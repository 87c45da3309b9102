"""Synthetic data: iid change-point streams and trial-structured spike experiments.

The trial simulator mimics a cue-conditioning session: ``trials`` rows of
``bins`` binary spike indicators, a cue at ``cue_bin`` in every trial, and
from ``change_trial`` on an altered post-cue response.  Defaults: 45 trials,
change from trial 16, 100 bins of 10 ms, cue at bin 25.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from neuroqcd import models
from neuroqcd.models import ParametricModel

DEFAULT_TRIALS = 45
DEFAULT_BINS = 100
DEFAULT_BIN_WIDTH = 0.01
DEFAULT_CUE_BIN = 25
DEFAULT_CHANGE_TRIAL = 16
DEFAULT_PERIOD = 4


@dataclass(frozen=True)
class ChangeSpec:
    """iid stream of ``length`` samples switching from ``pre`` to ``post``.

    ``change_point`` is the 1-based index of the first post-change sample;
    ``None`` means the change never happens.
    """

    pre: ParametricModel
    post: ParametricModel
    change_point: int | None
    length: int

    def __post_init__(self):
        if self.pre.family is not self.post.family:
            raise ValueError("pre and post models must share a family")
        if self.length < 1:
            raise ValueError("length must be >= 1")
        if self.change_point is not None and not 1 <= self.change_point <= self.length + 1:
            raise ValueError(f"change point must lie in [1, length + 1], got {self.change_point}")


def gen_iid_change(spec: ChangeSpec, seed=0) -> np.ndarray:
    rng = models.rng_for(seed)
    gamma = spec.length + 1 if spec.change_point is None else spec.change_point
    parts = []
    if gamma > 1:
        parts.append(models.sample(spec.pre, gamma - 1, rng))
    if gamma <= spec.length:
        parts.append(models.sample(spec.post, spec.length - gamma + 1, rng))
    return np.concatenate(parts)


@dataclass(frozen=True)
class Response:
    """Post-change response shape.

    ``immediate``: elevated rate from the cue onward.  ``delayed``: elevation
    starts ``bins`` after the cue (default half the post-cue span).
    ``periodic``: every ``bins``-th bin after the cue fires at the post rate,
    the remaining post-cue bins at a rate chosen so the trial's expected
    spike count equals the baseline.
    """

    kind: str = "immediate"
    bins: int | None = None

    def __post_init__(self):
        if self.kind not in ("immediate", "delayed", "periodic"):
            raise ValueError(f"unknown response kind {self.kind!r}")
        if self.kind == "periodic" and self.bins is not None and self.bins < 2:
            raise ValueError("periodic response needs a period >= 2")
        if self.bins is not None and self.bins < 0:
            raise ValueError("response bins must be >= 0")

    @classmethod
    def immediate(cls) -> Response:
        return cls("immediate")

    @classmethod
    def delayed(cls, offset: int | None = None) -> Response:
        return cls("delayed", offset)

    @classmethod
    def periodic(cls, period: int = DEFAULT_PERIOD) -> Response:
        return cls("periodic", period)

    def __str__(self) -> str:
        return self.kind if self.bins is None else f"{self.kind}:{self.bins}"

    @classmethod
    def parse(cls, text: str) -> Response:
        kind, _, arg = str(text).partition(":")
        return cls(kind.strip().lower(), int(arg) if arg else None)


@dataclass(frozen=True, eq=False)
class SpikeTrialSet:
    spikes: np.ndarray
    bin_width: float = DEFAULT_BIN_WIDTH
    change_trial: int = DEFAULT_CHANGE_TRIAL
    cue_bin: int = DEFAULT_CUE_BIN
    response: Response = Response()

    def __post_init__(self):
        spikes = np.asarray(self.spikes)
        if spikes.ndim != 2 or spikes.shape[0] < 1 or spikes.shape[1] < 1:
            raise ValueError(f"spikes must be a nonempty trials x bins matrix, got {spikes.shape}")
        if not np.all((spikes == 0) | (spikes == 1)):
            raise ValueError("spike entries must be 0 or 1")
        object.__setattr__(self, "spikes", spikes.astype(np.uint8))
        if not 1 <= self.change_trial <= self.trials + 1:
            raise ValueError(f"change_trial must lie in [1, {self.trials + 1}]")
        if not 0 <= self.cue_bin < self.bins:
            raise ValueError(f"cue_bin must lie in [0, {self.bins})")
        if not self.bin_width > 0:
            raise ValueError("bin_width must be > 0")

    @property
    def trials(self) -> int:
        return self.spikes.shape[0]

    @property
    def bins(self) -> int:
        return self.spikes.shape[1]

    def __eq__(self, other):
        if not isinstance(other, SpikeTrialSet):
            return NotImplemented
        return (
            np.array_equal(self.spikes, other.spikes)
            and self.bin_width == other.bin_width
            and self.change_trial == other.change_trial
            and self.cue_bin == other.cue_bin
            and self.response == other.response
        )


def response_profile(
    bins: int, baseline_rate: float, post_rate: float, cue_bin: int, response: Response
) -> np.ndarray:
    """Per-bin firing probability of a post-change trial."""
    prob = np.full(bins, float(baseline_rate))
    span = bins - cue_bin
    if response.kind == "immediate":
        prob[cue_bin:] = post_rate
    elif response.kind == "delayed":
        offset = span // 2 if response.bins is None else response.bins
        if cue_bin + offset < bins:
            prob[cue_bin + offset :] = post_rate
    else:
        period = DEFAULT_PERIOD if response.bins is None else response.bins
        on = np.arange(cue_bin, bins, period)
        n_off = span - on.size
        if n_off == 0:
            raise ValueError("post-cue span too short for a periodic response")
        off_rate = (span * baseline_rate - on.size * post_rate) / n_off
        prob[cue_bin:] = min(max(off_rate, 0.0), 1.0)
        prob[on] = post_rate
        # matching is exact unless the off-bin rate had to be clipped
        excess = prob.sum() - bins * baseline_rate
        if abs(excess) > 1.0:
            raise ValueError(
                f"cannot rate-match post_rate {post_rate} with period {period}: "
                f"expected trial count off by {excess:.3f} spikes"
            )
    return prob


def gen_trial_experiment(
    trials: int = DEFAULT_TRIALS,
    bins: int = DEFAULT_BINS,
    baseline_rate: float = 0.05,
    post_rate: float = 0.25,
    change_trial: int = DEFAULT_CHANGE_TRIAL,
    cue_bin: int = DEFAULT_CUE_BIN,
    response: Response = Response(),
    seed=0,
    bin_width: float = DEFAULT_BIN_WIDTH,
) -> SpikeTrialSet:
    """Bernoulli spike trials with a behavioural change at ``change_trial``.

    Trials before ``change_trial`` (1-based) fire at ``baseline_rate`` in
    every bin; later trials follow :func:`response_profile`.
    """
    for name, rate in (("baseline_rate", baseline_rate), ("post_rate", post_rate)):
        if not 0.0 < rate < 1.0:
            raise ValueError(f"{name} must lie in (0, 1), got {rate}")
    if trials < 1 or bins < 1:
        raise ValueError("trials and bins must be >= 1")
    if not 1 <= change_trial <= trials + 1:
        raise ValueError(f"change_trial must lie in [1, {trials + 1}]")
    if not 0 <= cue_bin < bins:
        raise ValueError(f"cue_bin must lie in [0, {bins})")
    prob = np.full((trials, bins), float(baseline_rate))
    prob[change_trial - 1 :] = response_profile(bins, baseline_rate, post_rate, cue_bin, response)
    rng = models.rng_for(seed)
    spikes = (rng.random((trials, bins)) < prob).astype(np.uint8)
    return SpikeTrialSet(spikes, bin_width, change_trial, cue_bin, response)


def concat_trials(trial_set: SpikeTrialSet) -> np.ndarray:
    """Row-major flattening into one binary sequence, first trial first."""
    return trial_set.spikes.reshape(-1).astype(float)


def trial_of_sample(sample_index: int, bins: int) -> int:
    """1-based trial containing 1-based sample ``sample_index`` of a concatenation."""
    return math.ceil(sample_index / bins)
