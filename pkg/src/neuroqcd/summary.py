"""Summary statistics ``h`` for the Deviation-CUSUM and their baselines.

A statistic looks at the last ``window_length`` samples
``(X_{n-d}, ..., X_n)`` and returns one number whose mean is ``mu0`` before
the change and larger afterwards:

========  =====================================================
mean      ``X_n``
variance  ``(X_n - center)**2`` (``center`` is 0 for zero-mean data)
entropy   ``-log f0(X_n)``
spectral  periodogram mass of the window inside ``band``
========  =====================================================

Only increases of ``E[h]`` are detected; negate the data-side quantity to
watch for decreases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from neuroqcd import models, spectral
from neuroqcd.models import ParametricModel


class StatKind(str, Enum):
    MEAN = "mean"
    VARIANCE = "variance"
    ENTROPY = "entropy"
    SPECTRAL = "spectral"


@dataclass(frozen=True)
class SummaryStatistic:
    """A window function ``h`` with its baseline mean ``mu0`` and slack ``lam``.

    ``aux`` is the pre-change model (entropy only), ``band`` the frequency
    interval inside ``[0, pi]`` (spectral only, defaults to the full band),
    ``center`` the mean subtracted before squaring (variance only).
    """

    kind: StatKind
    window_length: int = 1
    mu0: float = 0.0
    lam: float = 0.05
    aux: ParametricModel | None = None
    band: tuple[float, float] | None = None
    center: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", StatKind(self.kind))
        if self.window_length < 1:
            raise ValueError("window_length must be >= 1")
        if self.kind is StatKind.SPECTRAL and self.window_length < spectral.MIN_WINDOW:
            raise ValueError(f"spectral statistic needs window_length >= {spectral.MIN_WINDOW}")
        if self.kind is StatKind.ENTROPY:
            if self.aux is None:
                raise ValueError("entropy statistic needs the pre-change model as aux")
            if not self.aux.family.iid:
                raise ValueError("entropy statistic supports iid pre-change models only")
        if not self.lam > 0:
            raise ValueError(f"lambda must be > 0, got {self.lam}")
        if not math.isfinite(self.mu0):
            raise ValueError("mu0 must be finite")
        if self.band is not None:
            object.__setattr__(self, "band", (float(self.band[0]), float(self.band[1])))

    @property
    def effective_band(self) -> tuple[float, float]:
        return self.band if self.band is not None else spectral.FULL_BAND


def evaluate(stat: SummaryStatistic, window) -> float:
    """``h`` of a single window of exactly ``stat.window_length`` samples."""
    w = np.asarray(window, dtype=float)
    if w.shape != (stat.window_length,):
        raise ValueError(f"expected a window of {stat.window_length} samples, got shape {w.shape}")
    return float(summary_values(stat, w, stride=1)[0])


def summary_values(stat: SummaryStatistic, observations, stride: int = 1) -> np.ndarray:
    """``h`` over all windows ending at samples ``L, L+stride, ...``."""
    x = np.asarray(observations, dtype=float)
    L = stat.window_length
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if x.ndim != 1 or x.size < L:
        raise ValueError(f"need at least one window of {L} samples, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("observations must be finite")
    kind = stat.kind
    if kind is StatKind.SPECTRAL:
        return spectral.rolling_spectral_mass(x, L, stride, stat.effective_band)
    last = x[L - 1 :: stride]
    if kind is StatKind.MEAN:
        return last.copy()
    if kind is StatKind.VARIANCE:
        return (last - stat.center) ** 2
    return -models.log_density_array(stat.aux, last)


def learn_baseline(
    kind: StatKind,
    training,
    window_length: int = 1,
    stride: int = 1,
    *,
    aux: ParametricModel | None = None,
    band: tuple[float, float] | None = None,
    center: float = 0.0,
) -> float:
    """Empirical mean of ``h`` over the stride-spaced training windows."""
    probe = SummaryStatistic(kind, window_length, aux=aux, band=band, center=center)
    return float(np.mean(summary_values(probe, training, stride)))


def fit_summary(
    kind: StatKind,
    training,
    window_length: int = 1,
    stride: int = 1,
    lam: float | None = None,
    *,
    aux: ParametricModel | None = None,
    band: tuple[float, float] | None = None,
    center_variance: bool = True,
) -> SummaryStatistic:
    """Build a :class:`SummaryStatistic` with ``mu0`` learned from ``training``.

    For the variance statistic the training mean is used as ``center`` when
    ``center_variance`` is set, so data with a nonzero rate is usable.  When
    ``lam`` is omitted it defaults to three standard errors of ``mu0``.
    """
    kind = StatKind(kind)
    x = np.asarray(training, dtype=float)
    center = float(x.mean()) if kind is StatKind.VARIANCE and center_variance else 0.0
    probe = SummaryStatistic(kind, window_length, aux=aux, band=band, center=center)
    h = summary_values(probe, x, stride)
    mu0 = float(h.mean())
    if lam is None:
        lam = default_lambda(h)
    return SummaryStatistic(kind, window_length, mu0, lam, aux, band, center)


def default_lambda(h_values) -> float:
    """Slack heuristic when no shift size is known: 3 x SE of the baseline mean."""
    h = np.asarray(h_values, dtype=float)
    se = h.std(ddof=1) / math.sqrt(h.size) if h.size > 1 else 0.0
    # a constant training statistic leaves no spread to scale from
    return 3.0 * se if se > 0 else 1e-3
