"""Windowed spectrum estimate used by the spectral summary statistic.

The estimate is the raw periodogram of the mean-removed window on the
Fourier grid ``nu_j = 2 pi j / d``, ``j = 0..d//2``, folded to one side.
Normalisation: the two-sided power is ``|DFT_j|^2 / d``, so the one-sided
power sums to ``d`` times the (ddof=0) variance of the window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MIN_WINDOW = 4
FULL_BAND = (0.0, math.pi)


@dataclass(frozen=True)
class SpectrumEstimate:
    frequencies: np.ndarray
    power: np.ndarray
    window_length: int


def fourier_grid(d: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(d // 2 + 1) / d


def _one_sided_power(frames: np.ndarray) -> np.ndarray:
    d = frames.shape[-1]
    if d < MIN_WINDOW:
        raise ValueError(f"window must hold at least {MIN_WINDOW} samples, got {d}")
    centred = frames - frames.mean(axis=-1, keepdims=True)
    power = np.abs(np.fft.rfft(centred, axis=-1)) ** 2 / d
    # DC and (even d) Nyquist have no mirror image
    last = d // 2 if d % 2 == 0 else d // 2 + 1
    power[..., 1:last] *= 2.0
    power[..., 0] = 0.0
    return power


def _band_mask(freqs: np.ndarray, band) -> np.ndarray:
    lo, hi = band
    if not 0.0 <= lo <= hi <= math.pi:
        raise ValueError(f"band must satisfy 0 <= lo <= hi <= pi, got {band}")
    # grid points 2*pi*j/d can land a rounding error past an endpoint
    mask = (freqs >= lo - 1e-12) & (freqs <= hi + 1e-12)
    if not mask.any():
        raise ValueError(f"band {tuple(band)} contains no Fourier grid frequency")
    return mask


def periodogram(window) -> SpectrumEstimate:
    x = np.asarray(window, dtype=float)
    if x.ndim != 1:
        raise ValueError("window must be one-dimensional")
    return SpectrumEstimate(fourier_grid(x.size), _one_sided_power(x), x.size)


def spectral_mass(estimate: SpectrumEstimate, band=FULL_BAND) -> float:
    """Total power at grid frequencies inside ``band`` (endpoints included)."""
    return float(estimate.power[_band_mask(estimate.frequencies, band)].sum())


def rolling_spectral_mass(x, window_length: int, stride: int = 1, band=FULL_BAND) -> np.ndarray:
    """:func:`spectral_mass` of every ``stride``-spaced window of ``x``."""
    x = np.asarray(x, dtype=float)
    frames = np.lib.stride_tricks.sliding_window_view(x, window_length)[::stride]
    mask = _band_mask(fourier_grid(window_length), band)
    return _one_sided_power(frames)[:, mask].sum(axis=1)
