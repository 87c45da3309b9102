import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from neuroqcd import spectral

import oracles


def test_cosine_at_quarter_frequency():
    x = np.cos(np.pi / 2 * np.arange(8))
    est = spectral.periodogram(x)
    np.testing.assert_allclose(est.frequencies, 2 * np.pi * np.arange(5) / 8)
    assert est.power[2] == pytest.approx(4.0)
    assert np.delete(est.power, 2) == pytest.approx(np.zeros(4), abs=1e-12)
    assert spectral.spectral_mass(est) == pytest.approx(4.0)
    assert spectral.spectral_mass(est, (1.5, 1.6)) == pytest.approx(4.0)
    assert spectral.spectral_mass(est, (2.0, math.pi)) == pytest.approx(0.0, abs=1e-12)


def test_constant_window_has_no_power():
    est = spectral.periodogram(np.full(10, 3.0))
    assert spectral.spectral_mass(est) == pytest.approx(0.0, abs=1e-20)


def test_window_too_short():
    with pytest.raises(ValueError):
        spectral.periodogram([1.0, 2.0, 3.0])


@pytest.mark.parametrize("band", [(-0.1, 1.0), (1.0, 0.5), (0.0, 4.0), (0.1, 0.2)])
def test_bad_band(band):
    est = spectral.periodogram(np.arange(8.0))
    with pytest.raises(ValueError):
        spectral.spectral_mass(est, band)


@pytest.mark.parametrize("d", [4, 5, 8, 11, 16])
def test_matches_explicit_dft(d):
    x = np.random.default_rng(d).normal(size=d)
    np.testing.assert_allclose(spectral.periodogram(x).power, oracles.dft_power_one_sided(x), atol=1e-10)


@settings(max_examples=60)
@given(st.lists(st.floats(-100, 100), min_size=4, max_size=64))
def test_parseval(xs):
    x = np.asarray(xs)
    total = spectral.spectral_mass(spectral.periodogram(x))
    assert total == pytest.approx(x.size * x.var(), rel=1e-9, abs=1e-7)


@settings(max_examples=40)
@given(st.lists(st.floats(-10, 10), min_size=4, max_size=40), st.floats(-50, 50))
def test_shift_invariance(xs, c):
    x = np.asarray(xs)
    a = spectral.periodogram(x).power
    b = spectral.periodogram(x + c).power
    np.testing.assert_allclose(a, b, atol=1e-7 * (1 + np.abs(a).max()))


def test_band_union_adds_up():
    x = np.random.default_rng(0).normal(size=16)
    est = spectral.periodogram(x)
    # grid spacing pi/8: split between grid points
    lo = spectral.spectral_mass(est, (0.0, 1.0))
    hi = spectral.spectral_mass(est, (1.1, math.pi))
    assert lo + hi == pytest.approx(spectral.spectral_mass(est))


def test_rolling_matches_single_windows():
    x = np.random.default_rng(3).poisson(2.0, size=60).astype(float)
    band = (0.5, 2.5)
    got = spectral.rolling_spectral_mass(x, 12, stride=5, band=band)
    ref = [spectral.spectral_mass(spectral.periodogram(x[s : s + 12]), band) for s in range(0, 49, 5)]
    np.testing.assert_allclose(got, ref, atol=1e-12)
