"""Scalar parametric models used by the detectors.

Four families are supported:

- ``bernoulli``: binned spike indicators, parameter ``p``.
- ``poisson``: spike counts, parameter ``rate``.
- ``gaussian_mean``: Gaussian with unknown mean and known variance.
- ``ar1``: zero-mean Gaussian AR(1), ``X_i = a X_{i-1} + e_i`` with
  ``e_i ~ N(0, variance)``.  The only family whose density depends on the
  observation history.

Every function here is pure.  Sampling takes an explicit seed (or a
``numpy.random.Generator``) and is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.signal import lfilter
from scipy.special import gammaln

BERNOULLI_EPS = 1e-6
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class Family(str, Enum):
    BERNOULLI = "bernoulli"
    POISSON = "poisson"
    GAUSSIAN_MEAN = "gaussian_mean"
    AR1 = "ar1"

    @property
    def iid(self) -> bool:
        return self is not Family.AR1


# closed valid range of the scalar parameter per family
_PARAM_RANGE = {
    Family.BERNOULLI: (0.0, 1.0),
    Family.POISSON: (0.0, math.inf),
    Family.GAUSSIAN_MEAN: (-math.inf, math.inf),
    Family.AR1: (-1.0, 1.0),
}


@dataclass(frozen=True)
class ParametricModel:
    """A one-dimensional density family with a fixed parameter.

    ``param`` is the scalar that changes (``p``, the Poisson rate, the
    Gaussian mean, or the AR coefficient).  ``variance`` is only meaningful
    for ``gaussian_mean`` and ``ar1``; it is treated as known.

    Bernoulli parameters are clamped to ``[1e-6, 1 - 1e-6]`` on
    construction so that log-likelihood ratios stay finite.
    """

    family: Family
    param: float
    variance: float = 1.0

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        param = float(self.param)
        if not math.isfinite(param):
            raise ValueError(f"parameter must be finite, got {param!r}")
        if family is Family.BERNOULLI:
            if not 0.0 <= param <= 1.0:
                raise ValueError(f"Bernoulli p must lie in [0, 1], got {param}")
            param = min(max(param, BERNOULLI_EPS), 1.0 - BERNOULLI_EPS)
        elif family is Family.POISSON:
            if param <= 0.0:
                raise ValueError(f"Poisson rate must be > 0, got {param}")
        elif family is Family.AR1:
            if not -1.0 < param < 1.0:
                raise ValueError(f"AR(1) coefficient must satisfy |a| < 1, got {param}")
        object.__setattr__(self, "param", param)
        if family in (Family.GAUSSIAN_MEAN, Family.AR1) and not self.variance > 0.0:
            raise ValueError(f"variance must be > 0, got {self.variance}")
        object.__setattr__(self, "variance", float(self.variance))


def bernoulli(p: float) -> ParametricModel:
    return ParametricModel(Family.BERNOULLI, p)


def poisson(rate: float) -> ParametricModel:
    return ParametricModel(Family.POISSON, rate)


def gaussian_mean(mean: float, variance: float = 1.0) -> ParametricModel:
    return ParametricModel(Family.GAUSSIAN_MEAN, mean, variance)


def ar1(coef: float, variance: float = 1.0) -> ParametricModel:
    return ParametricModel(Family.AR1, coef, variance)


@dataclass(frozen=True)
class ParameterSet:
    """Closed interval ``[lower, upper]`` of a scalar parameter."""

    lower: float
    upper: float

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("interval bounds must not be NaN")
        if self.lower > self.upper:
            raise ValueError(f"empty interval [{self.lower}, {self.upper}]")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def disjoint(self, other: ParameterSet) -> bool:
        return self.upper < other.lower or other.upper < self.lower

    def check_family(self, family: Family) -> None:
        lo, hi = _PARAM_RANGE[Family(family)]
        if self.lower < lo or self.upper > hi:
            raise ValueError(
                f"interval [{self.lower}, {self.upper}] leaves the {Family(family).value} "
                f"parameter range [{lo}, {hi}]"
            )

    @classmethod
    def full(cls, family: Family) -> ParameterSet:
        return cls(*_PARAM_RANGE[Family(family)])


def rng_for(seed, *keys: int) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``.

    Streams are derived through ``SeedSequence`` so that run ``i`` of a
    Monte Carlo experiment gets the same data no matter which worker
    produces it.  A ``Generator`` passed as ``seed`` is returned unchanged.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def check_support(family: Family, x: np.ndarray) -> None:
    if not np.all(np.isfinite(x)):
        raise ValueError("observations must be finite")
    if family is Family.BERNOULLI:
        if not np.all((x == 0) | (x == 1)):
            raise ValueError("Bernoulli observations must be 0 or 1")
    elif family is Family.POISSON:
        if not np.all((x >= 0) & (x == np.floor(x))):
            raise ValueError("Poisson observations must be nonnegative integers")


def _conditional_mean(model: ParametricModel, history: Sequence[float]) -> float:
    if model.family is Family.AR1:
        return model.param * float(history[-1]) if len(history) else 0.0
    return model.param


def _iid_log_density(model: ParametricModel, x: np.ndarray) -> np.ndarray:
    fam, theta = model.family, model.param
    if fam is Family.BERNOULLI:
        return np.where(x == 1, math.log(theta), math.log1p(-theta))
    if fam is Family.POISSON:
        return x * math.log(theta) - theta - gammaln(x + 1.0)
    if fam is Family.GAUSSIAN_MEAN:
        return -_HALF_LOG_2PI - 0.5 * math.log(model.variance) - (x - theta) ** 2 / (2 * model.variance)
    raise ValueError(f"{fam.value} is not an iid family")


def log_density_array(model: ParametricModel, x) -> np.ndarray:
    """Pointwise ``log f(x_i; theta)`` for an iid family."""
    x = np.asarray(x, dtype=float)
    check_support(model.family, x)
    return _iid_log_density(model, x)


def log_density(model: ParametricModel, x: float, history: Sequence[float] = ()) -> float:
    """``log f(x | history; theta)``.

    ``history`` is ignored for the iid families.  For ``ar1`` the
    conditional mean is ``a * history[-1]``, or 0 when the history is empty.
    """
    xa = np.asarray(float(x))
    check_support(model.family, xa)
    if model.family is Family.AR1:
        mean = _conditional_mean(model, history)
        return -_HALF_LOG_2PI - 0.5 * math.log(model.variance) - (float(x) - mean) ** 2 / (2 * model.variance)
    return float(_iid_log_density(model, xa))


def _check_same_family(f0: ParametricModel, f1: ParametricModel) -> None:
    if f0.family is not f1.family:
        raise ValueError(f"family mismatch: {f0.family.value} vs {f1.family.value}")


def log_likelihood_ratio(
    f0: ParametricModel, f1: ParametricModel, x: float, history: Sequence[float] = ()
) -> float:
    """``log f1(x | history) / f0(x | history)``."""
    _check_same_family(f0, f1)
    return log_density(f1, x, history) - log_density(f0, x, history)


def llr_sequence(f0: ParametricModel, f1: ParametricModel, observations) -> np.ndarray:
    """Vectorised conditional log-likelihood ratios of a whole sequence.

    Element ``i`` conditions on ``observations[:i]`` (full history), which
    for the iid families is the plain pointwise ratio.
    """
    _check_same_family(f0, f1)
    x = np.asarray(observations, dtype=float)
    check_support(f0.family, x)
    if f0.family is Family.AR1:
        prev = np.concatenate(([0.0], x[:-1]))
        r0 = x - f0.param * prev
        r1 = x - f1.param * prev
        return (
            0.5 * math.log(f0.variance / f1.variance)
            + r0**2 / (2 * f0.variance)
            - r1**2 / (2 * f1.variance)
        )
    return _iid_log_density(f1, x) - _iid_log_density(f0, x)


def kl_divergence(f: ParametricModel, g: ParametricModel) -> float:
    """Closed-form ``D(f || g)`` for the iid families."""
    _check_same_family(f, g)
    fam = f.family
    if fam is Family.BERNOULLI:
        p, q = f.param, g.param
        return p * math.log(p / q) + (1 - p) * math.log((1 - p) / (1 - q))
    if fam is Family.POISSON:
        a, b = f.param, g.param
        return a * math.log(a / b) - a + b
    if fam is Family.GAUSSIAN_MEAN:
        vf, vg = f.variance, g.variance
        return 0.5 * (math.log(vg / vf) + (vf + (f.param - g.param) ** 2) / vg - 1.0)
    raise ValueError("KL divergence is only defined here for iid families")


def mle(family: Family, samples, constraint: ParameterSet | None = None) -> float:
    """Maximum-likelihood parameter restricted to ``constraint``.

    For the supported one-parameter exponential families the log-likelihood
    is unimodal in the parameter, so the constrained maximiser is the sample
    mean projected onto the interval.
    """
    family = Family(family)
    if not family.iid:
        raise ValueError("constrained MLE is implemented for iid families only")
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("mle needs at least one sample")
    check_support(family, x)
    est = float(np.mean(x))
    if constraint is None:
        return est
    constraint.check_family(family)
    return min(max(est, constraint.lower), constraint.upper)


def profile_log_likelihood(family: Family, theta, total, count, variance: float = 1.0):
    """Log-likelihood of ``count`` iid samples with sum ``total`` at ``theta``.

    Terms that depend on the data but not on ``theta`` (``-log x!``, the
    Gaussian ``x**2`` term and normalising constants) are dropped; they
    cancel in every likelihood ratio built from complementary segments.
    Vectorised over all arguments.  Bernoulli ``theta`` is clamped like
    :class:`ParametricModel`.
    """
    family = Family(family)
    theta = np.asarray(theta, dtype=float)
    total = np.asarray(total, dtype=float)
    count = np.asarray(count, dtype=float)
    if family is Family.BERNOULLI:
        theta = np.clip(theta, BERNOULLI_EPS, 1.0 - BERNOULLI_EPS)
        return total * np.log(theta) + (count - total) * np.log1p(-theta)
    if family is Family.POISSON:
        with np.errstate(divide="ignore", invalid="ignore"):
            ll = np.where(total > 0, total * np.log(theta), 0.0) - count * theta
        return ll
    if family is Family.GAUSSIAN_MEAN:
        return (total * theta - 0.5 * count * theta**2) / variance
    raise ValueError(f"{family.value} has no scalar sufficient statistic here")


def sample(model: ParametricModel, n: int, seed=0) -> np.ndarray:
    """Draw ``n`` observations; AR(1) paths start from ``X_0 = 0``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = rng_for(seed)
    fam = model.family
    if fam is Family.BERNOULLI:
        return (rng.random(n) < model.param).astype(float)
    if fam is Family.POISSON:
        return rng.poisson(model.param, n).astype(float)
    if fam is Family.GAUSSIAN_MEAN:
        return model.param + math.sqrt(model.variance) * rng.standard_normal(n)
    noise = math.sqrt(model.variance) * rng.standard_normal(n)
    return lfilter([1.0], [1.0, -model.param], noise)
