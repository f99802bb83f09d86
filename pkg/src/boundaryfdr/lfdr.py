"""Local false discovery rate machinery.

Grenander fit (non-increasing density MLE), estimated and closed-form lfdr
curves for the Gaussian mean configurations, oracle thresholds, and the
Sellke-style p-value calibration curves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import ndtri

from .core import PValueSample, ValidationError
from .pi0 import Pi0Estimate


class NoRootError(ValueError):
    """Raised when a threshold equation has no solution in the open interval."""


ConfigKind = Literal["alternating", "all_at_5"]

# non-null mean values; the alternating configuration cycles through the block
MEAN_BLOCKS: dict[str, tuple[float, ...]] = {
    "alternating": (1.25, 2.5, 3.75, 5.0),
    "all_at_5": (5.0,),
}


@dataclass(frozen=True)
class AltConfig:
    """A mean configuration (which non-null pattern) plus its null proportion."""

    kind: ConfigKind
    pi0: float

    def __post_init__(self):
        if self.kind not in MEAN_BLOCKS:
            raise ValidationError(f"unknown configuration kind {self.kind!r}")
        if not 0.0 <= self.pi0 <= 1.0:
            raise ValidationError(f"pi0 must lie in [0, 1], got {self.pi0}")


@dataclass(frozen=True)
class MonotoneDensity:
    """Piecewise-constant non-increasing density on [0, 1].

    ``heights[j]`` applies on the interval (knots[j], knots[j+1]]; the
    heights are non-increasing and integrate to 1.
    """

    knots: np.ndarray
    heights: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float).copy()
        heights = np.asarray(self.heights, dtype=float).copy()
        if knots.size != heights.size + 1:
            raise ValidationError("need exactly one height per knot interval")
        if knots[0] != 0.0 or knots[-1] != 1.0:
            raise ValidationError("knots must start at 0 and end at 1")
        if np.any(np.diff(knots) <= 0):
            raise ValidationError("knots must be strictly increasing")
        if np.any(heights < 0):
            raise ValidationError("heights must be non-negative")
        if np.any(np.diff(heights) > 1e-12):
            raise ValidationError("heights must be non-increasing")
        total = float(np.sum(heights * np.diff(knots)))
        if abs(total - 1.0) > 1e-10:
            raise ValidationError(f"density must integrate to 1, got {total!r}")
        knots.flags.writeable = False
        heights.flags.writeable = False
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "heights", heights)


def _pava_non_increasing(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted least-squares fit of a non-increasing step function."""
    vals: list[float] = []
    wts: list[float] = []
    cnt: list[int] = []
    for v, w in zip(values, weights):
        vals.append(float(v))
        wts.append(float(w))
        cnt.append(1)
        while len(vals) > 1 and vals[-2] < vals[-1]:
            w_new = wts[-2] + wts[-1]
            vals[-2] = (vals[-2] * wts[-2] + vals[-1] * wts[-1]) / w_new
            wts[-2] = w_new
            cnt[-2] += cnt[-1]
            del vals[-1], wts[-1], cnt[-1]
    return np.repeat(vals, cnt)


def grenander_fit(sample: PValueSample) -> MonotoneDensity:
    """Non-increasing density MLE: left derivative of the least concave
    majorant of the empirical CDF, anchored at (0, 0) and (1, 1).

    Knot candidates are 0, the distinct sample values, and 1.  Values equal
    to 0 contribute their mass to the first interval (a point mass at the
    origin has no density representation).
    """
    if sample.m < 1:
        raise ValidationError("grenander_fit requires at least one p-value")
    m = sample.m
    uniq, counts = np.unique(sample.values, return_counts=True)
    cum = np.cumsum(counts).astype(float)
    if uniq[0] == 0.0:
        uniq, cum = uniq[1:], cum[1:]
    if uniq.size == 0 or uniq[-1] < 1.0:
        uniq = np.append(uniq, 1.0)
        cum = np.append(cum, m)
    xs = np.concatenate(([0.0], uniq))
    ys = np.concatenate(([0.0], cum / m))
    dx = np.diff(xs)
    slopes = _pava_non_increasing(np.diff(ys) / dx, dx)
    # collapse intervals pooled to the same height into single knots
    keep = np.nonzero(np.diff(slopes))[0]
    knots = np.concatenate(([0.0], xs[1:][keep], [1.0]))
    heights = np.concatenate((slopes[keep], [slopes[-1]]))
    return MonotoneDensity(knots=knots, heights=heights)


def density_eval(d: MonotoneDensity, t: float) -> float:
    """Density value at t; intervals are closed on the right, f(0) = first height."""
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"t must lie in [0, 1], got {t}")
    j = int(np.searchsorted(d.knots, t, side="left")) - 1
    return float(d.heights[max(j, 0)])


def lfdr_hat(pi0: Pi0Estimate | float, d: MonotoneDensity, t: float) -> float:
    """Estimated local fdr pi0_hat / f_hat(t); +inf where the density is 0."""
    pi0_value = pi0.value if isinstance(pi0, Pi0Estimate) else float(pi0)
    f = density_eval(d, t)
    return math.inf if f == 0.0 else pi0_value / f


def _upper_quantile(t: float) -> float:
    # Phi^{-1}(1 - t) evaluated as -Phi^{-1}(t) so small t keeps full precision
    return float(-ndtri(t))


def density_ratio(kind: ConfigKind, t: float) -> float:
    """Average non-null to null density ratio at t for a mean configuration.

    Each shifted Gaussian contributes phi(z - mu)/phi(z) = exp(mu*z - mu^2/2)
    at z = Phi^{-1}(1 - t).
    """
    z = _upper_quantile(t)
    mus = MEAN_BLOCKS[kind]
    return float(np.mean([math.exp(mu * z - mu * mu / 2.0) for mu in mus]))


def true_lfdr(config: AltConfig, t: float) -> float:
    """Closed-form local fdr of the Gaussian mixture at p-value t."""
    if not 0.0 < t < 1.0:
        raise ValidationError(f"t must lie in (0, 1), got {t}")
    pi0 = config.pi0
    if pi0 == 1.0:
        return 1.0
    return pi0 / (pi0 + (1.0 - pi0) * density_ratio(config.kind, t))


def oracle_threshold(config: AltConfig, q: float) -> float:
    """The p-value t* at which the true lfdr equals q.

    The lfdr is strictly increasing in t for these configurations, so t* is
    unique; it is found by bisection until |lfdr(t*) - q| <= 1e-8.
    """
    if not 0.0 < q < 1.0:
        raise ValidationError(f"q must lie in (0, 1), got {q}")
    if not 0.0 < config.pi0 < 1.0:
        raise NoRootError(f"lfdr is constant for pi0 = {config.pi0}; no threshold exists")
    lo, hi = 1e-16, 1.0 - 1e-16
    if not true_lfdr(config, lo) < q < true_lfdr(config, hi):
        raise NoRootError(f"no t in (0, 1) attains lfdr = {q}")
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if true_lfdr(config, mid) < q:
            lo = mid
        else:
            hi = mid
    t_star = 0.5 * (lo + hi)
    if abs(true_lfdr(config, t_star) - q) > 1e-8:
        raise NoRootError(f"bisection failed to attain lfdr = {q}")
    return t_star


INV_E = math.exp(-1.0)


def sellke_alpha(t: float) -> float:
    """Lower bound on the posterior type-I-error probability of a p-value t
    under equal prior odds: t log(1/t) / (1/e + t log(1/t)), for t < 1/e.
    """
    if not 0.0 < t < INV_E:
        raise ValidationError(f"t must lie in (0, 1/e), got {t}")
    s = t * math.log(1.0 / t)
    return s / (INV_E + s)


def sellke_alpha_pi0(t: float, pi0_hat: float) -> float:
    """Calibration curve with the equal-odds assumption replaced by pi0_hat."""
    if not 0.0 < t < INV_E:
        raise ValidationError(f"t must lie in (0, 1/e), got {t}")
    if not 0.0 < pi0_hat < 1.0:
        raise ValidationError(f"pi0_hat must lie in (0, 1), got {pi0_hat}")
    s = t * math.log(1.0 / t)
    return s / (INV_E * (1.0 - pi0_hat) / pi0_hat + s)
