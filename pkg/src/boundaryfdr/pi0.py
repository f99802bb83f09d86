"""Null-proportion estimators: fixed-lambda Storey, adaptive Storey, lowest slope."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PValueSample, ValidationError, order_sample


@dataclass(frozen=True)
class Pi0Estimate:
    """An estimated proportion of true nulls.

    ``lambda_hat`` is set only by the Storey-type estimators.  ``trace``
    records the (tuning value, estimate) pairs visited by an adaptive scan.
    """

    value: float
    method: str
    lambda_hat: float | None = None
    trace: tuple[tuple[float, float], ...] | None = None


def oracle_pi0(pi0: float) -> Pi0Estimate:
    if not 0.0 < pi0 <= 1.0:
        raise ValidationError(f"oracle pi0 must lie in (0, 1], got {pi0}")
    return Pi0Estimate(value=float(pi0), method="oracle")


def storey_value(sorted_values: np.ndarray, lam: float) -> float:
    """(1 + #{p_i > lambda}) / (m (1 - lambda)) on a pre-sorted array."""
    m = sorted_values.size
    exceed = m - np.searchsorted(sorted_values, lam, side="right")
    return (1.0 + exceed) / (m * (1.0 - lam))


def storey_pi0(sample: PValueSample, lam: float) -> Pi0Estimate:
    """Storey estimator with a fixed exceedance threshold; not capped at 1."""
    if sample.m < 1:
        raise ValidationError("sample must contain at least one p-value")
    if not 0.0 <= lam < 1.0:
        raise ValidationError(f"lambda must lie in [0, 1), got {lam}")
    value = storey_value(np.sort(sample.values), lam)
    return Pi0Estimate(value=value, method="storey_fixed", lambda_hat=float(lam))


def adaptive_storey_pi0(sample: PValueSample, delta: float, start: float) -> Pi0Estimate:
    """Storey estimator with the threshold chosen by a grid stopping rule.

    Evaluates the estimate at start, start + delta, start + 2*delta, ...
    (grid points >= 1 are never visited) and stops at the first grid point
    whose estimate does not decrease relative to the previous one.  That
    grid point is the chosen threshold and its estimate is returned; if the
    estimates strictly decrease through the whole grid, the last grid point
    is chosen.
    """
    if sample.m < 1:
        raise ValidationError("sample must contain at least one p-value")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    if not 0.0 < start < 1.0:
        raise ValidationError(f"grid start must lie in (0, 1), got {start}")

    sorted_values = np.sort(sample.values)
    trace: list[tuple[float, float]] = []
    prev = math.inf
    lam = start
    step = 0
    while lam < 1.0:
        est = storey_value(sorted_values, lam)
        trace.append((lam, est))
        if est >= prev:
            break
        prev = est
        step += 1
        lam = start + step * delta
    lam_hat, value = trace[-1]
    return Pi0Estimate(
        value=value,
        method="storey_adaptive",
        lambda_hat=lam_hat,
        trace=tuple(trace),
    )


def lsl_m0(sorted_values: np.ndarray) -> tuple[int, tuple[tuple[float, float], ...]]:
    """Lowest-slope estimate of the number of true nulls on a sorted array.

    Slope i is (1 - p_(i)) / (m + 1 - i), the slope of the line through
    (m + 1, 1) and (i, p_(i)) with p_(0) = 0.  The scan stops at the first
    strict decrease; if none occurs the final slope is used.
    """
    m = sorted_values.size
    p = np.concatenate(([0.0], sorted_values))
    slopes = (1.0 - p) / (m + 1 - np.arange(m + 1))
    stop = m
    for i in range(1, m + 1):
        if slopes[i] < slopes[i - 1]:
            stop = i
            break
    trace = tuple((float(i), float(slopes[i])) for i in range(stop + 1))
    s = slopes[stop]
    m0 = m if s <= 0.0 else min(math.ceil(1.0 / s), m)
    return m0, trace


def lsl_pi0(sample: PValueSample) -> Pi0Estimate:
    """Lowest-slope estimator of the null proportion."""
    if sample.m < 1:
        raise ValidationError("sample must contain at least one p-value")
    ordered = order_sample(sample)
    m0, trace = lsl_m0(ordered.sorted_values)
    return Pi0Estimate(value=m0 / sample.m, method="lsl", trace=trace)
