"""Population-level two-stage thresholds and the large-m boundary lfdr.

For the Gaussian mean mixtures the average p-value cdf and density are
available in closed form, so the population analogues of the two-stage
support-line thresholds, and the limit the boundary lfdr converges to, can
be computed to high precision and compared against simulation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .core import ValidationError
from .lfdr import MEAN_BLOCKS, AltConfig, density_ratio, true_lfdr
from .simgen import SimConfig, sample_pvalues


class DegenerateSolutionError(ValueError):
    """Raised when a threshold objective has no interior minimizer."""


@dataclass(frozen=True)
class PopulationModel:
    """Closed-form mixture cdf and density for a mean configuration."""

    config: AltConfig

    @property
    def pi0(self) -> float:
        return self.config.pi0

    def cdf(self, t: float) -> float:
        """Average p-value cdf: pi0 * t plus the mean shifted-Gaussian cdf."""
        if not 0.0 <= t <= 1.0:
            raise ValidationError(f"t must lie in [0, 1], got {t}")
        if t in (0.0, 1.0):
            return t
        pi0 = self.pi0
        z = ndtri(t)
        alt = float(np.mean([ndtr(mu + z) for mu in MEAN_BLOCKS[self.config.kind]]))
        return pi0 * t + (1.0 - pi0) * alt

    def pdf(self, t: float) -> float:
        """Average p-value density; +inf at t = 0 when non-nulls are present."""
        if not 0.0 <= t <= 1.0:
            raise ValidationError(f"t must lie in [0, 1], got {t}")
        pi0 = self.pi0
        if pi0 == 1.0:
            return 1.0
        if t == 0.0:
            return math.inf
        if t == 1.0:
            return pi0
        return pi0 + (1.0 - pi0) * density_ratio(self.config.kind, t)

    def pdf_grid(self, ts: np.ndarray) -> np.ndarray:
        """Vectorized pdf over interior points (used by the grid scan)."""
        pi0 = self.pi0
        if pi0 == 1.0:
            return np.ones_like(ts)
        z = -ndtri(ts)
        mus = np.array(MEAN_BLOCKS[self.config.kind])
        ratio = np.mean(np.exp(np.outer(mus, z) - (mus * mus / 2.0)[:, None]), axis=0)
        return pi0 + (1.0 - pi0) * ratio


def avg_cdf(model: PopulationModel, t: float) -> tuple[float, float]:
    """(cdf, density) of the mixture at t."""
    return model.cdf(t), model.pdf(t)


def _solve_density_equals(model: PopulationModel, target: float) -> float:
    """Unique t with pdf(t) = target; the density is strictly decreasing."""
    lo, hi = 1e-14, 1.0 - 1e-14
    if not model.pdf(lo) > target > model.pdf(hi):
        raise DegenerateSolutionError(
            f"density never crosses {target}; objective is minimized at the boundary"
        )
    # grid scan with step 1e-4 to bracket the crossing, then bisection
    grid = np.arange(1e-4, 1.0, 1e-4)
    above = model.pdf_grid(grid) > target
    if not above[0]:
        hi = grid[0]
    elif above[-1]:
        lo = grid[-1]
    else:
        idx = int(np.argmin(above))  # first grid point at or below the target
        lo, hi = grid[idx - 1], grid[idx]
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if model.pdf(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def population_thresholds(model: PopulationModel, q: float) -> tuple[float, float]:
    """Interior minimizers of t - q*cdf(t) and its stage-2 analogue.

    Stage 1 minimizes t - q F(t), i.e. solves f(t) = 1/q; stage 2 repeats
    with q inflated to q / (1 - F(t1)).  Raises when either objective is
    minimized at the boundary of [0, 1].
    """
    if not 0.0 < q < 1.0:
        raise ValidationError(f"q must lie in (0, 1), got {q}")
    t1 = _solve_density_equals(model, 1.0 / q)
    c2 = (1.0 - model.cdf(t1)) / q
    t2 = _solve_density_equals(model, c2)
    return t1, t2


def boundary_lfdr_limit(model: PopulationModel, q: float) -> float:
    """The value q*pi0 / (1 - F(t1*)) the boundary lfdr approaches as m grows;
    it never exceeds q/(1-q) when the average non-null density is
    non-increasing.
    """
    t1, _ = population_thresholds(model, q)
    denom = 1.0 - model.cdf(t1)
    if denom <= 0.0:
        raise DegenerateSolutionError("average cdf reaches 1 at the stage-1 threshold")
    return q * model.pi0 / denom


def empirical_two_stage_thresholds(values: np.ndarray, q: float) -> tuple[float, float]:
    """Minimizers of t - q F_m(t) and the stage-2 analogue over the jump points.

    The objectives change only at {0} and the sample values, so the search
    is over that finite candidate set, with ties resolved toward the
    largest candidate.  The first threshold coincides with the
    support-line rejection threshold at level q; the second with the
    two-stage procedure's, whenever its stage 1 rejects strictly between
    0 and m hypotheses.
    """
    sorted_values = np.sort(np.asarray(values, dtype=float))
    m = sorted_values.size
    if m < 1:
        raise ValidationError("need at least one p-value")
    ts = np.concatenate(([0.0], sorted_values))
    ecdf = np.searchsorted(sorted_values, ts, side="right") / m

    def argmin_largest(objective: np.ndarray) -> int:
        return int(objective.size - 1 - np.argmin(objective[::-1]))

    tau1 = float(ts[argmin_largest(ts - q * ecdf)])
    f_tau1 = float(np.searchsorted(sorted_values, tau1, side="right")) / m
    if f_tau1 >= 1.0:
        return tau1, tau1
    tau2 = float(ts[argmin_largest(ts - (q / (1.0 - f_tau1)) * ecdf)])
    return tau1, tau2


def convergence_probe(
    model: PopulationModel,
    q: float,
    m_list: list[int],
    n_reps: int,
    seed: int = 0,
) -> list[dict]:
    """Mean |lfdr(tau2) - limit| per sample size.

    The gaps should shrink as m grows; lfdr is evaluated as 0 at a zero
    threshold (its limit from the right).
    """
    if n_reps < 1:
        raise ValidationError("n_reps must be at least 1")
    if not 0.0 < model.pi0 < 1.0:
        raise DegenerateSolutionError(
            "probe requires a non-trivial mixture (0 < pi0 < 1)"
        )
    limit = boundary_lfdr_limit(model, q)
    rows = []
    for m in m_list:
        sim = SimConfig(m=m, pi0=model.pi0, kind=model.config.kind, rho=0.0, seed=seed)
        gaps = np.empty(n_reps)
        for rep in range(n_reps):
            sample = sample_pvalues(sim, rep)
            _, tau2 = empirical_two_stage_thresholds(sample.values, q)
            if tau2 <= 0.0:
                lfdr_val = 0.0
            else:
                lfdr_val = true_lfdr(model.config, min(tau2, 1.0 - 1e-16))
            gaps[rep] = abs(lfdr_val - limit)
        rows.append({"m": m, "mean_gap": float(np.mean(gaps)), "limit": limit, "q": q})
    return rows
