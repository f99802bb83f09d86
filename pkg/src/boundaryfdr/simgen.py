"""Synthetic p-value generation for the Gaussian mean configurations.

One-sided p-values from unit-variance Gaussian test statistics whose means
follow either the alternating block (1.25, 2.5, 3.75, 5 cycling) or the
all-at-5 pattern, with optional equicorrelated noise.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .core import ConfigurationError, PValueSample, ValidationError
from .lfdr import MEAN_BLOCKS, AltConfig, ConfigKind


@dataclass(frozen=True)
class SimConfig:
    """One simulation setting: size, null proportion, mean pattern, noise."""

    m: int
    pi0: float
    kind: ConfigKind = "alternating"
    rho: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError(f"m must be at least 1, got {self.m}")
        if not 0.0 <= self.pi0 <= 1.0:
            raise ValidationError(f"pi0 must lie in [0, 1], got {self.pi0}")
        if self.kind not in MEAN_BLOCKS:
            raise ValidationError(f"unknown configuration kind {self.kind!r}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValidationError(f"rho must lie in [0, 1], got {self.rho}")
        if self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")

    @property
    def m0(self) -> int:
        return round(self.pi0 * self.m)

    @property
    def m1(self) -> int:
        return self.m - self.m0

    @property
    def alt_config(self) -> AltConfig:
        return AltConfig(kind=self.kind, pi0=self.pi0)


def mean_vector(config: SimConfig) -> np.ndarray:
    """Means of the test statistics: m1 non-null entries followed by zeros."""
    m1 = config.m1
    if config.kind == "alternating" and m1 % 4 != 0:
        raise ConfigurationError(
            f"alternating configuration needs a multiple of 4 non-nulls, got m1={m1}"
        )
    block = np.array(MEAN_BLOCKS[config.kind])
    mu = np.zeros(config.m)
    if m1:
        mu[:m1] = np.resize(block, m1)
    return mu


def _rng_for(config: SimConfig, replication: int) -> np.random.Generator:
    # randomness is a pure function of (seed, replication): parallel and
    # serial execution see identical streams
    return np.random.default_rng(np.random.SeedSequence(entropy=(config.seed, replication)))


def sample_pvalues(config: SimConfig, replication: int) -> PValueSample:
    """Draw one replication of one-sided p-values.

    Z_i = mu_i + sqrt(rho) W + sqrt(1 - rho) eps_i with a shared W and
    i.i.d. eps, then p_i = 1 - Phi(Z_i).  truth[i] marks the nulls.
    """
    if replication < 0:
        raise ValidationError("replication index must be non-negative")
    mu = mean_vector(config)
    rng = _rng_for(config, replication)
    w = rng.standard_normal()
    eps = rng.standard_normal(config.m)
    z = mu + np.sqrt(config.rho) * w + np.sqrt(1.0 - config.rho) * eps
    # 1 - Phi(z) computed as Phi(-z) to keep precision in the small-p tail
    return PValueSample(values=ndtr(-z), truth=(mu == 0.0))
