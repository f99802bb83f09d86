"""Boundary-FDR multiple testing procedures and simulation tooling."""

__version__ = "0.1.0"

from .core import (
    Adjustment,
    ConfigurationError,
    Family,
    OrderedSample,
    PValueSample,
    ProcedureSpec,
    RejectionOutcome,
    ValidationError,
    order_sample,
    outcome_from_rank,
)
from .lfdr import (
    AltConfig,
    MonotoneDensity,
    NoRootError,
    density_eval,
    grenander_fit,
    lfdr_hat,
    oracle_threshold,
    sellke_alpha,
    sellke_alpha_pi0,
    true_lfdr,
)
from .pi0 import Pi0Estimate, adaptive_storey_pi0, lsl_pi0, storey_pi0
from .procedures import (
    DomainCap,
    PluginPolicy,
    bh,
    bh_plugin,
    run_procedure,
    sl,
    sl_plugin,
    standard_roster,
    tssl,
    tst,
)
from .simgen import SimConfig, mean_vector, sample_pvalues

__all__ = [
    "Adjustment",
    "AltConfig",
    "ConfigurationError",
    "DomainCap",
    "Family",
    "MonotoneDensity",
    "NoRootError",
    "OrderedSample",
    "PValueSample",
    "Pi0Estimate",
    "PluginPolicy",
    "ProcedureSpec",
    "RejectionOutcome",
    "SimConfig",
    "ValidationError",
    "adaptive_storey_pi0",
    "bh",
    "bh_plugin",
    "density_eval",
    "grenander_fit",
    "lfdr_hat",
    "lsl_pi0",
    "mean_vector",
    "oracle_threshold",
    "order_sample",
    "outcome_from_rank",
    "run_procedure",
    "sample_pvalues",
    "sellke_alpha",
    "sellke_alpha_pi0",
    "sl",
    "sl_plugin",
    "standard_roster",
    "storey_pi0",
    "true_lfdr",
    "tssl",
    "tst",
]
