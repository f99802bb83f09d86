"""Rejection procedures: support line, BH step-up, two-stage and plug-in variants.

Each procedure exists in two layers: a rank-level function operating on a
pre-sorted p-value array (used by the Monte Carlo engine, which sorts once
per replication), and a sample-level wrapper returning a full
:class:`~boundaryfdr.core.RejectionOutcome`.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

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
from .pi0 import Pi0Estimate, adaptive_storey_pi0, lsl_m0, storey_value

PI0_FLOOR_DEFAULT = 1e-12


class DomainCap(Enum):
    CAP_AT_Q = "cap_at_q"
    UNCAPPED = "uncapped"


@dataclass(frozen=True)
class PluginPolicy:
    """How a plug-in support-line procedure treats its estimated level.

    ``cap_at_q`` restricts the candidate thresholds to p-values at most q;
    the floor protects the division q / pi0_hat (the estimators used here
    always produce positive values, so it is defensive only).
    """

    domain_cap: DomainCap = DomainCap.CAP_AT_Q
    pi0_floor: float = PI0_FLOOR_DEFAULT

    def __post_init__(self):
        if self.pi0_floor <= 0.0:
            raise ValidationError("pi0_floor must be positive")


# ---------------------------------------------------------------------------
# rank-level procedures on sorted arrays
# ---------------------------------------------------------------------------

def support_line_rank(sorted_values: np.ndarray, slope: float, kmax: int | None = None) -> int:
    """Largest maximizer of slope*k - p_(k) over k = 0..kmax, with p_(0) = 0."""
    m = sorted_values.size
    if kmax is None:
        kmax = m
    obj = slope * np.arange(kmax + 1)
    obj[1:] -= sorted_values[:kmax]
    # np.argmax returns the first maximizer; ties go to the largest k
    return int(kmax - np.argmax(obj[::-1]))

def step_up_rank(sorted_values: np.ndarray, level: float) -> int:
    """Largest k with p_(k) <= level*k/m (0 if none)."""
    m = sorted_values.size
    hits = np.nonzero(sorted_values <= level * np.arange(1, m + 1) / m)[0]
    return int(hits[-1] + 1) if hits.size else 0

def two_stage_sl_ranks(sorted_values: np.ndarray, level: float) -> tuple[int, int, float | None]:
    """Stage-1 and final ranks of the two-stage support line at one level.

    Returns (r1, r, stage-2 slope).  When r1 is 0 or m the procedure stops
    after stage 1 and the slope is None.
    """
    m = sorted_values.size
    r1 = support_line_rank(sorted_values, level / m)
    if r1 == 0 or r1 == m:
        return r1, r1, None
    slope2 = level / (m - r1)
    return r1, support_line_rank(sorted_values, slope2), slope2

def two_stage_bh_ranks(sorted_values: np.ndarray, level: float) -> tuple[int, int, float | None]:
    """Stage-1 and final ranks of the two-stage step-up at one level."""
    m = sorted_values.size
    r1 = step_up_rank(sorted_values, level)
    if r1 == 0 or r1 == m:
        return r1, r1, None
    level2 = level * m / (m - r1)
    return r1, step_up_rank(sorted_values, level2), level2

def plugin_sl_rank(
    sorted_values: np.ndarray, q: float, pi0_value: float, policy: PluginPolicy
) -> int:
    """Support line at level q / pi0_hat, optionally restricted to p_(k) <= q."""
    m = sorted_values.size
    pi0_tilde = max(pi0_value, policy.pi0_floor)
    slope = q / (pi0_tilde * m)
    if policy.domain_cap is DomainCap.CAP_AT_Q:
        kmax = int(np.searchsorted(sorted_values, q, side="right"))
        return support_line_rank(sorted_values, slope, kmax=kmax)
    return support_line_rank(sorted_values, slope)

def plugin_bh_level(q: float, pi0_value: float, floor: float = PI0_FLOOR_DEFAULT) -> float:
    """Adjusted step-up level q / pi0_hat, clamped to at most 1."""
    return min(q / max(pi0_value, floor), 1.0)


# ---------------------------------------------------------------------------
# sample-level procedures
# ---------------------------------------------------------------------------

def _check_inputs(sample: PValueSample, q: float) -> OrderedSample:
    if sample.m < 1:
        raise ValidationError("procedures require at least one p-value")
    if not 0.0 < q < 1.0:
        raise ValidationError(f"q must lie in (0, 1), got {q}")
    return order_sample(sample)


def sl(sample: PValueSample, q: float) -> RejectionOutcome:
    """Support line procedure: reject up to the largest maximizer of qk/m - p_(k)."""
    ordered = _check_inputs(sample, q)
    r = support_line_rank(ordered.sorted_values, q / sample.m)
    return outcome_from_rank(ordered, r)


def bh(sample: PValueSample, q: float) -> RejectionOutcome:
    """Benjamini-Hochberg step-up at level q."""
    ordered = _check_inputs(sample, q)
    return outcome_from_rank(ordered, step_up_rank(ordered.sorted_values, q))


def tssl(sample: PValueSample, level: float) -> RejectionOutcome:
    """Two-stage support line.

    Stage 1 runs the support line at ``level``; if it rejects nothing or
    everything the procedure stops there.  Otherwise stage 2 re-runs the
    support line with the slope inflated to level/(m - R1), i.e. at level
    level*m/(m - R1).
    """
    ordered = _check_inputs(sample, level)
    r1, r, slope2 = two_stage_sl_ranks(ordered.sorted_values, level)
    m = sample.m
    trace = {"r1": float(r1), "pi0_used": (m - r1) / m}
    if slope2 is not None:
        trace["stage2_slope"] = slope2
    return outcome_from_rank(ordered, r, stage_trace=trace)


def tst(sample: PValueSample, level: float) -> RejectionOutcome:
    """Two-stage step-up: BH, then BH again at level*m/(m - R1)."""
    ordered = _check_inputs(sample, level)
    r1, r, level2 = two_stage_bh_ranks(ordered.sorted_values, level)
    m = sample.m
    trace = {"r1": float(r1), "pi0_used": (m - r1) / m}
    if level2 is not None:
        trace["stage2_level"] = level2
    return outcome_from_rank(ordered, r, stage_trace=trace)


def sl_plugin(
    sample: PValueSample,
    q: float,
    pi0: Pi0Estimate,
    policy: PluginPolicy = PluginPolicy(),
) -> RejectionOutcome:
    """Support line at the adjusted level q / pi0_hat."""
    if pi0.value < 0:
        raise ValidationError("pi0 estimate must be non-negative")
    ordered = _check_inputs(sample, q)
    r = plugin_sl_rank(ordered.sorted_values, q, pi0.value, policy)
    return outcome_from_rank(ordered, r, stage_trace={"pi0_used": pi0.value})


def bh_plugin(sample: PValueSample, q: float, pi0: Pi0Estimate) -> RejectionOutcome:
    """BH step-up at the adjusted level q / pi0_hat (clamped to 1)."""
    if pi0.value < 0:
        raise ValidationError("pi0 estimate must be non-negative")
    ordered = _check_inputs(sample, q)
    level = plugin_bh_level(q, pi0.value)
    r = step_up_rank(ordered.sorted_values, level)
    return outcome_from_rank(
        ordered, r, stage_trace={"pi0_used": pi0.value, "adjusted_level": level}
    )


# ---------------------------------------------------------------------------
# roster dispatch
# ---------------------------------------------------------------------------

def _two_stage_level(spec: ProcedureSpec) -> float:
    return spec.q / (1.0 + spec.q) if spec.params.get("reduced_level") else spec.q


def _plugin_policy(spec: ProcedureSpec) -> PluginPolicy:
    cap = DomainCap.UNCAPPED if spec.params.get("uncapped") else DomainCap.CAP_AT_Q
    return PluginPolicy(domain_cap=cap)


def compile_procedure(spec: ProcedureSpec) -> Callable[[np.ndarray], tuple[int, dict]]:
    """Turn a spec into a function of sorted p-values returning (rank, trace).

    The trace always contains ``pi0_used`` (1.0 for the unadjusted
    procedures).  This is the entry point the Monte Carlo engine uses so
    each replication is sorted exactly once for the whole roster.
    """
    family, adj, q = spec.family, spec.adjustment, spec.q

    if adj is Adjustment.NONE:
        if family is Family.SL:
            return lambda sp: (support_line_rank(sp, q / sp.size), {"pi0_used": 1.0})
        return lambda sp: (step_up_rank(sp, q), {"pi0_used": 1.0})

    if adj is Adjustment.TWO_STAGE:
        level = _two_stage_level(spec)
        ranks = two_stage_sl_ranks if family is Family.SL else two_stage_bh_ranks

        def run_two_stage(sp: np.ndarray) -> tuple[int, dict]:
            r1, r, _ = ranks(sp, level)
            return r, {"pi0_used": (sp.size - r1) / sp.size, "r1": float(r1)}

        return run_two_stage

    if adj in (Adjustment.STOREY_FIXED, Adjustment.STOREY_ADAPTIVE, Adjustment.LSL):
        if adj is Adjustment.STOREY_FIXED:
            if "lambda" not in spec.params:
                raise ConfigurationError("storey_fixed requires params['lambda']")
            lam = spec.params["lambda"]
            estimate = lambda sp: storey_value(sp, lam)
        elif adj is Adjustment.STOREY_ADAPTIVE:
            if "delta" not in spec.params:
                raise ConfigurationError("storey_adaptive requires params['delta']")
            delta = spec.params["delta"]
            start = spec.params.get("start", q)

            def estimate(sp: np.ndarray) -> float:
                est = adaptive_storey_pi0(PValueSample(sp), delta, start)
                return est.value
        else:
            estimate = lambda sp: lsl_m0(sp)[0] / sp.size

        if family is Family.SL:
            policy = _plugin_policy(spec)

            def run_plugin_sl(sp: np.ndarray) -> tuple[int, dict]:
                pi0_value = estimate(sp)
                r = plugin_sl_rank(sp, q, pi0_value, policy)
                return r, {"pi0_used": pi0_value}

            return run_plugin_sl

        def run_plugin_bh(sp: np.ndarray) -> tuple[int, dict]:
            pi0_value = estimate(sp)
            r = step_up_rank(sp, plugin_bh_level(q, pi0_value))
            return r, {"pi0_used": pi0_value}

        return run_plugin_bh

    if adj is Adjustment.ORACLE:
        if "pi0" not in spec.params:
            raise ConfigurationError("oracle adjustment requires params['pi0']")
        pi0 = spec.params["pi0"]
        if not 0.0 < pi0 <= 1.0:
            raise ConfigurationError(f"oracle pi0 must lie in (0, 1], got {pi0}")
        if family is Family.SL:
            # level q/pi0 may exceed 1; the support-line objective stays valid
            return lambda sp: (
                support_line_rank(sp, q / (pi0 * sp.size)),
                {"pi0_used": pi0},
            )
        return lambda sp: (
            step_up_rank(sp, plugin_bh_level(q, pi0)),
            {"pi0_used": pi0},
        )

    raise ConfigurationError(f"unknown procedure combination {family!r}/{adj!r}")


def run_procedure(spec: ProcedureSpec, sample: PValueSample) -> RejectionOutcome:
    """Dispatch a declarative procedure spec against a sample."""
    if sample.m < 1:
        raise ValidationError("procedures require at least one p-value")
    ordered = order_sample(sample)
    r, trace = compile_procedure(spec)(ordered.sorted_values)
    return outcome_from_rank(ordered, r, stage_trace=trace)


def standard_roster(
    family: Family,
    q: float,
    true_pi0: float | None = None,
    include_oracle: bool = True,
) -> list[ProcedureSpec]:
    """The ten-procedure comparison roster at tolerance q.

    Two-stage at q and at the reduced level q/(1+q), Storey with fixed
    lambda 1/2 and lambda q, adaptive Storey with delta 0.1 and 0.01
    starting at q plus delta 0.1 starting at 0.5, lowest slope, the
    unadjusted procedure, and (when the true null proportion is known)
    the oracle run at level q / pi0.
    """
    sl_family = family is Family.SL
    two_stage = "TSSL" if sl_family else "TST"
    pre = "" if sl_family else "BH-"
    roster = [
        ProcedureSpec(family, Adjustment.TWO_STAGE, q, label=f"{two_stage}(q)"),
        ProcedureSpec(
            family, Adjustment.TWO_STAGE, q, {"reduced_level": 1.0}, label=f"{two_stage}(q')"
        ),
        ProcedureSpec(
            family, Adjustment.STOREY_FIXED, q, {"lambda": 0.5}, label=f"{pre}Storey(1/2)"
        ),
        ProcedureSpec(
            family, Adjustment.STOREY_FIXED, q, {"lambda": q}, label=f"{pre}Storey(q)"
        ),
        ProcedureSpec(
            family, Adjustment.STOREY_ADAPTIVE, q, {"delta": 0.1}, label=f"{pre}AS(0.1;q)"
        ),
        ProcedureSpec(
            family, Adjustment.STOREY_ADAPTIVE, q, {"delta": 0.01}, label=f"{pre}AS(0.01;q)"
        ),
        ProcedureSpec(
            family,
            Adjustment.STOREY_ADAPTIVE,
            q,
            {"delta": 0.1, "start": 0.5},
            label=f"{pre}AS(0.1;0.5)",
        ),
        ProcedureSpec(family, Adjustment.LSL, q, label=f"{pre}LSL"),
        ProcedureSpec(family, Adjustment.NONE, q, label="SL" if sl_family else "BH"),
    ]
    if include_oracle:
        if true_pi0 is None:
            raise ConfigurationError("oracle roster entry requires the true pi0")
        roster.append(
            ProcedureSpec(
                family, Adjustment.ORACLE, q, {"pi0": true_pi0}, label=f"{pre}Oracle"
            )
        )
    return roster
