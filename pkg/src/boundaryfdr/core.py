"""Shared domain types and ordering utilities.

All indices exposed by these types are 0-based positions into the original
sample; ranks are 1-based counts (rank k corresponds to the k-th order
statistic, with the convention that the 0-th order statistic is 0).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping

import numpy as np


class ValidationError(ValueError):
    """Raised when an input value violates a documented precondition."""


class ConfigurationError(ValueError):
    """Raised when a procedure or simulation configuration is inconsistent."""


class Family(Enum):
    SL = "sl"
    BH = "bh"


class Adjustment(Enum):
    NONE = "none"
    TWO_STAGE = "two_stage"
    STOREY_FIXED = "storey_fixed"
    STOREY_ADAPTIVE = "storey_adaptive"
    LSL = "lsl"
    ORACLE = "oracle"


def _as_readonly_float_array(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValidationError("p-values must be a one-dimensional sequence")
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PValueSample:
    """A vector of p-values with optional ground-truth null flags and labels.

    ``truth[i]`` is True when hypothesis i is a true null.  ``meta`` carries
    provenance (file path, skipped rows, sidedness convention) and is never
    interpreted by the procedures themselves.
    """

    values: np.ndarray
    truth: np.ndarray | None = None
    labels: tuple[str, ...] | None = None
    meta: Mapping[str, Any] | None = None

    def __post_init__(self):
        arr = _as_readonly_float_array(self.values)
        bad = np.nonzero(~((arr >= 0.0) & (arr <= 1.0)))[0]
        if bad.size:
            raise ValidationError(
                f"p-value at index {bad[0]} is {arr[bad[0]]!r}, outside [0, 1]"
            )
        object.__setattr__(self, "values", arr)
        if self.truth is not None:
            t = np.asarray(self.truth, dtype=bool).copy()
            if t.shape != arr.shape:
                raise ValidationError("truth must have the same length as values")
            t.flags.writeable = False
            object.__setattr__(self, "truth", t)
        if self.labels is not None:
            labels = tuple(str(x) for x in self.labels)
            if len(labels) != arr.size:
                raise ValidationError("labels must have the same length as values")
            object.__setattr__(self, "labels", labels)

    @property
    def m(self) -> int:
        return int(self.values.size)

    def m0(self) -> int:
        """Number of true nulls; requires ground truth."""
        if self.truth is None:
            raise ValidationError("sample carries no ground-truth labels")
        return int(self.truth.sum())


@dataclass(frozen=True)
class OrderedSample:
    """Order statistics of a sample plus the rank -> original index map.

    Ties are broken by ascending original index (stable sort), so every
    downstream procedure is deterministic on data with ties.
    """

    sorted_values: np.ndarray
    permutation: np.ndarray

    def __post_init__(self):
        sv = _as_readonly_float_array(self.sorted_values)
        perm = np.asarray(self.permutation, dtype=np.intp).copy()
        if perm.shape != sv.shape:
            raise ValidationError("permutation must have the same length as sorted_values")
        if sv.size and np.any(np.diff(sv) < 0):
            raise ValidationError("sorted_values must be non-decreasing")
        if sv.size and not np.array_equal(np.sort(perm), np.arange(sv.size)):
            raise ValidationError("permutation must be a bijection on 0..m-1")
        perm.flags.writeable = False
        object.__setattr__(self, "sorted_values", sv)
        object.__setattr__(self, "permutation", perm)

    @property
    def m(self) -> int:
        return int(self.sorted_values.size)

    def order_statistic(self, k: int) -> float:
        """p_(k) for k in 0..m, with p_(0) = 0."""
        if not 0 <= k <= self.m:
            raise ValidationError(f"rank {k} out of range 0..{self.m}")
        return 0.0 if k == 0 else float(self.sorted_values[k - 1])


@dataclass(frozen=True)
class RejectionOutcome:
    """Result of a rejection procedure.

    ``r`` rejections at threshold p_(r) (0 when nothing is rejected);
    ``boundary_index`` is the original index of the rank-r hypothesis, the
    one whose p-value sits on the rejection boundary.
    """

    r: int
    threshold: float
    boundary_index: int | None
    rejected: frozenset[int]
    stage_trace: Mapping[str, float] | None = None

    def __post_init__(self):
        if self.r < 0:
            raise ValidationError("rejection count must be non-negative")
        if len(self.rejected) != self.r:
            raise ValidationError("rejected set must have exactly r elements")
        if self.r == 0 and (self.threshold != 0.0 or self.boundary_index is not None):
            raise ValidationError("empty rejection must have threshold 0 and no boundary")


@dataclass(frozen=True)
class ProcedureSpec:
    """Declarative description of one rejection procedure.

    ``params`` holds the adjustment's tuning values: ``lambda`` (Storey),
    ``delta`` and ``start`` (adaptive Storey grid), ``reduced_level`` (use
    q/(1+q) in the two-stage procedures), ``uncapped`` (drop the p_(k) <= q
    domain restriction of plug-in SL), and ``pi0`` (oracle null proportion).
    """

    family: Family
    adjustment: Adjustment
    q: float
    params: Mapping[str, float] = field(default_factory=dict)
    label: str | None = None

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValidationError(f"q must lie in (0, 1), got {self.q}")
        lam = self.params.get("lambda")
        if lam is not None and not 0.0 <= lam < 1.0:
            raise ValidationError(f"lambda must lie in [0, 1), got {lam}")
        delta = self.params.get("delta")
        if delta is not None and not 0.0 < delta < 1.0:
            raise ValidationError(f"delta must lie in (0, 1), got {delta}")

    @property
    def name(self) -> str:
        """Canonical roster name, e.g. 'TSSL(q)', 'Storey(1/2)', 'BH-LSL'."""
        if self.label is not None:
            return self.label
        prefix = "" if self.family is Family.SL else "BH-"
        adj = self.adjustment
        if adj is Adjustment.NONE:
            return "SL" if self.family is Family.SL else "BH"
        if adj is Adjustment.TWO_STAGE:
            base = "TSSL" if self.family is Family.SL else "TST"
            return f"{base}(q')" if self.params.get("reduced_level") else f"{base}(q)"
        if adj is Adjustment.STOREY_FIXED:
            lam = self.params["lambda"]
            lam_txt = "1/2" if lam == 0.5 else ("q" if lam == self.q else f"{lam:g}")
            return f"{prefix}Storey({lam_txt})"
        if adj is Adjustment.STOREY_ADAPTIVE:
            start = self.params.get("start", self.q)
            start_txt = "q" if start == self.q else f"{start:g}"
            return f"{prefix}AS({self.params['delta']:g};{start_txt})"
        if adj is Adjustment.LSL:
            return f"{prefix}LSL"
        if adj is Adjustment.ORACLE:
            return f"{prefix}Oracle"
        raise ConfigurationError(f"unknown adjustment {adj!r}")


def order_sample(sample: PValueSample) -> OrderedSample:
    """Stable-sort a sample into its order statistics."""
    order = np.argsort(sample.values, kind="stable")
    return OrderedSample(sorted_values=sample.values[order], permutation=order)


def outcome_from_rank(
    ordered: OrderedSample,
    r: int,
    stage_trace: Mapping[str, float] | None = None,
) -> RejectionOutcome:
    """Build the outcome that rejects the hypotheses at ranks 1..r."""
    m = ordered.m
    if not 0 <= r <= m:
        raise ValidationError(f"rank {r} out of range 0..{m}")
    if r == 0:
        return RejectionOutcome(0, 0.0, None, frozenset(), stage_trace)
    rejected = frozenset(int(i) for i in ordered.permutation[:r])
    return RejectionOutcome(
        r=r,
        threshold=float(ordered.sorted_values[r - 1]),
        boundary_index=int(ordered.permutation[r - 1]),
        rejected=rejected,
        stage_trace=stage_trace,
    )
