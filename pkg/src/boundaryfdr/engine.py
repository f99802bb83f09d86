"""Monte Carlo experiment runner.

Estimates boundary FDR, FDR, power, and the distributions of estimated null
proportions and local fdr values across procedure rosters, plus executable
checks of the finite-sample probability statements behind the procedures.

Replications are reproducible: all randomness derives from
(config.seed, replication index), and aggregation runs over the records in
replication order, so results never depend on the worker count.
"""
from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .core import Adjustment, PValueSample, ProcedureSpec, ValidationError
from .lfdr import NoRootError, grenander_fit, lfdr_hat, oracle_threshold, true_lfdr
from .procedures import compile_procedure, support_line_rank
from .simgen import SimConfig, mean_vector, sample_pvalues


@dataclass(frozen=True)
class ReplicationRecord:
    """Per-procedure result of a single simulated experiment."""

    r: int
    boundary_is_null: bool
    false_rejections: int
    true_rejections: int
    pi0_used: float
    threshold: float
    true_lfdr_at_threshold: float | None = None
    est_lfdr_at_threshold: float | None = None
    est_lfdr_at_oracle: float | None = None

    def __post_init__(self):
        if self.false_rejections + self.true_rejections != self.r:
            raise ValidationError("false + true rejections must equal r")
        if self.boundary_is_null and self.r == 0:
            raise ValidationError("a null boundary rejection requires r > 0")


@dataclass(frozen=True)
class ProcedureMetrics:
    """Aggregates of one procedure over all replications."""

    procedure: str
    bfdr_hat: float
    bfdr_se: float
    fdr_hat: float
    power: float | None
    relative_power: float | None
    pi0_q25: float
    pi0_median: float
    pi0_q75: float
    pi0_mean: float
    true_lfdr_q25: float | None = None
    true_lfdr_median: float | None = None
    true_lfdr_q75: float | None = None
    est_lfdr_q25: float | None = None
    est_lfdr_median: float | None = None
    est_lfdr_q75: float | None = None
    oracle_lfdr_q25: float | None = None
    oracle_lfdr_median: float | None = None
    oracle_lfdr_q75: float | None = None


@dataclass(frozen=True)
class MetricsTable:
    """Per-procedure Monte Carlo summaries for one experiment."""

    rows: tuple[ProcedureMetrics, ...]
    n_reps: int

    def __getitem__(self, procedure: str) -> ProcedureMetrics:
        for row in self.rows:
            if row.procedure == procedure:
                return row
        raise KeyError(procedure)

    def to_rows(self) -> list[dict]:
        return [dataclasses.asdict(row) for row in self.rows]


@dataclass(frozen=True)
class MonteCarloEstimate:
    """A Monte Carlo point estimate with its standard error."""

    value: float
    se: float
    n: int


def binomial_se(p_hat: float, n: int) -> float:
    return float(np.sqrt(p_hat * (1.0 - p_hat) / n))


# ---------------------------------------------------------------------------
# replication loop
# ---------------------------------------------------------------------------

def _oracle_cutoffs(sim: SimConfig, roster: list[ProcedureSpec]) -> list[float | None]:
    cutoffs: list[float | None] = []
    for spec in roster:
        try:
            cutoffs.append(oracle_threshold(sim.alt_config, spec.q))
        except NoRootError:
            cutoffs.append(None)
    return cutoffs


def _simulate_chunk(
    sim: SimConfig,
    roster: list[ProcedureSpec],
    start: int,
    stop: int,
    compute_lfdr: bool,
) -> list[np.ndarray]:
    """Run replications [start, stop) and return stacked per-field arrays."""
    compiled = [compile_procedure(spec) for spec in roster]
    cutoffs = _oracle_cutoffs(sim, roster) if compute_lfdr else None
    n_proc = len(roster)
    n = stop - start
    r_arr = np.zeros((n, n_proc), dtype=np.int64)
    bnull = np.zeros((n, n_proc), dtype=bool)
    v_arr = np.zeros((n, n_proc), dtype=np.int64)
    pi0_arr = np.zeros((n, n_proc))
    thr_arr = np.zeros((n, n_proc))
    tl_arr = np.full((n, n_proc), np.nan)
    el_arr = np.full((n, n_proc), np.nan)
    ol_arr = np.full((n, n_proc), np.nan)

    for i, rep in enumerate(range(start, stop)):
        sample = sample_pvalues(sim, rep)
        order = np.argsort(sample.values, kind="stable")
        sp = sample.values[order]
        null_sorted = sample.truth[order]
        cum_null = np.cumsum(null_sorted)
        fit = grenander_fit(sample) if compute_lfdr else None
        for j, proc in enumerate(compiled):
            r, info = proc(sp)
            r_arr[i, j] = r
            pi0_arr[i, j] = info["pi0_used"]
            if r > 0:
                bnull[i, j] = bool(null_sorted[r - 1])
                v_arr[i, j] = cum_null[r - 1]
                thr_arr[i, j] = sp[r - 1]
            if compute_lfdr:
                if r > 0:
                    t_eval = min(thr_arr[i, j], 1.0 - 1e-16)
                    if t_eval > 0.0:
                        tl_arr[i, j] = true_lfdr(sim.alt_config, t_eval)
                    el_arr[i, j] = lfdr_hat(info["pi0_used"], fit, thr_arr[i, j])
                if cutoffs[j] is not None:
                    ol_arr[i, j] = lfdr_hat(info["pi0_used"], fit, cutoffs[j])
    return [r_arr, bnull, v_arr, pi0_arr, thr_arr, tl_arr, el_arr, ol_arr]


def _run_replications(
    sim: SimConfig,
    roster: list[ProcedureSpec],
    n_reps: int,
    workers: int = 1,
    compute_lfdr: bool = False,
) -> list[np.ndarray]:
    if workers <= 1 or n_reps < 2 * workers:
        return _simulate_chunk(sim, roster, 0, n_reps, compute_lfdr)
    bounds = np.linspace(0, n_reps, workers + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_simulate_chunk, sim, roster, int(lo), int(hi), compute_lfdr)
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        chunks = [f.result() for f in futures]
    return [np.concatenate(parts, axis=0) for parts in zip(*chunks)]


def single_replication(
    sim: SimConfig,
    roster: list[ProcedureSpec],
    replication: int,
    compute_lfdr: bool = False,
) -> list[ReplicationRecord]:
    """Records of one replication, in roster order (for tests and debugging)."""
    fields = _simulate_chunk(sim, roster, replication, replication + 1, compute_lfdr)
    r_arr, bnull, v_arr, pi0_arr, thr_arr, tl_arr, el_arr, ol_arr = fields

    def opt(x: float) -> float | None:
        return None if np.isnan(x) else float(x)

    return [
        ReplicationRecord(
            r=int(r_arr[0, j]),
            boundary_is_null=bool(bnull[0, j]),
            false_rejections=int(v_arr[0, j]),
            true_rejections=int(r_arr[0, j] - v_arr[0, j]),
            pi0_used=float(pi0_arr[0, j]),
            threshold=float(thr_arr[0, j]),
            true_lfdr_at_threshold=opt(tl_arr[0, j]),
            est_lfdr_at_threshold=opt(el_arr[0, j]),
            est_lfdr_at_oracle=opt(ol_arr[0, j]),
        )
        for j in range(len(roster))
    ]


def _quartiles(values: np.ndarray) -> tuple[float | None, float | None, float | None]:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return None, None, None
    q25, q50, q75 = np.percentile(finite, [25.0, 50.0, 75.0])
    return float(q25), float(q50), float(q75)


def run_experiment(
    sim: SimConfig,
    roster: list[ProcedureSpec],
    n_reps: int,
    workers: int = 1,
    compute_lfdr: bool = False,
) -> MetricsTable:
    """Estimate per-procedure error rates and power over n_reps replications.

    bfdr_hat is the fraction of replications whose boundary (largest
    rejected) p-value belongs to a true null; fdr_hat averages the false
    discovery proportion V / max(r, 1); power averages the fraction of
    non-nulls rejected and is reported relative to the roster's oracle
    entry when one is present.
    """
    if n_reps < 1:
        raise ValidationError("n_reps must be at least 1")
    if not roster:
        raise ValidationError("roster must contain at least one procedure")
    mean_vector(sim)  # validate the configuration before spending any work
    r_arr, bnull, v_arr, pi0_arr, thr_arr, tl_arr, el_arr, ol_arr = _run_replications(
        sim, roster, n_reps, workers, compute_lfdr
    )
    m1 = sim.m1
    powers: list[float | None] = []
    for j in range(len(roster)):
        if m1 == 0:
            powers.append(None)
        else:
            powers.append(float(np.mean((r_arr[:, j] - v_arr[:, j]) / m1)))
    oracle_power: float | None = None
    for j, spec in enumerate(roster):
        if spec.adjustment is Adjustment.ORACLE:
            oracle_power = powers[j]
            break

    rows = []
    for j, spec in enumerate(roster):
        bfdr_hat = float(np.mean(bnull[:, j]))
        fdp = v_arr[:, j] / np.maximum(r_arr[:, j], 1)
        pi0_q25, pi0_med, pi0_q75 = _quartiles(pi0_arr[:, j])
        rel = None
        if powers[j] is not None and oracle_power:
            rel = powers[j] / oracle_power
        tq = _quartiles(tl_arr[:, j])
        eq = _quartiles(el_arr[:, j])
        oq = _quartiles(ol_arr[:, j])
        rows.append(
            ProcedureMetrics(
                procedure=spec.name,
                bfdr_hat=bfdr_hat,
                bfdr_se=binomial_se(bfdr_hat, n_reps),
                fdr_hat=float(np.mean(fdp)),
                power=powers[j],
                relative_power=rel,
                pi0_q25=pi0_q25,
                pi0_median=pi0_med,
                pi0_q75=pi0_q75,
                pi0_mean=float(np.mean(pi0_arr[:, j])),
                true_lfdr_q25=tq[0],
                true_lfdr_median=tq[1],
                true_lfdr_q75=tq[2],
                est_lfdr_q25=eq[0],
                est_lfdr_median=eq[1],
                est_lfdr_q75=eq[2],
                oracle_lfdr_q25=oq[0],
                oracle_lfdr_median=oq[1],
                oracle_lfdr_q75=oq[2],
            )
        )
    return MetricsTable(rows=tuple(rows), n_reps=n_reps)


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------

def respec_at_q(spec: ProcedureSpec, q: float) -> ProcedureSpec:
    """Re-derive a roster entry at a new tolerance.

    Tuning values that tracked the old q (a Storey lambda or adaptive-Storey
    grid start equal to it) follow the new one; everything else is kept.
    """
    params = dict(spec.params)
    if params.get("lambda") == spec.q:
        params["lambda"] = q
    if params.get("start") == spec.q:
        params["start"] = q
    return dataclasses.replace(spec, q=q, params=params)


def bfdr_curve(
    sim: SimConfig,
    roster: list[ProcedureSpec],
    q_grid: list[float],
    n_reps: int,
    workers: int = 1,
) -> list[dict]:
    """bFDR (and companions) per procedure across a grid of tolerances."""
    results: dict[str, list[dict]] = {}
    for q in q_grid:
        roster_q = [respec_at_q(spec, q) for spec in roster]
        table = run_experiment(sim, roster_q, n_reps, workers=workers)
        for row in table.rows:
            results.setdefault(row.procedure, []).append(
                {
                    "procedure": row.procedure,
                    "q": q,
                    "bfdr_hat": row.bfdr_hat,
                    "se": row.bfdr_se,
                    "fdr_hat": row.fdr_hat,
                    "power": row.power,
                }
            )
    out: list[dict] = []
    for procedure in sorted(results):
        out.extend(sorted(results[procedure], key=lambda r: r["q"]))
    return out


def corr_sweep(
    sim: SimConfig,
    rho_grid: list[float],
    roster: list[ProcedureSpec],
    n_reps: int,
    workers: int = 1,
) -> list[dict]:
    """bFDR and null-proportion-estimate quartiles across correlation values."""
    levels = {spec.name: spec.q for spec in roster}
    results: dict[str, list[dict]] = {}
    for rho in rho_grid:
        table = run_experiment(
            dataclasses.replace(sim, rho=rho), roster, n_reps, workers=workers
        )
        for row in table.rows:
            results.setdefault(row.procedure, []).append(
                {
                    "procedure": row.procedure,
                    "rho": rho,
                    "q": levels[row.procedure],
                    "bfdr_hat": row.bfdr_hat,
                    "se": row.bfdr_se,
                    "pi0_q25": row.pi0_q25,
                    "pi0_median": row.pi0_median,
                    "pi0_q75": row.pi0_q75,
                    "pi0_mean": row.pi0_mean,
                }
            )
    out: list[dict] = []
    for procedure in sorted(results):
        out.extend(sorted(results[procedure], key=lambda r: r["rho"]))
    return out


# ---------------------------------------------------------------------------
# executable probability checks
# ---------------------------------------------------------------------------

def uniform_boundary_probability(
    fixed_others: PValueSample,
    q: float,
    n_reps: int,
    seed: int = 0,
) -> MonteCarloEstimate:
    """Probability that an appended Uniform(0,1) p-value is the boundary rejection.

    The other m-1 p-values stay fixed; the support line at level q is run on
    the combined sample each time.  For q <= 1 the probability equals q/m
    exactly, for any choice of the fixed values.
    """
    if not 0.0 < q <= 1.0:
        raise ValidationError(f"q must lie in (0, 1], got {q}")
    if n_reps < 1:
        raise ValidationError("n_reps must be at least 1")
    fixed = np.sort(fixed_others.values)
    m = fixed.size + 1
    rng = np.random.default_rng(seed)
    draws = rng.uniform(size=n_reps)
    hits = 0
    for u in draws:
        # stable tie rule: the appended value sorts after any equal fixed one
        pos = int(np.searchsorted(fixed, u, side="right"))
        combined = np.insert(fixed, pos, u)
        r = support_line_rank(combined, q / m)
        if r == pos + 1:
            hits += 1
    p_hat = hits / n_reps
    return MonteCarloEstimate(value=p_hat, se=binomial_se(p_hat, n_reps), n=n_reps)


def expectation_bound_statistic(values: np.ndarray, m0: int, q: float) -> float:
    """q * m0 / (m - R1(1)): the stage-1 statistic with the last p-value at 1."""
    p = np.asarray(values, dtype=float).copy()
    m = p.size
    p[-1] = 1.0
    r1 = support_line_rank(np.sort(p), q / m)
    return q * m0 / (m - r1)


def expectation_bound_check(
    sim: SimConfig, q: float, n_reps: int
) -> MonteCarloEstimate:
    """Monte Carlo mean of q m0 / (m - R1(1)); bounded above by q/(1-q)."""
    if not 0.0 < q < 1.0:
        raise ValidationError(f"q must lie in (0, 1), got {q}")
    if n_reps < 1:
        raise ValidationError("n_reps must be at least 1")
    mean_vector(sim)
    m0 = sim.m0
    stats = np.empty(n_reps)
    for rep in range(n_reps):
        sample = sample_pvalues(sim, rep)
        stats[rep] = expectation_bound_statistic(sample.values, m0, q)
    return MonteCarloEstimate(
        value=float(np.mean(stats)),
        se=float(np.std(stats, ddof=1) / np.sqrt(n_reps)) if n_reps > 1 else 0.0,
        n=n_reps,
    )


def stage1_stability_check(
    n_trials: int,
    seed: int = 0,
    m_max: int = 64,
) -> tuple[int, int]:
    """Count violations of the stage-1 stability property.

    Whenever the last p-value exceeds the stage-1 support-line threshold,
    replacing it by 1 must leave the stage-1 rejection count unchanged.
    Samples are drawn from a mix of null proportions, mean patterns, sizes,
    and tolerances.  Returns (violations, cases_checked).
    """
    if n_trials < 1:
        raise ValidationError("n_trials must be at least 1")
    rng = np.random.default_rng(seed)
    violations = 0
    checked = 0
    blocks = {kind: np.array(block) for kind, block in (
        ("alternating", (1.25, 2.5, 3.75, 5.0)),
        ("all_at_5", (5.0,)),
    )}
    for _ in range(n_trials):
        m = int(rng.integers(1, m_max + 1))
        pi0 = rng.choice((0.25, 0.5, 0.75, 1.0))
        q = rng.uniform(0.05, 0.4)
        block = blocks["alternating" if rng.uniform() < 0.5 else "all_at_5"]
        is_null = rng.uniform(size=m) < pi0
        mu = np.where(is_null, 0.0, rng.choice(block, size=m))
        p = ndtr(-(mu + rng.standard_normal(m)))
        sp = np.sort(p)
        r1 = support_line_rank(sp, q / m)
        threshold = sp[r1 - 1] if r1 > 0 else 0.0
        if p[-1] > threshold:
            checked += 1
            p_alt = p.copy()
            p_alt[-1] = 1.0
            if support_line_rank(np.sort(p_alt), q / m) != r1:
                violations += 1
    return violations, checked
