"""Seeded Monte-Carlo out-of-sample evaluation and the trial/sweep protocol.

Each trial draws a small in-sample set, fits every configured method on
it, then scores all fitted policies on one shared evaluation set drawn
from an independent substream. The whole experiment report is a pure
function of (config, base params): per-trial streams are keyed by
(base_seed, trial_index, purpose) so results do not depend on scheduling,
and trials reuse the same data across the (delta, tau) grid exactly as a
sweep over costs should.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import baselines, mad_dro, wasserstein_dro
from .core_model import InfeasibleConstraintError, ModelParams, Policy
from .distributions import (
    DemandDistribution,
    SampleSet,
    estimate_moments,
    sample,
    solver_support,
)

DEFAULT_DELTA_GRID = tuple(round(0.02 * i, 10) for i in range(18))  # 0.00 .. 0.34

KNOWN_METHODS = (
    "mad",
    "wasserstein",
    "saa",
    "benchmark",
    "nqr",
    "saa_known",
    "nqr_known",
)

# substream purposes
_IN_SAMPLE, _EVAL, _KNOWN = 0, 1, 2


@dataclass(frozen=True)
class TrialConfig:
    """Protocol knobs for one experiment sweep."""

    true_dist: DemandDistribution
    methods: tuple[str, ...] = ("mad", "wasserstein", "benchmark")
    delta_grid: tuple[float, ...] = DEFAULT_DELTA_GRID
    tau: float | None = None
    tau_grid: tuple[float, ...] | None = None
    n_in: int = 10
    n_eval: int = 10_000
    n_trials: int = 50
    base_seed: int = 0
    wasserstein_C: float = 0.1
    known_sample_size: int = 100_000

    def __post_init__(self):
        for name in ("n_in", "n_eval", "n_trials", "known_sample_size"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}")
        unknown = [m for m in self.methods if m not in KNOWN_METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {KNOWN_METHODS}")
        if not self.delta_grid:
            raise ValueError("delta_grid must not be empty")

    def tau_cells(self) -> tuple[float | None, ...]:
        if self.tau_grid is not None:
            return tuple(self.tau_grid)
        return (self.tau,)


@dataclass(frozen=True)
class MethodOutcome:
    """Across-trial aggregates for one (method, delta, tau) cell."""

    mean_x: float
    mean_q: float
    mean_profit: float
    std_profit: float
    wtc_ratio: float
    n_trials: int


@dataclass(frozen=True)
class TrialOutcome:
    policy: Policy | None
    profit: float
    wtc_ratio: float
    status: str = "ok"


@dataclass
class ExperimentReport:
    """Aggregates keyed by (distribution label, method, delta, tau)."""

    rows: dict[tuple[str, str, float, float | None], MethodOutcome] = field(default_factory=dict)
    failed: dict[tuple[str, str, float, float | None], str] = field(default_factory=dict)


def _demands(params: ModelParams, ys: np.ndarray) -> np.ndarray:
    return (1.0 - params.p) * ys


def profit_samples(params: ModelParams, policy: Policy, ys: np.ndarray) -> np.ndarray:
    """Vectorized profit over market sizes."""
    d = _demands(params, np.asarray(ys, dtype=float))
    p, c, cm, dl = params.p, params.c, params.c_m, params.delta
    piece1 = p * d - cm * policy.x - c * policy.q
    piece2 = (p - c - dl) * d - cm * policy.x + dl * policy.q
    piece3 = (p - c - dl - cm) * policy.x + dl * policy.q
    return np.minimum(np.minimum(piece1, piece2), piece3)


def mc_expected_profit(params: ModelParams, policy: Policy, eval_samples) -> float:
    """Arithmetic mean of the profit over the evaluation samples."""
    ys = eval_samples.values if isinstance(eval_samples, SampleSet) else np.asarray(eval_samples)
    if ys.size == 0:
        raise ValueError("evaluation needs at least one sample")
    return float(np.mean(profit_samples(params, policy, ys)))


def mc_wtc_ratio(params: ModelParams, policy: Policy, eval_samples) -> float:
    """Ratio of total waste to total fulfilled demand over the samples.

    Ratio of sums mirrors the ratio-of-expectations definition of the
    waste-to-consumption metric. Zero fulfilled demand (no fabric, or no
    demand mass) leaves the ratio undefined and raises.
    """
    ys = eval_samples.values if isinstance(eval_samples, SampleSet) else np.asarray(eval_samples)
    if ys.size == 0:
        raise ValueError("evaluation needs at least one sample")
    d = _demands(params, ys)
    waste = np.maximum(policy.x - d, 0.0).sum()
    fulfilled = np.minimum(d, policy.x).sum()
    if fulfilled <= 0.0:
        raise ValueError("total fulfilled demand is zero; waste ratio undefined")
    return float(waste / fulfilled)


@lru_cache(maxsize=64)
def _known_policy(
    params: ModelParams,
    dist: DemandDistribution,
    n: int,
    seed: tuple[int, ...],
    restrict_equal: bool,
) -> Policy:
    return baselines.known_distribution_solve(
        params, dist, seed, n=n, restrict_equal=restrict_equal
    ).policy


def _fit_method(
    method: str,
    config: TrialConfig,
    params: ModelParams,
    in_samples: SampleSet,
    tau: float | None,
) -> Policy:
    dist = config.true_dist
    if method == "benchmark":
        return baselines.uniform_benchmark_solve(params).policy

    lo, hi = solver_support(dist, in_samples)
    solver_params = replace(params, support_lo=lo, support_hi=hi)
    if method == "saa":
        return baselines.saa_solve(solver_params, in_samples).policy
    if method == "nqr":
        return baselines.nqr_solve(solver_params, in_samples).policy
    if method in ("saa_known", "nqr_known"):
        return _known_policy(
            params, dist, config.known_sample_size,
            (config.base_seed, _KNOWN), method == "nqr_known",
        )
    if method == "mad":
        amb = mad_dro.MadAmbiguity(estimate_moments(in_samples), lo, hi)
        if tau is None:
            return mad_dro.solve_closed_form(solver_params, amb).policy
        return mad_dro.solve_wtc_constrained(solver_params, amb, tau).policy
    if method == "wasserstein":
        eps = wasserstein_dro.radius_from_samples(len(in_samples), config.wasserstein_C)
        amb = wasserstein_dro.WassersteinAmbiguity(in_samples, eps, lo, hi)
        if tau is None:
            return wasserstein_dro.solve(solver_params, amb).policy
        return wasserstein_dro.solve_wtc_constrained(solver_params, amb, tau).policy
    raise ValueError(f"unknown method {method!r}")


def run_trial(
    config: TrialConfig, params: ModelParams, trial_index: int
) -> dict[str, TrialOutcome]:
    """Fit every configured method on one in-sample draw and score all of
    them on one shared evaluation draw.

    Infeasible constrained fits become tagged outcomes instead of raising.
    """
    tau = config.tau
    in_samples = sample(config.true_dist, config.n_in, (config.base_seed, trial_index, _IN_SAMPLE))
    eval_samples = sample(config.true_dist, config.n_eval, (config.base_seed, trial_index, _EVAL))

    outcomes: dict[str, TrialOutcome] = {}
    for method in config.methods:
        try:
            policy = _fit_method(method, config, params, in_samples, tau)
        except InfeasibleConstraintError as err:
            outcomes[method] = TrialOutcome(None, float("nan"), float("nan"), f"infeasible: {err}")
            continue
        profit = mc_expected_profit(params, policy, eval_samples)
        try:
            wtc = mc_wtc_ratio(params, policy, eval_samples)
            status = "ok"
        except ValueError:
            wtc, status = float("nan"), "wtc-undefined"
        outcomes[method] = TrialOutcome(policy, profit, wtc, status)
    return outcomes


def _run_trial_packed(args) -> dict[str, TrialOutcome]:
    return run_trial(*args)


def _aggregate(
    outcomes: list[dict[str, TrialOutcome]], methods: tuple[str, ...]
) -> dict[str, MethodOutcome | str]:
    cells: dict[str, MethodOutcome | str] = {}
    for method in methods:
        per_trial = [o[method] for o in outcomes]
        usable = [t for t in per_trial if t.policy is not None]
        if not usable:
            cells[method] = per_trial[0].status
            continue
        xs = np.array([t.policy.x for t in usable])
        qs = np.array([t.policy.q for t in usable])
        profits = np.array([t.profit for t in usable])
        wtcs = np.array([t.wtc_ratio for t in usable])
        wtcs = wtcs[np.isfinite(wtcs)]
        cells[method] = MethodOutcome(
            mean_x=float(xs.mean()),
            mean_q=float(qs.mean()),
            mean_profit=float(profits.mean()),
            std_profit=float(profits.std(ddof=1)) if profits.size > 1 else 0.0,
            wtc_ratio=float(wtcs.mean()) if wtcs.size else float("nan"),
            n_trials=len(usable),
        )
    return cells


def run_experiment(
    config: TrialConfig, params_base: ModelParams, jobs: int = 1
) -> ExperimentReport:
    """Sweep the (delta, tau) grid, aggregating means and standard
    deviations over trials. Invalid grid points are reported per cell."""
    report = ExperimentReport()
    label = config.true_dist.label()
    for delta in config.delta_grid:
        try:
            params_cell = replace(params_base, delta=delta)
        except ValueError as err:
            for tau in config.tau_cells():
                for method in config.methods:
                    report.failed[(label, method, delta, tau)] = str(err)
            continue
        for tau in config.tau_cells():
            cell_cfg = replace(config, tau=tau, tau_grid=None)
            tasks = [(cell_cfg, params_cell, t) for t in range(config.n_trials)]
            if jobs > 1:
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    outcomes = list(pool.map(_run_trial_packed, tasks))
            else:
                outcomes = [run_trial(*t) for t in tasks]
            for method, cell in _aggregate(outcomes, config.methods).items():
                key = (label, method, delta, tau)
                if isinstance(cell, str):
                    report.failed[key] = cell
                else:
                    report.rows[key] = cell
    return report


CSV_HEADER = "distribution,method,delta,tau,mean_x,mean_q,mean_profit,std_profit,wtc_ratio,n_trials"


def report_to_csv(report: ExperimentReport) -> str:
    """Render the report in the stable CSV schema (one row per grid cell)."""
    lines = [CSV_HEADER]
    for (label, method, delta, tau), cell in report.rows.items():
        lines.append(
            ",".join(
                [
                    label,
                    method,
                    repr(float(delta)),
                    "" if tau is None else repr(float(tau)),
                    repr(cell.mean_x),
                    repr(cell.mean_q),
                    repr(cell.mean_profit),
                    repr(cell.std_profit),
                    repr(cell.wtc_ratio),
                    str(cell.n_trials),
                ]
            )
        )
    return "\n".join(lines) + "\n"
