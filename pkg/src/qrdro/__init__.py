"""Distributionally robust quick-response production planning.

Fabric purchase and two-stage production policies that hedge against
demand ambiguity: closed forms under mean-MAD moment information, dual
oracles over a type-2 transport ball, a waste-to-consumption constraint
for both, non-robust baselines, and a seeded Monte-Carlo evaluation
harness.
"""

from .baselines import (
    BaselineResult,
    known_distribution_solve,
    nqr_solve,
    saa_solve,
    uniform_benchmark_solve,
    uniform_expected_profit,
)
from .core_model import (
    InfeasibleConstraintError,
    ModelParams,
    Policy,
    demand,
    fulfilled_demand,
    profit,
    second_stage_quantity,
    total_waste,
    wtc_integrand,
)
from .distributions import (
    Beta,
    DemandDistribution,
    Empirical,
    Lognormal,
    MomentSummary,
    SampleSet,
    Uniform,
    estimate_moments,
    load_samples,
    sample,
    save_samples,
    solver_support,
    true_moments,
)
from .evaluation import (
    ExperimentReport,
    MethodOutcome,
    TrialConfig,
    mc_expected_profit,
    mc_wtc_ratio,
    run_experiment,
    run_trial,
)
from .mad_dro import (
    MadAmbiguity,
    MadPolicyResult,
    ThreePointDistribution,
    extremal_three_point,
)
from .wasserstein_dro import (
    DualEvaluation,
    WassersteinAmbiguity,
    WassersteinResult,
    radius_from_samples,
    worst_case_expected_profit,
)

__all__ = [name for name in dir() if not name.startswith("_")]
