"""Non-robust comparators: empirical-average optimization, the closed-form
uniform-demand benchmark, and the no-quick-response restriction.

The empirical-average objective is concave and piecewise affine with kinks
only where x or q crosses an observed demand level, so its exact maximum
sits on the candidate grid {observed demands} u {box ends}. The search
exploits that the objective separates as const + g_x(x) + g_q(q), which
makes the candidate sweep O(n log n) and returns the same argmax (with the
same smallest-(x, q) tie-breaking) as evaluating every ordered pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core_model import ModelParams, Policy
from .distributions import DemandDistribution, SampleSet, SeedLike, sample


@dataclass(frozen=True)
class BaselineResult:
    policy: Policy
    value: float
    method_tag: str  # SAA | UNIFORM_BENCHMARK | NQR_SAA


def _tail_mean(d_sorted: np.ndarray, suffix: np.ndarray, t: float) -> float:
    """mean((d - t)^+) over the sample, via sorted values and suffix sums."""
    n = d_sorted.size
    idx = int(np.searchsorted(d_sorted, t, side="right"))
    if idx == n:
        return 0.0
    return (suffix[idx] - t * (n - idx)) / n


def saa_solve(
    params: ModelParams, samples: SampleSet, restrict_equal: bool = False
) -> BaselineResult:
    """Exact maximizer of the empirical average profit.

    Candidates are the observed demand levels plus the box ends; with
    restrict_equal the search is limited to x = q, which is the
    no-quick-response policy space. Ties prefer the smaller (x, q).
    """
    if len(samples) == 0:
        raise ValueError("empirical optimization needs at least one sample")
    box_lo, box_hi = params.policy_box()
    d = np.sort((1.0 - params.p) * samples.values)
    suffix = np.concatenate([np.cumsum(d[::-1])[::-1], [0.0]])
    mean_d = float(np.mean(d))

    cand = np.unique(np.clip(np.concatenate([d, [box_lo, box_hi]]), box_lo, box_hi))
    p, c, cm, dl = params.p, params.c, params.c_m, params.delta
    tails = np.array([_tail_mean(d, suffix, t) for t in cand])
    g_x = -cm * cand - (p - c - dl) * tails
    g_q = -c * cand - (c + dl) * tails
    const = p * mean_d

    if restrict_equal:
        diag = g_x + g_q
        j = int(np.argmax(diag))  # argmax returns the first, i.e. smallest, candidate
        policy = Policy(float(cand[j]), float(cand[j]))
        return BaselineResult(policy, float(const + diag[j]), "NQR_SAA")

    # best q at or below each x, tracking the earliest maximizer for ties
    best_q_val = np.empty_like(g_q)
    best_q_idx = np.empty(cand.size, dtype=int)
    running, run_idx = -math.inf, 0
    for k in range(cand.size):
        if g_q[k] > running:
            running, run_idx = g_q[k], k
        best_q_val[k] = running
        best_q_idx[k] = run_idx
    totals = g_x + best_q_val
    j = int(np.argmax(totals))
    policy = Policy(float(cand[j]), float(cand[best_q_idx[j]]))
    return BaselineResult(policy, float(const + totals[j]), "SAA")


def uniform_expected_profit(params: ModelParams, policy: Policy) -> float:
    """Closed-form expected profit when the market size is uniform on [0, 1].

    Expected sales are x(2 - 2p - x) / (2(1 - p)) and expected reactive
    production is (x - q)(2 - 2p - x - q) / (2(1 - p)); both integrals
    require the policy to sit in the demand-scale box [0, 1 - p].
    """
    p, c, cm, dl = params.p, params.c, params.c_m, params.delta
    x, q = policy.x, policy.q
    if not (0.0 <= q <= x <= (1.0 - p) + 1e-12):
        raise ValueError(f"policy ({x}, {q}) outside the demand box [0, {1.0 - p}]")
    sales = x * (2.0 - 2.0 * p - x) / (2.0 * (1.0 - p))
    reactive = (x - q) * (2.0 - 2.0 * p - x - q) / (2.0 * (1.0 - p))
    return p * sales - cm * x - c * q - (c + dl) * reactive


def uniform_expected_profit_general(
    params: ModelParams, policy: Policy, lo: float, hi: float
) -> float:
    """Exact expected profit for a uniform market size on [lo, hi].

    Independent integral route used both by the fitted-uniform benchmark
    variant and as an oracle for the closed form above.
    """
    if not lo < hi:
        raise ValueError(f"uniform needs lo < hi, got [{lo}, {hi}]")
    p, c, cm, dl = params.p, params.c, params.c_m, params.delta
    s = 1.0 - p

    def tail(t: float) -> float:
        # E (Y - t)^+ for Y ~ U[lo, hi]
        if t >= hi:
            return 0.0
        if t <= lo:
            return 0.5 * (lo + hi) - t
        return 0.5 * (hi - t) ** 2 / (hi - lo)

    t_x, t_q = policy.x / s, policy.q / s
    mean_y = 0.5 * (lo + hi)
    sales = s * (mean_y - tail(t_x))
    reactive = s * (tail(t_q) - tail(t_x))
    return p * sales - cm * policy.x - c * policy.q - (c + dl) * reactive


def _golden_max(f, a: float, b: float, tol: float) -> tuple[float, float]:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    if b - a <= tol:
        return a, f(a)
    c = b - (b - a) * inv_phi
    d = a + (b - a) * inv_phi
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * inv_phi
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * inv_phi
            fd = f(d)
    m = 0.5 * (a + b)
    return m, f(m)


def uniform_benchmark_solve(
    params: ModelParams, fit_support: tuple[float, float] | None = None
) -> BaselineResult:
    """Maximizer of the uniform-demand expected profit over the triangle.

    By default the benchmark fixes the market size at U[0, 1] regardless
    of what generated the data; pass fit_support=(lo, hi) to optimize a
    uniform fitted to the sample range instead. The objective separates
    into two newsvendor problems, so the interior stationary point
    x* = (1 - p)(p - c - delta - c_m) / (p - c - delta),
    q* = (1 - p) delta / (c + delta) is the test oracle whenever it is
    ordered (q* <= x*); otherwise the optimum sits on the x = q diagonal
    at (1 - p)(1 - (c + c_m) / p).
    """
    lo, hi = fit_support if fit_support is not None else (0.0, 1.0)
    s = 1.0 - params.p
    box_lo, box_hi = s * lo, s * hi
    if fit_support is None:
        objective = lambda x, q: uniform_expected_profit(params, Policy(x, q))
    else:
        objective = lambda x, q: uniform_expected_profit_general(params, Policy(x, q), lo, hi)

    tol = 1e-8 * (box_hi - box_lo)

    def best_given_x(x: float) -> tuple[float, float]:
        return _golden_max(lambda q: objective(x, q), box_lo, x, tol)

    x_star, _ = _golden_max(lambda x: best_given_x(x)[1], box_lo, box_hi, tol)
    q_star, value = best_given_x(x_star)
    return BaselineResult(Policy(x_star, min(q_star, x_star)), value, "UNIFORM_BENCHMARK")


def nqr_solve(params: ModelParams, samples: SampleSet) -> BaselineResult:
    """Empirical-average optimum with production locked to the fabric buy."""
    return saa_solve(params, samples, restrict_equal=True)


def known_distribution_solve(
    params: ModelParams,
    dist: DemandDistribution,
    seed: SeedLike,
    n: int = 100_000,
    restrict_equal: bool = False,
) -> BaselineResult:
    """Near-exact optimum under a known distribution, via a large seeded
    empirical approximation."""
    drawn = sample(dist, n, seed)
    hi_needed = float(np.max(drawn.values))
    solver_params = params
    if hi_needed > params.support_hi:
        solver_params = replace(params, support_hi=max(hi_needed, params.support_hi))
    return saa_solve(solver_params, drawn, restrict_equal=restrict_equal)
