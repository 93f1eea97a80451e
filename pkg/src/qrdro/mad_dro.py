"""Robust solvers for the mean-MAD ambiguity set.

Among all demand distributions on [lo, hi] sharing a mean and a mean
absolute deviation, the worst case for a concave profit is a three-point
distribution sitting on {lo, mean, hi}. That collapses the robust problem
to a tiny discrete one: six candidate policies for the unconstrained
model, a closed-form threshold rule equivalent to the enumeration, and a
small piecewise-linear program once the waste-to-consumption constraint
is added.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

from .core_model import InfeasibleConstraintError, ModelParams, Policy, profit
from .distributions import MomentSummary

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MadAmbiguity:
    """Mean-MAD information plus the support it lives on.

    The MAD of any distribution on [lo, hi] with mean mu is at most
    2 (mu - lo)(hi - mu) / (hi - lo); an estimated value above that bound
    is clamped down (with a warning) so that small-sample pipelines stay
    total.
    """

    moments: MomentSummary
    support_lo: float
    support_hi: float

    def __post_init__(self):
        lo, hi, mu = self.support_lo, self.support_hi, self.moments.mean
        if not lo < mu < hi:
            raise ValueError(f"mean must lie strictly inside the support, got {mu} vs [{lo}, {hi}]")
        cap = 2.0 * (mu - lo) * (hi - mu) / (hi - lo)
        if self.moments.mad > cap:
            log.warning(
                "mad %.6g exceeds the feasibility bound %.6g for mean %.6g on [%g, %g]; clamping",
                self.moments.mad, cap, mu, lo, hi,
            )
            object.__setattr__(self, "moments", MomentSummary(mu, cap))

    @property
    def mean(self) -> float:
        return self.moments.mean

    @property
    def mad(self) -> float:
        return self.moments.mad


@dataclass(frozen=True)
class ThreePointDistribution:
    """Worst-case distribution: atoms at (lo, mean, hi) with given weights."""

    points: tuple[float, float, float]
    weights: tuple[float, float, float]

    def __post_init__(self):
        if any(w < 0.0 for w in self.weights):
            raise ValueError(f"weights must be nonnegative, got {self.weights}")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {self.weights}")

    def mean(self) -> float:
        return sum(w * y for w, y in zip(self.weights, self.points))

    def mad(self) -> float:
        m = self.mean()
        return sum(w * abs(y - m) for w, y in zip(self.weights, self.points))


@dataclass(frozen=True)
class MadPolicyResult:
    """Solver output: the policy, its worst-case expected profit, and which
    threshold regime produced it ('1a'..'3c', 'enum', or 'wtc')."""

    policy: Policy
    value: float
    case_label: str


def extremal_three_point(amb: MadAmbiguity) -> ThreePointDistribution:
    """Worst-case three-point distribution for the given moments."""
    lo, hi, mu, sig = amb.support_lo, amb.support_hi, amb.mean, amb.mad
    w_lo = sig / (2.0 * (mu - lo))
    w_hi = sig / (2.0 * (hi - mu))
    return ThreePointDistribution((lo, mu, hi), (w_lo, 1.0 - w_lo - w_hi, w_hi))


def expected_profit_three_point(
    params: ModelParams, policy: Policy, dist: ThreePointDistribution
) -> float:
    """Expectation of the profit under the three-point distribution."""
    return sum(w * profit(params, policy, y) for w, y in zip(dist.weights, dist.points))


def _demand_points(params: ModelParams, amb: MadAmbiguity) -> tuple[float, float, float]:
    s = 1.0 - params.p
    return s * amb.support_lo, s * amb.mean, s * amb.support_hi


def solve_by_enumeration(params: ModelParams, amb: MadAmbiguity) -> MadPolicyResult:
    """Exact robust optimum by trying all six ordered candidate pairs.

    The candidates are the demand levels at the three atoms; ties are
    broken toward the smaller (x, q), preferring less fabric at equal
    worst-case profit.
    """
    dist = extremal_three_point(amb)
    d_lo, d_mu, d_hi = _demand_points(params, amb)
    best_xq = None
    best_value = -float("inf")
    for x in (d_lo, d_mu, d_hi):
        for q in (d_lo, d_mu, d_hi):
            if q > x:
                continue
            v = expected_profit_three_point(params, Policy(x, q), dist)
            if best_xq is None or v > best_value or (v == best_value and (x, q) < best_xq):
                best_xq, best_value = (x, q), v
    return MadPolicyResult(Policy(*best_xq), best_value, "enum")


def _ge(a: float, b: float) -> bool:
    """a >= b with a 1e-12 relative guard, so thresholds that are equal in
    exact arithmetic are not flipped by rounding in the products."""
    return a >= b - 1e-12 * max(1.0, abs(a), abs(b))


def solve_closed_form(params: ModelParams, amb: MadAmbiguity) -> MadPolicyResult:
    """Threshold rule for the robust optimum.

    Three regimes, keyed by how the surcharge weighs against advance
    production cost under the worst-case weights: no quick response
    (produce everything up front), selective (stock the mean, keep fabric
    for the peak), and aggressive (commit only to the trough). Within
    each regime the production level falls as fabric and production costs
    rise.

    Every threshold follows from a candidate comparison of the form
    (difference of demand levels) * (weighted margin); the weight identity
    w_lo (mu - lo) = w_hi (hi - mu) collapses each margin to the tests
    below. In particular the full-commitment regime keeps x = q = d_hi
    exactly when c_m + c <= w_hi * p. At exact threshold ties either
    policy is optimal and the enumeration solver is the ground truth.
    """
    dist = extremal_three_point(amb)
    w_lo, w_mu, w_hi = dist.weights
    d_lo, d_mu, d_hi = _demand_points(params, amb)
    p, c, c_m, dl = params.p, params.c, params.c_m, params.delta

    if _ge(w_hi * dl, (w_lo + w_mu) * c):
        if _ge(w_hi * p, c_m + c):
            label, xq = "1a", (d_hi, d_hi)
        elif _ge((w_mu + w_hi) * p, c_m + c):
            label, xq = "1b", (d_mu, d_mu)
        else:
            label, xq = "1c", (d_lo, d_lo)
    elif _ge((w_mu + w_hi) * dl, w_lo * c):
        if _ge(w_hi * (p - c - dl), c_m):
            label, xq = "2a", (d_hi, d_mu)
        elif _ge((w_mu + w_hi) * p, c_m + c):
            label, xq = "2b", (d_mu, d_mu)
        else:
            label, xq = "2c", (d_lo, d_lo)
    else:
        if _ge(w_hi * (p - c - dl), c_m):
            label, xq = "3a", (d_hi, d_lo)
        elif _ge((w_mu + w_hi) * (p - c - dl), c_m):
            label, xq = "3b", (d_mu, d_lo)
        else:
            label, xq = "3c", (d_lo, d_lo)

    policy = Policy(*xq)
    return MadPolicyResult(policy, expected_profit_three_point(params, policy, dist), label)


def wtc_worst_case(params: ModelParams, x: float, tau: float, amb: MadAmbiguity) -> float:
    """Worst-case expected waste-ratio slack at fabric level x.

    Under the three-point worst case the lower atom always lands on the
    wasteful branch and the upper atom on the capped branch, leaving one
    genuine max in the middle. Nonpositive return value means every
    distribution in the set keeps the waste-to-consumption ratio at or
    below tau.
    """
    if tau < 0.0:
        raise ValueError(f"waste ratio bound must be nonnegative, got tau={tau}")
    dist = extremal_three_point(amb)
    w_lo, w_mu, w_hi = dist.weights
    d_lo, d_mu, _ = _demand_points(params, amb)
    return (
        w_lo * (x - (1.0 + tau) * d_lo)
        + w_mu * max(x - (1.0 + tau) * d_mu, -tau * x)
        - w_hi * tau * x
    )


def _polygon_vertices(halfplanes: list[tuple[float, float, float]]) -> list[tuple[float, float]]:
    """Vertices of {(x, q): a x + b q <= g for all rows}, by pairwise
    intersection of the boundary lines."""
    verts = []
    for (a1, b1, g1), (a2, b2, g2) in combinations(halfplanes, 2):
        det = a1 * b2 - a2 * b1
        if abs(det) < 1e-14:
            continue
        x = (g1 * b2 - g2 * b1) / det
        q = (a1 * g2 - a2 * g1) / det
        if all(a * x + b * q <= g + 1e-9 for a, b, g in halfplanes):
            verts.append((x, q))
    return verts


def solve_wtc_constrained(params: ModelParams, amb: MadAmbiguity, tau: float) -> MadPolicyResult:
    """Robust optimum under the waste-to-consumption constraint.

    Both the objective and the constraint are piecewise linear with kinks
    only where the mean-atom demand d_mu crosses q or x, so the feasible
    set splits into at most six small polygons with linear objective on
    each. The exact optimum is the best feasible polygon vertex.
    """
    dist = extremal_three_point(amb)
    w_lo, w_mu, w_hi = dist.weights
    d_lo, d_mu, d_hi = _demand_points(params, amb)
    L, H = params.policy_box()
    p, c, c_m, dl = params.p, params.c, params.c_m, params.delta

    # shared objective terms: lower atom is always on the pre-stocked
    # branch, upper atom always on the fabric-capped branch
    base_cx = -w_lo * c_m + w_hi * (p - c - dl - c_m)
    base_cq = -w_lo * c + w_hi * dl
    base_k = w_lo * p * d_lo

    # constraint rows depend on x only; rewrite a x <= rhs as (a, 0, rhs)
    gA = (w_lo + w_mu - w_hi * tau, 0.0, (1.0 + tau) * (w_lo * d_lo + w_mu * d_mu))
    gB = (w_lo - (w_mu + w_hi) * tau, 0.0, (1.0 + tau) * w_lo * d_lo)

    box = [
        (1.0, 0.0, H),    # x <= H
        (-1.0, 0.0, -L),  # x >= L
        (0.0, -1.0, -L),  # q >= L
        (-1.0, 1.0, 0.0),  # q <= x
    ]
    regions = [
        # (objective coeffs (cx, cq, k) from the mean atom, extra halfplanes)
        ((-w_mu * c_m, -w_mu * c, w_mu * p * d_mu), [(0.0, -1.0, -d_mu), gA]),            # q >= d_mu
        ((-w_mu * c_m, w_mu * dl, w_mu * (p - c - dl) * d_mu),
         [(0.0, 1.0, d_mu), (-1.0, 0.0, -d_mu), gA]),                                      # q <= d_mu <= x
        ((w_mu * (p - c - dl - c_m), w_mu * dl, 0.0), [(1.0, 0.0, d_mu), gB]),             # x <= d_mu
    ]

    best: tuple[float, float] | None = None
    best_value = -float("inf")
    for (cx, cq, k), extra in regions:
        for x, q in _polygon_vertices(box + extra):
            v = (base_cx + cx) * x + (base_cq + cq) * q + base_k + k
            if best is None or v > best_value + 1e-15 or (v >= best_value - 1e-15 and (x, q) < best):
                best, best_value = (x, q), max(v, best_value)

    if best is None:
        g_min = min(wtc_worst_case(params, t, tau, amb) for t in (L, d_mu, H))
        raise InfeasibleConstraintError(
            f"waste-ratio bound tau={tau} admits no feasible fabric level; "
            f"smallest achievable worst-case slack is {g_min:.6g}",
            min_constraint_value=g_min,
        )

    # snap tiny numeric overshoot back into the box
    x = min(max(best[0], L), H)
    q = min(max(best[1], L), x)
    policy = Policy(x, q)
    return MadPolicyResult(policy, expected_profit_three_point(params, policy, dist), "wtc")
