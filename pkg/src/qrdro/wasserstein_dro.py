"""Data-driven robust solvers over a type-2 transport ball.

The ambiguity set is all distributions on the support whose quadratic-cost
transport distance from the empirical sample is at most a radius eps. The
worst-case expected profit then equals the maximum over a multiplier
lam >= 0 of

    -eps^2 lam + mean_i  inf_z [ profit(x, q, z) + lam (z - y_i)^2 ],

a concave one-dimensional problem whose per-sample inner infima are in
closed form (the profit is a minimum of three affine pieces). Policies
are found by nested golden section over the triangle q <= x, valid
because the worst-case expectation is jointly concave in (x, q). The
waste-to-consumption constraint gets the mirrored convex treatment in a
multiplier alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .core_model import InfeasibleConstraintError, ModelParams, Policy
from .distributions import SampleSet


@dataclass(frozen=True, eq=False)
class WassersteinAmbiguity:
    """Empirical center, transport radius, and the support everything lives on."""

    samples: SampleSet
    radius: float
    support_lo: float
    support_hi: float

    def __post_init__(self):
        if self.radius < 0.0:
            raise ValueError(f"radius must be nonnegative, got {self.radius}")
        if self.support_lo < 0.0 or self.support_hi <= self.support_lo:
            raise ValueError(
                f"support must satisfy 0 <= lo < hi, got [{self.support_lo}, {self.support_hi}]"
            )
        vals = self.samples.values
        if np.any(vals > self.support_hi) or np.any(vals < self.support_lo):
            worst = float(vals.max())
            raise ValueError(
                f"samples must lie within the support [{self.support_lo}, "
                f"{self.support_hi}]; largest sample is {worst}. Raise the "
                "support cap instead of clipping data."
            )

    @property
    def values(self) -> np.ndarray:
        return self.samples.values


@dataclass(frozen=True, eq=False)
class DualEvaluation:
    """Optimal multiplier, worst-case expected profit, and the per-sample
    inner infima that certify it."""

    lambda_star: float
    value: float
    per_sample_infima: np.ndarray


class WassersteinResult(NamedTuple):
    policy: Policy
    value: float


class WtcSup(NamedTuple):
    value: float
    alpha_star: float


def radius_from_samples(n: int, C: float = 0.1) -> float:
    """Radius schedule C / sqrt(n)."""
    if n < 1:
        raise ValueError(f"sample count must be at least 1, got {n}")
    if C < 0.0:
        raise ValueError(f"schedule constant must be nonnegative, got {C}")
    return C / math.sqrt(n)


def _check_support(params: ModelParams, amb: WassersteinAmbiguity) -> None:
    if (
        abs(params.support_lo - amb.support_lo) > 1e-12
        or abs(params.support_hi - amb.support_hi) > 1e-12
    ):
        raise ValueError(
            "ambiguity support "
            f"[{amb.support_lo}, {amb.support_hi}] does not match model support "
            f"[{params.support_lo}, {params.support_hi}]"
        )


def _piece_coeffs(params: ModelParams, policy: Policy):
    p, c, cm, dl = params.p, params.c, params.c_m, params.delta
    a1 = p * (1.0 - p)
    a2 = (p - c - dl) * (1.0 - p)
    b1 = -cm * policy.x - c * policy.q
    b2 = -cm * policy.x + dl * policy.q
    b3 = (p - c - dl - cm) * policy.x + dl * policy.q
    return a1, a2, b1, b2, b3


def inner_infimum(params: ModelParams, policy: Policy, lam: float, y_i: float) -> float:
    """inf over z in the support of profit(x, q, z) + lam (z - y_i)^2."""
    if lam < 0.0:
        raise ValueError(f"multiplier must be nonnegative, got {lam}")
    a1, a2, b1, b2, b3 = _piece_coeffs(params, policy)
    out = np.empty(1)
    _kernels.inner_infima(
        lam, np.array([float(y_i)]), a1, a2, b1, b2, b3,
        params.support_lo, params.support_hi, out,
    )
    return float(out[0])


def worst_case_expected_profit(
    params: ModelParams, policy: Policy, amb: WassersteinAmbiguity
) -> DualEvaluation:
    """Worst-case expected profit of a fixed policy over the transport ball."""
    _check_support(params, amb)
    a1, a2, b1, b2, b3 = _piece_coeffs(params, policy)
    ys = np.ascontiguousarray(amb.values, dtype=float)
    eps2 = amb.radius * amb.radius
    lam, _ = _kernels.maximize_dual(
        eps2, ys, a1, a2, b1, b2, b3, params.support_lo, params.support_hi
    )
    infima = np.empty(ys.shape[0])
    _kernels.inner_infima(
        lam, ys, a1, a2, b1, b2, b3, params.support_lo, params.support_hi, infima
    )
    value = -eps2 * lam + _kernels.pairwise_sum(infima.copy(), ys.shape[0]) / ys.shape[0]
    return DualEvaluation(lam, float(value), infima)


def solve(params: ModelParams, amb: WassersteinAmbiguity) -> WassersteinResult:
    """Maximize the worst-case expected profit over the policy triangle."""
    _check_support(params, amb)
    box_lo, box_hi = params.policy_box()
    ys = np.ascontiguousarray(amb.values, dtype=float)
    x, q, val = _kernels.solve_triangle(
        amb.radius * amb.radius, ys,
        params.p, params.c, params.c_m, params.delta,
        params.support_lo, params.support_hi,
        box_lo, box_hi, 1e-6 * (box_hi - box_lo),
    )
    return WassersteinResult(Policy(x, min(q, x)), float(val))


def wtc_sup(params: ModelParams, x: float, tau: float, amb: WassersteinAmbiguity) -> WtcSup:
    """Worst-case expected waste-ratio slack at fabric level x.

    Convex in x and independent of q. Nonpositive value certifies that
    every distribution in the ball keeps the waste-to-consumption ratio
    at or below tau.
    """
    if tau < 0.0:
        raise ValueError(f"waste ratio bound must be nonnegative, got tau={tau}")
    _check_support(params, amb)
    ys = np.ascontiguousarray(amb.values, dtype=float)
    slope = (1.0 + tau) * (1.0 - params.p)
    alpha, val = _kernels.minimize_wtc_dual(
        amb.radius * amb.radius, ys, slope, x, tau * x,
        params.support_lo, params.support_hi,
    )
    return WtcSup(float(val), float(alpha))


def solve_wtc_constrained(
    params: ModelParams, amb: WassersteinAmbiguity, tau: float
) -> WassersteinResult:
    """Robust optimum subject to the worst-case waste-ratio constraint.

    The constraint depends on x alone and is convex, so its feasible set
    is an interval anchored at the bottom of the policy box (where the
    slack is -tau * box_lo <= 0). If the unconstrained optimizer is
    feasible it is returned unchanged; otherwise the feasibility boundary
    is bracketed by bisection and the policy search reruns on the
    restricted triangle.
    """
    unconstrained = solve(params, amb)
    if wtc_sup(params, unconstrained.policy.x, tau, amb).value <= 0.0:
        return unconstrained

    box_lo, box_hi = params.policy_box()
    g_lo = wtc_sup(params, box_lo, tau, amb).value
    if g_lo > 0.0:
        # convex in x, so a golden-section scan finds the least violation
        a, b = box_lo, box_hi
        for _ in range(200):
            c = b - (b - a) * _kernels.INV_PHI
            d = a + (b - a) * _kernels.INV_PHI
            if wtc_sup(params, c, tau, amb).value <= wtc_sup(params, d, tau, amb).value:
                b = d
            else:
                a = c
            if b - a < 1e-12:
                break
        g_min = wtc_sup(params, 0.5 * (a + b), tau, amb).value
        raise InfeasibleConstraintError(
            f"waste-ratio bound tau={tau} admits no feasible fabric level; "
            f"smallest achievable worst-case slack is {g_min:.6g}",
            min_constraint_value=g_min,
        )

    lo_x, hi_x = box_lo, unconstrained.policy.x
    while hi_x - lo_x > 1e-12:
        mid = 0.5 * (lo_x + hi_x)
        if wtc_sup(params, mid, tau, amb).value <= 0.0:
            lo_x = mid
        else:
            hi_x = mid
    x_cap = lo_x  # feasible side of the boundary

    ys = np.ascontiguousarray(amb.values, dtype=float)
    x, q, val = _kernels.solve_triangle(
        amb.radius * amb.radius, ys,
        params.p, params.c, params.c_m, params.delta,
        params.support_lo, params.support_hi,
        box_lo, max(x_cap, box_lo), 1e-6 * (box_hi - box_lo),
    )
    return WassersteinResult(Policy(x, min(q, x)), float(val))
