"""Economic primitives of the two-stage quick-response production model.

A firm buys x units of fabric and produces q <= x units ahead of the season.
After the market size y is revealed, demand is (1 - p) * y and the firm may
convert leftover fabric into up to x - q extra units at a surcharge delta.
Unsold goods and unused fabric are discarded.

All functions here are pure, operate on scalars, and are safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass


class InfeasibleConstraintError(RuntimeError):
    """No policy satisfies the waste-to-consumption constraint.

    ``min_constraint_value`` carries the smallest achievable worst-case
    constraint value, so callers can report how far from feasible the
    instance is.
    """

    def __init__(self, message: str, min_constraint_value: float | None = None):
        super().__init__(message)
        self.min_constraint_value = min_constraint_value


@dataclass(frozen=True)
class ModelParams:
    """Economic constants and the market-size support.

    p is the unit selling price and must lie in (0, 1): consumers buy when
    their valuation (uniform on [0, 1]) exceeds p, so realized demand is
    (1 - p) * market size. c is the advance production cost per unit, c_m
    the fabric cost per unit, and delta the quick-response surcharge.
    Profitability of reactive production requires p > c + delta + c_m.
    """

    p: float
    c: float
    c_m: float
    delta: float
    support_lo: float = 0.0
    support_hi: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"selling price must satisfy 0 < p < 1, got p={self.p}")
        if self.c < 0.0 or self.c_m < 0.0:
            raise ValueError(f"costs must be nonnegative, got c={self.c}, c_m={self.c_m}")
        if self.delta < 0.0:
            raise ValueError(f"surcharge must be nonnegative, got delta={self.delta}")
        if self.p <= self.c + self.delta + self.c_m:
            raise ValueError(
                "profitability requires p > c + delta + c_m, got "
                f"p={self.p} <= c + delta + c_m = {self.c + self.delta + self.c_m}"
            )
        if self.support_lo < 0.0 or self.support_hi <= self.support_lo:
            raise ValueError(
                "support must satisfy 0 <= lo < hi, got "
                f"[{self.support_lo}, {self.support_hi}]"
            )

    def policy_box(self) -> tuple[float, float]:
        """Feasible interval for both x and q, in demand scale.

        Any fabric purchase above (1 - p) * support_hi is strictly dominated
        because demand never exceeds that level and fabric is costly, so the
        decision box lives on the demand scale rather than the raw
        market-size scale.
        """
        return (1.0 - self.p) * self.support_lo, (1.0 - self.p) * self.support_hi


@dataclass(frozen=True)
class Policy:
    """Decision pair: fabric purchase x and advance production q, q <= x."""

    x: float
    q: float

    def __post_init__(self):
        if self.q > self.x:
            raise ValueError(
                f"advance production cannot exceed fabric, got q={self.q} > x={self.x}"
            )


def check_policy_in_box(params: ModelParams, policy: Policy, tol: float = 1e-9) -> None:
    """Raise if the policy leaves the demand-scale box of ``params``."""
    lo, hi = params.policy_box()
    for name, v in (("x", policy.x), ("q", policy.q)):
        if v < lo - tol or v > hi + tol:
            raise ValueError(f"policy {name}={v} outside demand-scale box [{lo}, {hi}]")


def demand(params: ModelParams, y: float) -> float:
    """Realized demand (1 - p) * y for market size y >= 0."""
    if y < 0.0:
        raise ValueError(f"market size must be nonnegative, got y={y}")
    return (1.0 - params.p) * y


def second_stage_quantity(params: ModelParams, policy: Policy, y: float) -> float:
    """Optimal reactive production: min{(d - q)^+, x - q}."""
    d = demand(params, y)
    return min(max(d - policy.q, 0.0), policy.x - policy.q)


def profit(params: ModelParams, policy: Policy, y: float) -> float:
    """Realized profit as the pointwise minimum of three affine pieces.

    The pieces correspond to demand below q (advance stock suffices),
    demand between q and x (quick response fills the gap), and demand
    above x (fabric binds).
    """
    d = demand(params, y)
    p, c, c_m, dl = params.p, params.c, params.c_m, params.delta
    return min(
        p * d - c_m * policy.x - c * policy.q,
        (p - c - dl) * d - c_m * policy.x + dl * policy.q,
        (p - c - dl - c_m) * policy.x + dl * policy.q,
    )


def profit_by_cases(params: ModelParams, policy: Policy, y: float) -> float:
    """Case-split form of the profit; agrees with profit() everywhere."""
    d = demand(params, y)
    p, c, c_m, dl = params.p, params.c, params.c_m, params.delta
    if d < policy.q:
        return p * d - c_m * policy.x - c * policy.q
    if d <= policy.x:
        return (p - c - dl) * d - c_m * policy.x + dl * policy.q
    return (p - c - dl - c_m) * policy.x + dl * policy.q


def fulfilled_demand(params: ModelParams, x: float, y: float) -> float:
    """Units actually sold: min{d, x}; q never matters because quick
    response tops production up to the fabric cap whenever it pays."""
    return min(demand(params, y), x)


def total_waste(params: ModelParams, x: float, y: float) -> float:
    """Total deadstock (x - d)^+: unsold goods plus unused fabric."""
    return max(x - demand(params, y), 0.0)


def wtc_integrand(params: ModelParams, x: float, tau: float, y: float) -> float:
    """Pointwise excess of waste over tau times fulfilled demand.

    Equals max{x - (1 + tau) d, -tau x}; a distribution satisfies the
    waste-to-consumption bound tau iff this has nonpositive expectation.
    """
    if tau < 0.0:
        raise ValueError(f"waste ratio bound must be nonnegative, got tau={tau}")
    d = demand(params, y)
    return max(x - (1.0 + tau) * d, -tau * x)
