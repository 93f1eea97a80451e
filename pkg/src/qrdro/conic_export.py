"""Explicit second-order cone programs for external cross-checking.

The transport-ball solvers in this package never call a conic solver; this
module builds the equivalent cone programs as plain data, serializes them
in a line-oriented text format, and verifies candidate assignments against
the constraint system. Internal dual solutions lift to feasible conic
points: the epigraph variable of each sample is its inner infimum, and the
support multipliers are zero at interior inner minimizers or the
stationarity residual at a clamped end.

Text format (all decimals printed with 17 significant digits; parse is a
bit-exact inverse):

    qrcp 1
    vars <count>
    <name> <lower|-inf> <upper|inf>        one line per variable
    objective max <const> <idx>:<coef> ...
    forms <count>
    <const> <idx>:<coef> ...               affine forms over variables
    rows <count>
    <form index>                           meaning: form >= 0
    socs <count>
    <head form> <member form> <member form>   meaning: ||members|| <= head
    end
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core_model import ModelParams, Policy
from .wasserstein_dro import WassersteinAmbiguity, worst_case_expected_profit, wtc_sup


@dataclass(frozen=True)
class LinearForm:
    """Sparse affine expression: const + sum coef * variable."""

    coeffs: tuple[tuple[int, float], ...]
    const: float

    def evaluate(self, values: np.ndarray) -> float:
        total = self.const
        for idx, coef in self.coeffs:
            total += coef * values[idx]
        return total


@dataclass(frozen=True)
class ConicProgram:
    variables: tuple[str, ...]
    bounds: tuple[tuple[float, float], ...]  # -inf / inf for free sides
    objective_sense: str
    objective: LinearForm
    forms: tuple[LinearForm, ...]
    rows: tuple[int, ...]  # form indices constrained to be >= 0
    socs: tuple[tuple[int, tuple[int, int]], ...]  # (head form, member forms)

    def __post_init__(self):
        nf = len(self.forms)
        for r in self.rows:
            if not 0 <= r < nf:
                raise ValueError(f"row references unknown form {r}")
        for head, members in self.socs:
            for idx in (head, *members):
                if not 0 <= idx < nf:
                    raise ValueError(f"cone references unknown form {idx}")

    def index_of(self, name: str) -> int:
        return self.variables.index(name)


@dataclass
class FeasibilityReport:
    objective_value: float
    bound_violation: float
    row_violation: float
    soc_violation: float
    details: list[str] = field(default_factory=list)

    @property
    def max_violation(self) -> float:
        return max(self.bound_violation, self.row_violation, self.soc_violation)


class _Builder:
    def __init__(self):
        self.names: list[str] = []
        self.bounds: list[tuple[float, float]] = []
        self.forms: list[LinearForm] = []
        self.rows: list[int] = []
        self.socs: list[tuple[int, tuple[int, int]]] = []

    def var(self, name: str, lo: float, hi: float) -> int:
        self.names.append(name)
        self.bounds.append((lo, hi))
        return len(self.names) - 1

    def form(self, coeffs: dict[int, float], const: float = 0.0) -> int:
        packed = tuple(sorted((i, float(c)) for i, c in coeffs.items() if c != 0.0))
        self.forms.append(LinearForm(packed, float(const)))
        return len(self.forms) - 1

    def row(self, coeffs: dict[int, float], const: float = 0.0) -> None:
        self.rows.append(self.form(coeffs, const))

    def soc(self, head: int, m1: int, m2: int) -> None:
        self.socs.append((head, (m1, m2)))


def build_socp(
    params: ModelParams, amb: WassersteinAmbiguity, tau: float | None = None
) -> ConicProgram:
    """Cone program whose optimum is the robust (optionally waste-capped)
    quick-response problem over the transport ball.

    Per sample there are two 3-dimensional cones (one for each
    demand-dependent profit piece), their nonnegativity companions, and a
    linear cap by the demand-independent piece. A tau adds the budget row
    and one more cone family in (alpha, kappa, beta, zeta).
    """
    ys = amb.values
    n = ys.size
    p, c, cm, dl = params.p, params.c, params.c_m, params.delta
    lo, hi = amb.support_lo, amb.support_hi
    box_lo, box_hi = params.policy_box()
    eps2 = amb.radius * amb.radius
    inf = math.inf

    b = _Builder()
    ix = b.var("x", box_lo, box_hi)
    iq = b.var("q", box_lo, box_hi)
    il = b.var("lambda", 0.0, inf)
    ig = [b.var(f"gamma[{i}]", -inf, inf) for i in range(n)]
    ith = [b.var(f"theta[{i}]", 0.0, inf) for i in range(n)]
    iet = [b.var(f"eta[{i}]", 0.0, inf) for i in range(n)]
    iph = [b.var(f"phi[{i}]", 0.0, inf) for i in range(n)]
    ips = [b.var(f"psi[{i}]", 0.0, inf) for i in range(n)]

    objective = LinearForm(
        tuple(sorted([(il, -eps2)] + [(g, 1.0 / n) for g in ig])), 0.0
    )

    b.row({ix: 1.0, iq: -1.0})  # x >= q
    a1 = p * (1.0 - p)
    a2 = (p - c - dl) * (1.0 - p)
    for i in range(n):
        yi = float(ys[i])
        for a_slope, qcoef, mlo, mhi in (
            (a1, -c, ith[i], iet[i]),
            (a2, dl, iph[i], ips[i]),
        ):
            center = {il: yi * yi, ix: -cm, iq: qcoef, mlo: lo, mhi: -hi, ig[i]: -1.0}
            member1 = b.form({mlo: -1.0, mhi: 1.0, il: -2.0 * yi}, a_slope)
            member2 = b.form({**center, il: yi * yi - 1.0})
            head = b.form({**center, il: yi * yi + 1.0})
            b.soc(head, member1, member2)
            b.row(center)
        b.row({ix: p - c - dl - cm, iq: dl, ig[i]: -1.0})  # gamma cap

    if tau is not None:
        if tau < 0.0:
            raise ValueError(f"waste ratio bound must be nonnegative, got tau={tau}")
        ia = b.var("alpha", 0.0, inf)
        ik = [b.var(f"kappa[{i}]", -inf, inf) for i in range(n)]
        ibt = [b.var(f"beta[{i}]", 0.0, inf) for i in range(n)]
        izt = [b.var(f"zeta[{i}]", 0.0, inf) for i in range(n)]
        slope = (1.0 + tau) * (1.0 - p)
        budget = {ia: -eps2}
        budget.update({k: -1.0 / n for k in ik})
        b.row(budget)  # -(eps^2 alpha + mean kappa) >= 0
        for i in range(n):
            yi = float(ys[i])
            center = {ia: yi * yi, ix: -1.0, ibt[i]: lo, izt[i]: -hi, ik[i]: 1.0}
            member1 = b.form({ibt[i]: -1.0, izt[i]: 1.0, ia: -2.0 * yi}, slope)
            member2 = b.form({**center, ia: yi * yi - 1.0})
            head = b.form({**center, ia: yi * yi + 1.0})
            b.soc(head, member1, member2)
            b.row(center)
            b.row({ik[i]: 1.0, ix: tau})  # kappa >= -tau x

    return ConicProgram(
        tuple(b.names), tuple(b.bounds), "max", objective,
        tuple(b.forms), tuple(b.rows), tuple(b.socs),
    )


def _fmt(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return format(v, ".17g")


def _fmt_form(form: LinearForm) -> str:
    parts = [_fmt(form.const)]
    parts.extend(f"{i}:{_fmt(c)}" for i, c in form.coeffs)
    return " ".join(parts)


def serialize(program: ConicProgram) -> str:
    lines = ["qrcp 1", f"vars {len(program.variables)}"]
    for name, (lo, hi) in zip(program.variables, program.bounds):
        lines.append(f"{name} {_fmt(lo)} {_fmt(hi)}")
    lines.append(f"objective {program.objective_sense} {_fmt_form(program.objective)}")
    lines.append(f"forms {len(program.forms)}")
    lines.extend(_fmt_form(f) for f in program.forms)
    lines.append(f"rows {len(program.rows)}")
    lines.extend(str(r) for r in program.rows)
    lines.append(f"socs {len(program.socs)}")
    lines.extend(f"{head} {m1} {m2}" for head, (m1, m2) in program.socs)
    lines.append("end")
    return "\n".join(lines) + "\n"


def _parse_form(text: str) -> LinearForm:
    parts = text.split()
    const = float(parts[0])
    coeffs = []
    for token in parts[1:]:
        idx, coef = token.split(":")
        coeffs.append((int(idx), float(coef)))
    return LinearForm(tuple(coeffs), const)


def parse(text: str) -> ConicProgram:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    pos = 0

    def take() -> str:
        nonlocal pos
        if pos >= len(lines):
            raise ValueError("truncated conic program text")
        ln = lines[pos]
        pos += 1
        return ln

    if take() != "qrcp 1":
        raise ValueError("unknown conic program format header")
    nv = int(take().split()[1])
    names, bounds = [], []
    for _ in range(nv):
        name, lo, hi = take().split()
        names.append(name)
        bounds.append((float(lo), float(hi)))
    obj_parts = take().split(maxsplit=2)
    objective = _parse_form(obj_parts[2])
    nf = int(take().split()[1])
    forms = tuple(_parse_form(take()) for _ in range(nf))
    nr = int(take().split()[1])
    rows = tuple(int(take()) for _ in range(nr))
    ns = int(take().split()[1])
    socs = []
    for _ in range(ns):
        head, m1, m2 = (int(t) for t in take().split())
        socs.append((head, (m1, m2)))
    if take() != "end":
        raise ValueError("missing end marker in conic program text")
    return ConicProgram(
        tuple(names), tuple(bounds), obj_parts[1], objective, forms, rows, tuple(socs)
    )


def check_candidate(program: ConicProgram, assignment: dict[str, float]) -> FeasibilityReport:
    """Evaluate every bound, row, and cone at the assignment."""
    missing = [name for name in program.variables if name not in assignment]
    if missing:
        raise ValueError(f"assignment is missing variables: {missing[:5]}")
    values = np.array([float(assignment[name]) for name in program.variables])

    report = FeasibilityReport(
        objective_value=program.objective.evaluate(values),
        bound_violation=0.0, row_violation=0.0, soc_violation=0.0,
    )
    for name, v, (lo, hi) in zip(program.variables, values, program.bounds):
        gap = max(lo - v, v - hi, 0.0)
        if gap > report.bound_violation:
            report.bound_violation = gap
            report.details.append(f"bound {name}: off by {gap:.3g}")
    for r in program.rows:
        val = program.forms[r].evaluate(values)
        if -val > report.row_violation:
            report.row_violation = -val
            report.details.append(f"row form {r}: value {val:.3g}")
    for head, (m1, m2) in program.socs:
        hv = program.forms[head].evaluate(values)
        norm = math.hypot(program.forms[m1].evaluate(values), program.forms[m2].evaluate(values))
        if norm - hv > report.soc_violation:
            report.soc_violation = norm - hv
            report.details.append(f"cone head form {head}: norm exceeds head by {norm - hv:.3g}")
    return report


def _inf_with_multipliers(a: float, bconst: float, lam: float, y: float, lo: float, hi: float):
    """Inner minimum of a*z + bconst + lam (z-y)^2 over [lo, hi] plus the
    end-point multipliers that certify it in the dualized cone."""
    if lam > 0.0:
        z = y - a / (2.0 * lam)
        if z < lo:
            return a * lo + bconst + lam * (lo - y) * (lo - y), a + 2.0 * lam * (lo - y), 0.0
        if z > hi:
            return a * hi + bconst + lam * (hi - y) * (hi - y), 0.0, -(a + 2.0 * lam * (hi - y))
        return a * z + bconst + lam * (z - y) * (z - y), 0.0, 0.0
    if a >= 0.0:
        return a * lo + bconst, a, 0.0
    return a * hi + bconst, 0.0, -a


def _sup_with_multipliers(slope: float, x: float, alpha: float, y: float, lo: float, hi: float):
    """Supremum of x - slope*z - alpha (z-y)^2 over [lo, hi] plus its
    end-point multipliers."""
    if alpha > 0.0:
        z = y - slope / (2.0 * alpha)
        if z < lo:
            return x - slope * lo - alpha * (lo - y) * (lo - y), slope + 2.0 * alpha * (lo - y), 0.0
        if z > hi:
            return x - slope * hi - alpha * (hi - y) * (hi - y), 0.0, -(slope + 2.0 * alpha * (hi - y))
        return x - slope * z - alpha * (z - y) * (z - y), 0.0, 0.0
    if slope >= 0.0:
        return x - slope * lo, slope, 0.0
    return x - slope * hi, 0.0, -slope


def lift_solution(
    params: ModelParams,
    amb: WassersteinAmbiguity,
    policy: Policy,
    tau: float | None = None,
) -> dict[str, float]:
    """Extend an internal solution to a full conic assignment.

    Feasible by construction, with objective equal to the internal dual
    value: gamma is the per-sample inner infimum at the optimal lambda,
    and the support multipliers follow the clamp rules documented in the
    module docstring.
    """
    dual = worst_case_expected_profit(params, policy, amb)
    lam = dual.lambda_star
    p, c, cm, dl = params.p, params.c, params.c_m, params.delta
    lo, hi = amb.support_lo, amb.support_hi
    x, q = policy.x, policy.q
    a1 = p * (1.0 - p)
    a2 = (p - c - dl) * (1.0 - p)
    b1 = -cm * x - c * q
    b2 = -cm * x + dl * q
    b3 = (p - c - dl - cm) * x + dl * q

    out = {"x": x, "q": q, "lambda": lam}
    for i, yi in enumerate(amb.values):
        v1, th, et = _inf_with_multipliers(a1, b1, lam, float(yi), lo, hi)
        v2, ph, ps = _inf_with_multipliers(a2, b2, lam, float(yi), lo, hi)
        out[f"gamma[{i}]"] = min(v1, v2, b3)
        out[f"theta[{i}]"] = th
        out[f"eta[{i}]"] = et
        out[f"phi[{i}]"] = ph
        out[f"psi[{i}]"] = ps

    if tau is not None:
        sup = wtc_sup(params, x, tau, amb)
        alpha = sup.alpha_star
        slope = (1.0 + tau) * (1.0 - params.p)
        out["alpha"] = alpha
        for i, yi in enumerate(amb.values):
            v1, bt, zt = _sup_with_multipliers(slope, x, alpha, float(yi), lo, hi)
            out[f"kappa[{i}]"] = max(v1, -tau * x)
            out[f"beta[{i}]"] = bt
            out[f"zeta[{i}]"] = zt
    return out
