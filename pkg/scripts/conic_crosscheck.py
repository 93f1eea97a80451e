"""Optional external-solver cross-check for exported cone programs.

Non-blocking companion to the test suite: parses a serialized .qrcp file,
rebuilds it as a cvxpy problem, solves it with whatever conic solver is
installed, and compares the optimum against an expected value. Intended
for CI jobs that have a conic solver available; absence of cvxpy is not a
failure.

Usage:
    python scripts/conic_crosscheck.py --program out/conic_n10.qrcp --expected 0.0415
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from qrdro.conic_export import ConicProgram, parse  # noqa: E402


def solve_with_cvxpy(program: ConicProgram) -> float:
    import cvxpy as cp

    v = cp.Variable(len(program.variables))

    def affine(form):
        expr = form.const
        for idx, coef in form.coeffs:
            expr = expr + coef * v[idx]
        return expr

    constraints = []
    for i, (lo, hi) in enumerate(program.bounds):
        if lo != -math.inf:
            constraints.append(v[i] >= lo)
        if hi != math.inf:
            constraints.append(v[i] <= hi)
    for r in program.rows:
        constraints.append(affine(program.forms[r]) >= 0)
    for head, (m1, m2) in program.socs:
        constraints.append(
            cp.SOC(affine(program.forms[head]), cp.hstack([affine(program.forms[m1]), affine(program.forms[m2])]))
        )
    objective = affine(program.objective)
    problem = cp.Problem(
        cp.Maximize(objective) if program.objective_sense == "max" else cp.Minimize(objective),
        constraints,
    )
    problem.solve()
    if problem.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"external solver returned status {problem.status}")
    return float(problem.value)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--program", required=True)
    parser.add_argument("--expected", type=float, default=None)
    parser.add_argument("--tol", type=float, default=1e-5)
    args = parser.parse_args(argv)
    try:
        import cvxpy  # noqa: F401
    except ImportError:
        print("cvxpy not installed; cross-check skipped (non-blocking)")
        return 0
    value = solve_with_cvxpy(parse(Path(args.program).read_text()))
    print(f"external optimum: {value:.10f}")
    if args.expected is not None:
        gap = abs(value - args.expected)
        print(f"expected:         {args.expected:.10f}  (gap {gap:.2e})")
        if gap > args.tol:
            print("MISMATCH", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
