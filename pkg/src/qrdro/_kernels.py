"""Scalar numeric kernels behind the transport-ball dual solvers.

Jitted with numba when it is importable (it is a declared dependency);
the pure-Python fallback runs the identical code, just slower. Sample
reductions use a fixed pairwise summation order, so values are bitwise
reproducible no matter how callers parallelize around these functions.

Profit pieces are parameterized by their slope a_j and intercept b_j in
the support variable z: a1 = p(1-p), a2 = (p-c-delta)(1-p), a3 = 0.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap


INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
MULTIPLIER_CAP = 1e9
MULTIPLIER_TOL = 1e-9


@njit(cache=True)
def pairwise_sum(buf, n):
    """Sum buf[:n] by repeated pairing; destroys buf."""
    m = n
    while m > 1:
        half = m // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if m % 2 == 1:
            buf[half] = buf[m - 1]
            m = half + 1
        else:
            m = half
    return buf[0]


@njit(cache=True)
def inner_infima(lam, ys, a1, a2, b1, b2, b3, lo, hi, out):
    """Per-sample inf over z in [lo, hi] of profit(z) + lam (z - y_i)^2.

    The inf commutes with the min over affine pieces; each piece has an
    explicit minimizer (clamped stationary point for lam > 0, the left
    support end for lam = 0 since all slopes are nonnegative).
    """
    n = ys.shape[0]
    for i in range(n):
        yi = ys[i]
        if lam > 0.0:
            best = b3  # zero-slope piece: the quadratic pins z at y_i
            z = yi - a1 / (2.0 * lam)
            if z < lo:
                z = lo
            elif z > hi:
                z = hi
            v = a1 * z + b1 + lam * (z - yi) * (z - yi)
            if v < best:
                best = v
            z = yi - a2 / (2.0 * lam)
            if z < lo:
                z = lo
            elif z > hi:
                z = hi
            v = a2 * z + b2 + lam * (z - yi) * (z - yi)
            if v < best:
                best = v
        else:
            best = b3
            v = a1 * lo + b1
            if v < best:
                best = v
            v = a2 * lo + b2
            if v < best:
                best = v
        out[i] = best


@njit(cache=True)
def dual_value(lam, eps2, ys, a1, a2, b1, b2, b3, lo, hi, scratch):
    """phi(lam) = -eps^2 lam + mean_i inner_infimum(lam, y_i); concave."""
    inner_infima(lam, ys, a1, a2, b1, b2, b3, lo, hi, scratch)
    return -eps2 * lam + pairwise_sum(scratch, ys.shape[0]) / ys.shape[0]


@njit(cache=True)
def maximize_dual(eps2, ys, a1, a2, b1, b2, b3, lo, hi):
    """Maximize phi over lam >= 0: bracket by doubling, then golden section.

    The bracket starts at [0, 1] and doubles its upper end until phi drops
    at the end point or the cap 1e9 is reached (phi is concave, so a
    one-sided decrease certifies the bracket). Golden section runs until
    the bracket width falls below 1e-9 * (1 + lam); ties move left, toward
    the smaller multiplier.
    """
    scratch = np.empty(ys.shape[0])
    hi_l = 1.0
    f_prev = dual_value(hi_l, eps2, ys, a1, a2, b1, b2, b3, lo, hi, scratch)
    while hi_l < MULTIPLIER_CAP:
        f_next = dual_value(2.0 * hi_l, eps2, ys, a1, a2, b1, b2, b3, lo, hi, scratch)
        hi_l *= 2.0
        if f_next < f_prev:
            break
        f_prev = f_next
    if hi_l > MULTIPLIER_CAP:
        hi_l = MULTIPLIER_CAP

    a, b = 0.0, hi_l
    c = b - (b - a) * INV_PHI
    d = a + (b - a) * INV_PHI
    fc = dual_value(c, eps2, ys, a1, a2, b1, b2, b3, lo, hi, scratch)
    fd = dual_value(d, eps2, ys, a1, a2, b1, b2, b3, lo, hi, scratch)
    while (b - a) > MULTIPLIER_TOL * (1.0 + a):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * INV_PHI
            fc = dual_value(c, eps2, ys, a1, a2, b1, b2, b3, lo, hi, scratch)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * INV_PHI
            fd = dual_value(d, eps2, ys, a1, a2, b1, b2, b3, lo, hi, scratch)
    lam = 0.5 * (a + b)
    f_lam = dual_value(lam, eps2, ys, a1, a2, b1, b2, b3, lo, hi, scratch)
    # the left end (often exactly 0) can beat the interior midpoint
    f_left = dual_value(a, eps2, ys, a1, a2, b1, b2, b3, lo, hi, scratch)
    if f_left >= f_lam:
        return a, f_left
    return lam, f_lam


@njit(cache=True)
def policy_dual_value(x, q, eps2, ys, p, c, cm, dl, lo, hi):
    """Worst-case expected profit of (x, q) via the lam dual."""
    a1 = p * (1.0 - p)
    a2 = (p - c - dl) * (1.0 - p)
    b1 = -cm * x - c * q
    b2 = -cm * x + dl * q
    b3 = (p - c - dl - cm) * x + dl * q
    lam, val = maximize_dual(eps2, ys, a1, a2, b1, b2, b3, lo, hi)
    return val


@njit(cache=True)
def best_q_value(x, box_lo, eps2, ys, p, c, cm, dl, lo, hi, tol):
    """Inner golden section over q in [box_lo, x]; ties prefer smaller q."""
    a, b = box_lo, x
    if b - a <= tol:
        qm = a
        return qm, policy_dual_value(x, qm, eps2, ys, p, c, cm, dl, lo, hi)
    cc = b - (b - a) * INV_PHI
    dd = a + (b - a) * INV_PHI
    fc = policy_dual_value(x, cc, eps2, ys, p, c, cm, dl, lo, hi)
    fd = policy_dual_value(x, dd, eps2, ys, p, c, cm, dl, lo, hi)
    while (b - a) > tol:
        if fc >= fd:
            b, dd, fd = dd, cc, fc
            cc = b - (b - a) * INV_PHI
            fc = policy_dual_value(x, cc, eps2, ys, p, c, cm, dl, lo, hi)
        else:
            a, cc, fc = cc, dd, fd
            dd = a + (b - a) * INV_PHI
            fd = policy_dual_value(x, dd, eps2, ys, p, c, cm, dl, lo, hi)
    qm = 0.5 * (a + b)
    return qm, policy_dual_value(x, qm, eps2, ys, p, c, cm, dl, lo, hi)


@njit(cache=True)
def solve_triangle(eps2, ys, p, c, cm, dl, lo, hi, box_lo, box_hi, tol):
    """Nested golden section over {box_lo <= q <= x <= box_hi}.

    The worst-case expectation is jointly concave in (x, q), so the
    x-marginal max_q value(x, q) is concave and one-dimensional search is
    exact. Ties prefer smaller coordinates, collapsing plateaus toward
    the cheaper policy.
    """
    a, b = box_lo, box_hi
    cc = b - (b - a) * INV_PHI
    dd = a + (b - a) * INV_PHI
    _, fc = best_q_value(cc, box_lo, eps2, ys, p, c, cm, dl, lo, hi, tol)
    _, fd = best_q_value(dd, box_lo, eps2, ys, p, c, cm, dl, lo, hi, tol)
    while (b - a) > tol:
        if fc >= fd:
            b, dd, fd = dd, cc, fc
            cc = b - (b - a) * INV_PHI
            _, fc = best_q_value(cc, box_lo, eps2, ys, p, c, cm, dl, lo, hi, tol)
        else:
            a, cc, fc = cc, dd, fd
            dd = a + (b - a) * INV_PHI
            _, fd = best_q_value(dd, box_lo, eps2, ys, p, c, cm, dl, lo, hi, tol)
    x = 0.5 * (a + b)
    q, val = best_q_value(x, box_lo, eps2, ys, p, c, cm, dl, lo, hi, tol)
    return x, q, val


@njit(cache=True)
def wtc_sups(alpha, ys, slope, x, taux, lo, hi, out):
    """Per-sample sup over z of waste-slack(z) - alpha (z - y_i)^2.

    slope = (1 + tau)(1 - p) is the demand coefficient of the wasteful
    piece; the capped piece is the constant -tau x, attained at z = y_i.
    For alpha = 0 the wasteful piece peaks at the left support end.
    """
    n = ys.shape[0]
    for i in range(n):
        yi = ys[i]
        if alpha > 0.0:
            z = yi - slope / (2.0 * alpha)
            if z < lo:
                z = lo
            elif z > hi:
                z = hi
            v = x - slope * z - alpha * (z - yi) * (z - yi)
        else:
            v = x - slope * lo
        if v < -taux:
            v = -taux
        out[i] = v


@njit(cache=True)
def wtc_dual_value(alpha, eps2, ys, slope, x, taux, lo, hi, scratch):
    """psi(alpha) = eps^2 alpha + mean_i sup_i(alpha); convex."""
    wtc_sups(alpha, ys, slope, x, taux, lo, hi, scratch)
    return eps2 * alpha + pairwise_sum(scratch, ys.shape[0]) / ys.shape[0]


@njit(cache=True)
def minimize_wtc_dual(eps2, ys, slope, x, taux, lo, hi):
    """Minimize psi over alpha >= 0; same bracket/golden-section scheme."""
    scratch = np.empty(ys.shape[0])
    hi_a = 1.0
    f_prev = wtc_dual_value(hi_a, eps2, ys, slope, x, taux, lo, hi, scratch)
    while hi_a < MULTIPLIER_CAP:
        f_next = wtc_dual_value(2.0 * hi_a, eps2, ys, slope, x, taux, lo, hi, scratch)
        hi_a *= 2.0
        if f_next > f_prev:
            break
        f_prev = f_next
    if hi_a > MULTIPLIER_CAP:
        hi_a = MULTIPLIER_CAP

    a, b = 0.0, hi_a
    c = b - (b - a) * INV_PHI
    d = a + (b - a) * INV_PHI
    fc = wtc_dual_value(c, eps2, ys, slope, x, taux, lo, hi, scratch)
    fd = wtc_dual_value(d, eps2, ys, slope, x, taux, lo, hi, scratch)
    while (b - a) > MULTIPLIER_TOL * (1.0 + a):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * INV_PHI
            fc = wtc_dual_value(c, eps2, ys, slope, x, taux, lo, hi, scratch)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * INV_PHI
            fd = wtc_dual_value(d, eps2, ys, slope, x, taux, lo, hi, scratch)
    alpha = 0.5 * (a + b)
    f_alpha = wtc_dual_value(alpha, eps2, ys, slope, x, taux, lo, hi, scratch)
    f_left = wtc_dual_value(a, eps2, ys, slope, x, taux, lo, hi, scratch)
    if f_left <= f_alpha:
        return a, f_left
    return alpha, f_alpha
