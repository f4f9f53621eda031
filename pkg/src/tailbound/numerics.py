"""Shared scalar numerics: bracketed golden-section search, adaptive
Simpson quadrature, bisection, and a stable log-sum-exp.

Everything here is deterministic: identical inputs produce bit-identical
outputs, which the certificate-replay machinery relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0  # 1/phi^2


class NumericError(RuntimeError):
    """Internal numeric failure: bracketing exhaustion, quadrature
    non-convergence, or a failed runtime consistency check."""


@dataclass(frozen=True)
class ScalarMinResult:
    x: float
    fun: float
    interior: bool  # False when the infimum was approached at a search cap


def logsumexp(x: np.ndarray) -> float:
    """log(sum(exp(x))) computed without overflow.

    Accepts -inf entries (zero weight); returns -inf for an all--inf input.
    """
    x = np.asarray(x, dtype=float)
    m = np.max(x)
    if not np.isfinite(m):
        return float(m)  # all -inf (or a stray +inf propagates)
    return float(m + np.log(np.sum(np.exp(x - m))))


def golden_section_min(f, a: float, b: float, rel_tol: float = 1e-10):
    """Minimize a unimodal f on [a, b] to relative interval width rel_tol.

    Returns (x, f(x)) at the best interior probe.
    """
    if b < a:
        a, b = b, a
    h = b - a
    c = a + INV_PHI_SQ * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    while h > rel_tol * max(abs(a), abs(b), 1e-300):
        if yc < yd:
            b, d, yd = d, c, yc
            h = b - a
            c = a + INV_PHI_SQ * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h = b - a
            d = a + INV_PHI * h
            yd = f(d)
    return (c, yc) if yc < yd else (d, yd)


def minimize_positive(
    f,
    x_init: float = 1.0,
    lo_cap: float = 1e-12,
    hi_cap: float = 1e8,
    rel_tol: float = 1e-10,
) -> ScalarMinResult:
    """Minimize f over (0, inf) for f that is quasiconvex there.

    Brackets the minimizer by doubling (or halving) from x_init until the
    objective rises on both flanks, then refines by golden section. If f is
    still decreasing when a cap is reached, the boundary value at the cap is
    reported with interior=False; the true infimum is then a limit beyond the
    cap and the returned value is a valid upper evaluation of it.

    f may return +inf outside its effective domain; x_init must be interior.
    """
    if not (lo_cap < x_init < hi_cap):
        raise ValueError("x_init must lie strictly between the search caps")
    x = x_init
    fx = f(x)
    if not math.isfinite(fx):
        # walk into the effective domain toward 0 (domains here are
        # down-closed intervals containing small positive values)
        while not math.isfinite(fx):
            x /= 2.0
            if x < lo_cap:
                raise NumericError("bracketing exhaustion: no finite objective value found")
            fx = f(x)

    up_x = min(2.0 * x, hi_cap)
    f_up = f(up_x)
    if f_up < fx:
        # walk upward while decreasing
        prev_x, prev_f = x, fx
        x, fx = up_x, f_up
        while x < hi_cap:
            nxt = min(2.0 * x, hi_cap)
            f_nxt = f(nxt)
            if f_nxt < fx:
                prev_x, prev_f = x, fx
                x, fx = nxt, f_nxt
            else:
                xm, fm = golden_section_min(f, prev_x, nxt, rel_tol)
                if fm < fx:
                    return ScalarMinResult(xm, fm, True)
                return ScalarMinResult(x, fx, True)
        return ScalarMinResult(x, fx, False)

    down_x = max(x / 2.0, lo_cap)
    f_down = f(down_x)
    if f_down < fx:
        prev_x = x
        x, fx = down_x, f_down
        while x > lo_cap:
            nxt = max(x / 2.0, lo_cap)
            f_nxt = f(nxt)
            if f_nxt < fx:
                prev_x = x
                x, fx = nxt, f_nxt
            else:
                xm, fm = golden_section_min(f, nxt, prev_x, rel_tol)
                if fm < fx:
                    return ScalarMinResult(xm, fm, True)
                return ScalarMinResult(x, fx, True)
        return ScalarMinResult(x, fx, False)

    # x_init already sits between two larger values
    xm, fm = golden_section_min(f, down_x, up_x, rel_tol)
    if fm < fx:
        return ScalarMinResult(xm, fm, True)
    return ScalarMinResult(x, fx, True)


def maximize_on_interval(f, a: float, b: float, rel_tol: float = 1e-10):
    """Maximize a unimodal f on [a, b]; returns (x, f(x))."""
    x, neg = golden_section_min(lambda t: -f(t), a, b, rel_tol)
    return x, -neg


def _simpson(fa, fm, fb, h):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(f, a: float, b: float, rel_tol: float = 1e-9, max_depth: int = 60) -> float:
    """Integrate f on [a, b] by adaptive Simpson quadrature.

    The tolerance is relative to a dense trapezoid estimate of int |f| (a
    3-point estimate would miss concentrated integrands entirely and drive
    the tolerance to zero); recursion beyond max_depth or past the node
    budget raises NumericError (quadrature non-convergence).
    """
    if b <= a:
        return 0.0
    grid = np.linspace(a, b, 257)
    coarse = float(np.trapezoid([abs(f(x)) for x in grid], grid))
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = _simpson(fa, fm, fb, b - a)
    scale = max(coarse, abs(whole), 1e-300)
    eps = rel_tol * scale
    budget = [500_000]

    def recurse(a, fa, b, fb, m, fm, whole, eps, depth):
        budget[0] -= 2
        if budget[0] < 0:
            raise NumericError("quadrature non-convergence: node budget exhausted")
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        left = _simpson(fa, flm, fm, m - a)
        right = _simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if abs(delta) <= 15.0 * eps:
            return left + right + delta / 15.0
        if depth >= max_depth:
            raise NumericError("quadrature non-convergence: adaptive Simpson depth exhausted")
        return recurse(a, fa, m, fm, lm, flm, left, eps / 2.0, depth + 1) + recurse(
            m, fm, b, fb, rm, frm, right, eps / 2.0, depth + 1
        )

    return recurse(a, fa, b, fb, m, fm, whole, eps, 0)


def bisect_increasing(g, lo: float, hi: float, target: float, rel_tol: float = 1e-12) -> float:
    """Solve g(x) = target for increasing g on [lo, hi] by bisection."""
    glo = g(lo) - target
    ghi = g(hi) - target
    if glo > 0.0 or ghi < 0.0:
        raise ValueError("bisection bracket does not straddle the target")
    while hi - lo > rel_tol * max(abs(lo), abs(hi), 1e-300):
        mid = 0.5 * (lo + hi)
        if g(mid) - target <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
