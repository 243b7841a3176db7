"""Scalar numerical kernels: bisection, adaptive Simpson, incomplete beta/gamma.

The public functions accept arbitrary Python callables and validate their
arguments.  The underscore-prefixed ``@njit`` kernels are the compiled
counterparts used inside the sampling loops; they report failures through
integer status codes (see :mod:`organic_fiducial.errors`) instead of raising.
"""

import math
from dataclasses import dataclass

from numba import njit

from .errors import (
    DomainError,
    MaxIterExceeded,
    NonBracketing,
    NonFinite,
)

__all__ = [
    "Bracket",
    "Tolerance",
    "ROOT_TOL",
    "QUAD_TOL",
    "ENDPOINT_OFFSET",
    "bisect_monotone",
    "integrate_adaptive",
    "reg_inc_beta",
    "reg_lower_gamma",
]

# fraction of the (substituted) interval kept clear of each endpoint
ENDPOINT_OFFSET = 1e-10

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAXIT = 10000


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise DomainError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class Tolerance:
    """Stopping rule shared by the root finder and the integrator.

    For :func:`bisect_monotone` ``max_iter`` bounds the number of halvings; for
    :func:`integrate_adaptive` it bounds the number of panel subdivisions.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0 or not self.rel_tol > 0:
            raise DomainError("tolerances must be positive")
        if int(self.max_iter) < 1:
            raise DomainError("max_iter must be at least 1")


ROOT_TOL = Tolerance(1e-10, 1e-10, 200)
QUAD_TOL = Tolerance(1e-10, 1e-9, 200_000)


def bisect_monotone(f, target, bracket, tol=ROOT_TOL):
    """Solve ``f(r) = target`` for a function monotone on ``bracket``.

    Halves the bracket until its width is at most
    ``max(tol.abs_tol, tol.rel_tol * |midpoint|)`` and returns the midpoint.
    Works for increasing and decreasing ``f`` alike.

    Raises
    ------
    NonBracketing
        ``target`` lies outside the range spanned by ``f(lo)`` and ``f(hi)``.
    MaxIterExceeded
        The width criterion was not met within ``tol.max_iter`` halvings.
    """
    lo, hi = float(bracket.lo), float(bracket.hi)
    f_lo, f_hi = f(lo), f(hi)
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)):
        raise NonFinite(f"f is not finite at the bracket ends ({f_lo}, {f_hi})")
    if not (min(f_lo, f_hi) <= target <= max(f_lo, f_hi)):
        raise NonBracketing(
            f"target {target!r} outside [{min(f_lo, f_hi)!r}, {max(f_lo, f_hi)!r}]"
        )
    if f_lo == target:
        return lo
    if f_hi == target:
        return hi
    increasing = f_hi > f_lo
    for _ in range(int(tol.max_iter)):
        mid = 0.5 * (lo + hi)
        if hi - lo <= max(tol.abs_tol, tol.rel_tol * abs(mid)):
            return mid
        below = f(mid) < target
        if below == increasing:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    if hi - lo <= max(tol.abs_tol, tol.rel_tol * abs(mid)):
        return mid
    raise MaxIterExceeded(f"bracket width {hi - lo!r} after {tol.max_iter} halvings")


def _smoothstep(t):
    return t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t)


def integrate_adaptive(f, interval, tol=QUAD_TOL):
    """Adaptive Simpson quadrature of ``f`` over ``interval``.

    The integral is taken in the variable ``t`` with
    ``x = lo + w * (3t^2 - 2t^3)``.  The Jacobian ``6t(1-t)`` vanishes at both
    ends, which turns integrable inverse-square-root endpoint singularities
    into bounded integrands; nodes are clamped to
    ``[ENDPOINT_OFFSET, 1 - ENDPOINT_OFFSET]`` so ``f`` is never evaluated
    exactly at an endpoint.

    A singularity at an upper endpoint near 1 is only resolved to about
    1e-8 absolute, because ``1 - x`` loses digits there; write such
    integrands in the reflected variable when more is needed.
    """
    lo, hi = float(interval.lo), float(interval.hi)
    width = hi - lo

    def g(t):
        t = min(max(t, ENDPOINT_OFFSET), 1.0 - ENDPOINT_OFFSET)
        if t <= 0.5:
            s, ds = _smoothstep(t)
            x = lo + width * s
        else:
            s, ds = _smoothstep(1.0 - t)
            x = hi - width * s
        # rounding can land on an endpoint even though t is interior
        if x <= lo:
            x = math.nextafter(lo, hi)
        elif x >= hi:
            x = math.nextafter(hi, lo)
        v = f(x) * width * ds
        if not math.isfinite(v):
            raise NonFinite(f"integrand is {v!r} at x={x!r}")
        return v

    # coarse pass over 8 panels sets the scale for the relative tolerance
    panels = 8
    nodes = [i / (2 * panels) for i in range(2 * panels + 1)]
    vals = [g(t) for t in nodes]
    stack = []
    coarse = 0.0
    for k in range(panels):
        a, b = nodes[2 * k], nodes[2 * k + 2]
        fa, fm, fb = vals[2 * k], vals[2 * k + 1], vals[2 * k + 2]
        whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
        coarse += whole
        stack.append((a, b, fa, fm, fb, whole))
    budget = max(tol.abs_tol, tol.rel_tol * abs(coarse))

    total = 0.0
    splits = 0
    while stack:
        a, b, fa, fm, fb, whole = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = g(lm), g(rm)
        left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
        right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
        delta = left + right - whole
        if abs(delta) <= 15.0 * budget * (b - a) or b - a < 1e-15:
            total += left + right + delta / 15.0
            continue
        splits += 1
        if splits > tol.max_iter:
            raise MaxIterExceeded(f"more than {tol.max_iter} panel subdivisions")
        stack.append((a, m, fa, flm, fm, left))
        stack.append((m, b, fm, frm, fb, right))
    return total


# ---------------------------------------------------------------------------
# compiled special functions


@njit(cache=True)
def _log_beta(a, b):
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


@njit(cache=True)
def _beta_cf(a, b, x):
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < _CF_EPS:
            return h
    return math.nan


@njit(cache=True)
def _inc_beta_tails(a, b, x):
    """Return ``(I_x(a, b), 1 - I_x(a, b))``; the smaller tail is computed
    directly so it keeps full relative precision."""
    if x <= 0.0:
        return 0.0, 1.0
    if x >= 1.0:
        return 1.0, 0.0
    log_front = a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        lower = math.exp(log_front) * _beta_cf(a, b, x) / a
        return lower, 1.0 - lower
    upper = math.exp(log_front) * _beta_cf(b, a, 1.0 - x) / b
    return 1.0 - upper, upper


@njit(cache=True)
def _lower_gamma_tails(s, x):
    """Return ``(P(s, x), Q(s, x))`` with the smaller tail computed directly."""
    if x <= 0.0:
        return 0.0, 1.0
    if math.isinf(x):
        return 1.0, 0.0
    log_front = s * math.log(x) - x - math.lgamma(s)
    if x < s + 1.0:
        ap = s
        term = 1.0 / s
        total = term
        for _ in range(_CF_MAXIT):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _CF_EPS:
                lower = total * math.exp(log_front)
                return lower, 1.0 - lower
        return math.nan, math.nan
    b = x + 1.0 - s
    c = 1.0 / _CF_TINY
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAXIT + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = b + an / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < _CF_EPS:
            upper = math.exp(log_front) * h
            return 1.0 - upper, upper
    return math.nan, math.nan


def reg_inc_beta(a, b, x):
    """Regularized incomplete beta function ``I_x(a, b)``."""
    a, b, x = float(a), float(b), float(x)
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"shape parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    lower, _ = _inc_beta_tails(a, b, x)
    if math.isnan(lower):
        raise MaxIterExceeded(f"continued fraction did not converge for a={a}, b={b}")
    return min(max(lower, 0.0), 1.0)


def reg_lower_gamma(s, x):
    """Regularized lower incomplete gamma function ``P(s, x)``."""
    s, x = float(s), float(x)
    if not (s > 0 and math.isfinite(s)):
        raise DomainError(f"shape must be positive, got {s}")
    if not x >= 0.0:
        raise DomainError(f"x must be nonnegative, got {x}")
    lower, _ = _lower_gamma_tails(s, x)
    if math.isnan(lower):
        raise MaxIterExceeded(f"series/continued fraction did not converge for s={s}")
    return min(max(lower, 0.0), 1.0)
