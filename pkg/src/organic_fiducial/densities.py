"""Pre-data weight functions, slice densities and reference posteriors.

Given a primary value ``gamma``, the parameter is confined to the preimage
interval and distributed there as likelihood times local pre-data (LPD)
weight, renormalized.  That slice density is a truncated Beta (binomial) or
Gamma (Poisson) when the LPD is flat or Jeffreys; any other LPD goes through
adaptive quadrature.  Both routes share one log-space representation.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

from .errors import (
    STATUS_MAX_ITER,
    STATUS_NON_FINITE,
    STATUS_OK,
    STATUS_UNDERFLOW,
    DomainError,
    raise_for_status,
)
from .model import BINOMIAL, ParameterDomain, _open_uniform
from .numerics import QUAD_TOL, ROOT_TOL, _inc_beta_tails, _log_beta, _lower_gamma_tails
from .preimage import PreimageInterval, preimage_interval

__all__ = [
    "GpdDescriptor",
    "LpdDescriptor",
    "ConditionalSliceDensity",
    "ReferencePosterior",
    "lpd_eval",
    "build_slice",
    "slice_pdf",
    "slice_cdf",
    "slice_quantile",
    "slice_sample",
    "reference_posterior",
    "reference_for_lpd",
    "posterior_pdf",
    "posterior_cdf",
]

# LPD codes understood by the kernels
LPD_CONSTANT = 0
LPD_JEFFREYS_BINOMIAL = 1
LPD_JEFFREYS_POISSON = 2
LPD_POWER = 3
LPD_TABULATED = 4

# slice evaluation paths
PATH_BETA = 0
PATH_GAMMA = 1
PATH_GENERIC = 2

_PATH_NAMES = {PATH_BETA: "conjugate_beta", PATH_GAMMA: "conjugate_gamma", PATH_GENERIC: "generic"}

# the log shift of the generic path is taken over this many interior
# probes, the outer ones this far inside the interval
_SHIFT_PROBES = 16
_SHIFT_EDGE = 1e-3
_STACK = 400


@dataclass(frozen=True)
class GpdDescriptor:
    """Global pre-data weight: ``a`` on ``domain`` (times ``shape`` if given).

    ``shape`` exists only to express non-constant weights for the
    applicability check; the sampler itself needs the constant form.
    """

    domain: ParameterDomain
    a: float = 1.0
    shape: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"GPD level must be positive, got {self.a}")

    @classmethod
    def constant(cls, scenario, a=1.0):
        return cls(scenario.domain, a)

    def __call__(self, theta):
        if not self.domain.contains(theta):
            return 0.0
        if self.shape is None:
            return self.a
        return self.a * float(self.shape(theta))


@dataclass(frozen=True)
class LpdDescriptor:
    """Local pre-data weight, defined up to the positive factor ``level``.

    Use the constructors: :meth:`constant`, :meth:`jeffreys_binomial`,
    :meth:`jeffreys_poisson`, :meth:`power` and :meth:`tabulated`.
    """

    kind: str
    level: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0
    grid: tuple = ()
    weights: tuple = ()
    name: Optional[str] = field(default=None, compare=False)

    _KINDS = ("constant", "jeffreys_binomial", "jeffreys_poisson", "power", "tabulated")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise DomainError(f"unknown LPD kind {self.kind!r}")
        if not (self.level > 0 and math.isfinite(self.level)):
            raise DomainError(f"LPD level must be positive and finite, got {self.level}")
        if self.kind == "power" and not (self.alpha > -1.0 and self.beta > -1.0):
            raise DomainError("power LPD exponents must exceed -1 for local integrability")
        if self.kind == "tabulated":
            grid = np.asarray(self.grid, dtype=np.float64)
            w = np.asarray(self.weights, dtype=np.float64)
            if grid.ndim != 1 or grid.size < 2 or grid.shape != w.shape:
                raise DomainError("tabulated LPD needs matching grids of at least two points")
            if np.any(np.diff(grid) <= 0):
                raise DomainError("tabulated LPD grid must be strictly increasing")
            if np.any(~(w > 0)) or not np.all(np.isfinite(w)):
                raise DomainError("tabulated LPD weights must be positive and finite")

    @classmethod
    def constant(cls, level=1.0, name=None):
        return cls("constant", level, name=name)

    @classmethod
    def jeffreys_binomial(cls, level=1.0, name=None):
        return cls("jeffreys_binomial", level, name=name)

    @classmethod
    def jeffreys_poisson(cls, level=1.0, name=None):
        return cls("jeffreys_poisson", level, name=name)

    @classmethod
    def jeffreys(cls, scenario, level=1.0, name=None):
        if scenario.kind == "binomial":
            return cls.jeffreys_binomial(level, name)
        return cls.jeffreys_poisson(level, name)

    @classmethod
    def power(cls, alpha, beta=0.0, level=1.0, name=None):
        """``theta**alpha * (1 - theta)**beta`` (Poisson: ``beta`` must be 0)."""
        return cls("power", level, float(alpha), float(beta), name=name)

    @classmethod
    def tabulated(cls, grid, weights, name=None):
        return cls("tabulated", 1.0, grid=tuple(map(float, grid)),
                   weights=tuple(map(float, weights)), name=name)

    def scaled(self, factor):
        """Same weight times ``factor``; must leave every result unchanged."""
        if self.kind == "tabulated":
            return LpdDescriptor.tabulated(self.grid, [w * factor for w in self.weights], self.name)
        return LpdDescriptor(self.kind, self.level * factor, self.alpha, self.beta, name=self.name)

    @property
    def label(self):
        if self.name:
            return self.name
        if self.kind == "power":
            return f"power({self.alpha:g},{self.beta:g})"
        return self.kind

    def validate_for(self, scenario):
        if scenario.kind == "poisson" and self.kind == "jeffreys_binomial":
            raise DomainError("binomial Jeffreys LPD used with a Poisson model")
        if scenario.kind == "binomial" and self.kind == "jeffreys_poisson":
            raise DomainError("Poisson Jeffreys LPD used with a binomial model")
        if scenario.kind == "poisson" and self.kind == "power" and self.beta != 0.0:
            raise DomainError("a Poisson power LPD takes no (1 - theta) exponent")

    @property
    def quadrature_order(self):
        """Order ``k`` of the endpoint map used when this LPD is integrated.

        A weight behaving like ``d^m`` at an interval end becomes
        ``t^(k(m+1)-1)`` under the map, which is kept at least linear.
        """
        if self.kind != "power" or min(self.alpha, self.beta) >= 0.0:
            # flat or Jeffreys-type ends are smooth under the order-2 map
            return 2
        return max(2, math.ceil(2.0 / (1.0 + min(self.alpha, self.beta)) - 1e-9))

    def pack(self):
        """Arrays handed to the compiled kernels."""
        code = {
            "constant": LPD_CONSTANT,
            "jeffreys_binomial": LPD_JEFFREYS_BINOMIAL,
            "jeffreys_poisson": LPD_JEFFREYS_POISSON,
            "power": LPD_POWER,
            "tabulated": LPD_TABULATED,
        }[self.kind]
        params = np.array([math.log(self.level), self.alpha, self.beta, float(self.quadrature_order)])
        if self.kind == "tabulated":
            tx = np.asarray(self.grid, dtype=np.float64)
            tw = np.log(np.asarray(self.weights, dtype=np.float64))
        else:
            tx = np.zeros(1)
            tw = np.zeros(1)
        return code, params, tx, tw


@njit(cache=True)
def _log_lpd(code, params, tx, tw, theta, theta_c):
    # theta_c = 1 - theta, computed by the caller without cancellation
    if code == LPD_CONSTANT:
        return params[0]
    if code == LPD_JEFFREYS_BINOMIAL:
        return params[0] - 0.5 * (math.log(theta) + math.log(theta_c))
    if code == LPD_JEFFREYS_POISSON:
        return params[0] - 0.5 * math.log(theta)
    if code == LPD_POWER:
        v = params[0]
        if params[1] != 0.0:
            v += params[1] * math.log(theta)
        if params[2] != 0.0:
            v += params[2] * math.log(theta_c)
        return v
    # log-linear interpolation, constant beyond the table
    return params[0] + np.interp(theta, tx, tw)


@njit(cache=True)
def _log_unnorm(kind, n, x, code, params, tx, tw, theta, theta_c):
    """Log of likelihood times LPD at ``theta`` (binomial coefficient dropped)."""
    v = _log_lpd(code, params, tx, tw, theta, theta_c)
    if x > 0:
        v += x * math.log(theta)
    if kind == BINOMIAL:
        if n - x > 0:
            v += (n - x) * math.log(theta_c)
    else:
        v -= theta
    return v


# ---------------------------------------------------------------------------
# generic path: adaptive Simpson in the smoothstep variable


@njit(cache=True)
def _integrand(kind, n, x, code, params, tx, tw, shift, lo, hi, t):
    if t < 1e-10:
        t = 1e-10
    elif t > 1.0 - 1e-10:
        t = 1.0 - 1e-10
    w = hi - lo
    order = params[3]
    u = 1.0 - t
    if order == 2.0:
        # smoothstep; the tail toward the nearer end is computed directly
        if t <= 0.5:
            s = t * t * (3.0 - 2.0 * t)
        else:
            s = u * u * (3.0 - 2.0 * u)
        ds = 6.0 * t * u
    else:
        # t -> I_t(k, k): Jacobian vanishes like t^(k-1) at both ends
        low, up = _inc_beta_tails(order, order, t)
        s = low if t <= 0.5 else up
        ds = math.exp((order - 1.0) * (math.log(t) + math.log(u)) - _log_beta(order, order))
    if t <= 0.5:
        theta = lo + w * s
        theta_c = (1.0 - lo) - w * s
    else:
        theta = hi - w * s
        theta_c = (1.0 - hi) + w * s
    if theta <= 0.0 or (kind == BINOMIAL and theta_c <= 0.0):
        return 0.0
    return math.exp(_log_unnorm(kind, n, x, code, params, tx, tw, theta, theta_c) - shift) * w * ds


@njit(cache=True)
def _integrate_slice(kind, n, x, code, params, tx, tw, shift, lo, hi, abs_tol, rel_tol, max_splits):
    """Integral of ``exp(log_unnorm - shift)`` over ``[lo, hi]``; ``(value, status)``."""
    sa = np.empty(_STACK)
    sb = np.empty(_STACK)
    sfa = np.empty(_STACK)
    sfm = np.empty(_STACK)
    sfb = np.empty(_STACK)
    sw = np.empty(_STACK)
    top = 0
    panels = 4
    coarse = 0.0
    prev = _integrand(kind, n, x, code, params, tx, tw, shift, lo, hi, 0.0)
    for k in range(panels):
        a = k / panels
        b = (k + 1) / panels
        fm = _integrand(kind, n, x, code, params, tx, tw, shift, lo, hi, 0.5 * (a + b))
        fb = _integrand(kind, n, x, code, params, tx, tw, shift, lo, hi, b)
        whole = (b - a) * (prev + 4.0 * fm + fb) / 6.0
        coarse += whole
        sa[top] = a
        sb[top] = b
        sfa[top] = prev
        sfm[top] = fm
        sfb[top] = fb
        sw[top] = whole
        top += 1
        prev = fb
    if not math.isfinite(coarse):
        return math.nan, STATUS_NON_FINITE
    budget = max(abs_tol * (hi - lo), rel_tol * abs(coarse))
    total = 0.0
    splits = 0
    while top > 0:
        top -= 1
        a = sa[top]
        b = sb[top]
        fa = sfa[top]
        fm = sfm[top]
        fb = sfb[top]
        whole = sw[top]
        m = 0.5 * (a + b)
        flm = _integrand(kind, n, x, code, params, tx, tw, shift, lo, hi, 0.5 * (a + m))
        frm = _integrand(kind, n, x, code, params, tx, tw, shift, lo, hi, 0.5 * (m + b))
        left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
        right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
        delta = left + right - whole
        if not math.isfinite(delta):
            return math.nan, STATUS_NON_FINITE
        if abs(delta) <= 15.0 * budget * (b - a) or b - a < 1e-15:
            total += left + right + delta / 15.0
            continue
        splits += 1
        if splits > max_splits or top + 2 > _STACK:
            return total, STATUS_MAX_ITER
        sa[top] = a
        sb[top] = m
        sfa[top] = fa
        sfm[top] = flm
        sfb[top] = fm
        sw[top] = left
        top += 1
        sa[top] = m
        sb[top] = b
        sfa[top] = fm
        sfm[top] = frm
        sfb[top] = fb
        sw[top] = right
        top += 1
    return total, STATUS_OK


@njit(cache=True)
def _log_unnorm_at(kind, n, x, code, params, tx, tw, lo, hi, frac):
    theta = lo + (hi - lo) * frac
    theta_c = (1.0 - lo) - (hi - lo) * frac
    return _log_unnorm(kind, n, x, code, params, tx, tw, theta, theta_c)


@njit(cache=True)
def _generic_shift(kind, n, x, code, params, tx, tw, lo, hi):
    # scale of the integrand away from integrable end singularities, so
    # the shifted integral is O(width) and the absolute tolerance means
    # what it says
    best = -math.inf
    for k in range(_SHIFT_PROBES + 1):
        frac = _SHIFT_EDGE + (1.0 - 2.0 * _SHIFT_EDGE) * k / _SHIFT_PROBES
        v = _log_unnorm_at(kind, n, x, code, params, tx, tw, lo, hi, frac)
        if v > best:
            best = v
    return best


# ---------------------------------------------------------------------------
# slice construction and inversion


@njit(cache=True)
def _conj_tails(path, sa, sb, theta):
    if path == PATH_BETA:
        return _inc_beta_tails(sa, sb, theta)
    return _lower_gamma_tails(sa, theta)


@njit(cache=True)
def _build(kind, n, x, path, sa, sb, code, params, tx, tw, lo, hi, q_abs, q_rel, q_max):
    """Slice state ``(log_mass, upper, base, mass, shift, status)``.

    Conjugate paths describe the truncated distribution by the tail used
    (``upper``), that tail at ``lo`` (``base``) and the interval probability
    (``mass``).  The generic path stores the log shift and the integral of
    ``exp(log_unnorm - shift)`` in ``mass``.
    """
    if path == PATH_GENERIC:
        shift = _generic_shift(kind, n, x, code, params, tx, tw, lo, hi)
        if not math.isfinite(shift):
            return math.nan, False, 0.0, 0.0, 0.0, STATUS_NON_FINITE
        z, status = _integrate_slice(kind, n, x, code, params, tx, tw, shift, lo, hi, q_abs, q_rel, q_max)
        if status != STATUS_OK:
            return math.nan, False, 0.0, 0.0, 0.0, status
        if not z > 0.0:
            return math.nan, False, 0.0, 0.0, 0.0, STATUS_UNDERFLOW
        return shift + math.log(z), False, 0.0, z, shift, STATUS_OK
    l_lo, u_lo = _conj_tails(path, sa, sb, lo)
    l_hi, u_hi = _conj_tails(path, sa, sb, hi)
    upper = u_lo < l_hi
    if upper:
        base = u_lo
        mass = u_lo - u_hi
    else:
        base = l_lo
        mass = l_hi - l_lo
    if not mass > 0.0:
        return math.nan, upper, base, mass, 0.0, STATUS_UNDERFLOW
    if path == PATH_BETA:
        log_full = _log_beta(sa, sb)
    else:
        log_full = math.lgamma(sa)
    return params[0] + log_full + math.log(mass), upper, base, mass, 0.0, STATUS_OK


@njit(cache=True)
def _quantile(kind, n, x, path, sa, sb, code, params, tx, tw, lo, hi,
              upper, base, mass, shift, u, r_abs, r_rel, r_max, q_abs, q_rel, q_max):
    if u <= 0.0:
        return lo, STATUS_OK
    if u >= 1.0:
        return hi, STATUS_OK
    a = lo
    b = hi
    if path == PATH_GENERIC:
        # bisection on the running integral: only [a, mid] is integrated per step
        target = u * mass
        acc = 0.0
        for _ in range(r_max):
            mid = 0.5 * (a + b)
            if b - a <= max(r_abs, r_rel * abs(mid)):
                return mid, STATUS_OK
            piece, status = _integrate_slice(kind, n, x, code, params, tx, tw, shift, a, mid, q_abs, q_rel, q_max)
            if status != STATUS_OK:
                return mid, status
            if acc + piece < target:
                acc += piece
                a = mid
            else:
                b = mid
        return 0.5 * (a + b), STATUS_MAX_ITER
    target = u * mass
    for _ in range(r_max):
        mid = 0.5 * (a + b)
        if b - a <= max(r_abs, r_rel * abs(mid)):
            return mid, STATUS_OK
        l_mid, u_mid = _conj_tails(path, sa, sb, mid)
        below = (base - u_mid) < target if upper else (l_mid - base) < target
        if below:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b), STATUS_MAX_ITER


@njit(cache=True)
def _cdf_in_slice(kind, n, x, path, sa, sb, code, params, tx, tw, lo, hi,
                  upper, base, mass, shift, theta, q_abs, q_rel, q_max):
    if theta <= lo:
        return 0.0, STATUS_OK
    if theta >= hi:
        return 1.0, STATUS_OK
    if path == PATH_GENERIC:
        piece, status = _integrate_slice(kind, n, x, code, params, tx, tw, shift, lo, theta, q_abs, q_rel, q_max)
        return min(max(piece / mass, 0.0), 1.0), status
    l_t, u_t = _conj_tails(path, sa, sb, theta)
    v = (base - u_t) / mass if upper else (l_t - base) / mass
    return min(max(v, 0.0), 1.0), STATUS_OK


@dataclass(frozen=True)
class ConditionalSliceDensity:
    """Likelihood times LPD, truncated to the preimage interval of ``gamma``.

    ``log_normalizer`` is ``log C1``: the density on the interval is
    ``exp(log_unnorm(theta) + log_normalizer)``.
    """

    scenario: object
    gamma: float
    interval: PreimageInterval
    lpd: LpdDescriptor
    log_normalizer: float
    path: str
    shape_a: float
    shape_b: float
    _state: tuple = field(repr=False, compare=False)
    tol: object = field(default=ROOT_TOL, repr=False, compare=False)
    quad_tol: object = field(default=QUAD_TOL, repr=False, compare=False)

    def _kernel_args(self):
        sc = self.scenario
        code, params, tx, tw = self.lpd.pack()
        path_code, upper, base, mass, shift = self._state
        return (sc.code, sc.n_or_zero, sc.x, path_code, self.shape_a, self.shape_b,
                code, params, tx, tw, self.interval.lo, self.interval.hi,
                upper, base, mass, shift)


def _choose_path(scenario, lpd, path):
    x = scenario.x
    conj = None
    if scenario.kind == "binomial":
        n = scenario.n
        if lpd.kind == "constant":
            conj = (PATH_BETA, x + 1.0, n - x + 1.0)
        elif lpd.kind == "jeffreys_binomial":
            conj = (PATH_BETA, x + 0.5, n - x + 0.5)
    else:
        if lpd.kind == "constant":
            conj = (PATH_GAMMA, x + 1.0, 1.0)
        elif lpd.kind == "jeffreys_poisson":
            conj = (PATH_GAMMA, x + 0.5, 1.0)
    if path in (None, "auto"):
        return conj if conj is not None else (PATH_GENERIC, math.nan, math.nan)
    if path == "generic":
        if conj is None:
            return PATH_GENERIC, math.nan, math.nan
        return PATH_GENERIC, conj[1], conj[2]
    if path == "conjugate":
        if conj is None:
            raise DomainError(f"LPD {lpd.label!r} has no conjugate form for {scenario.kind}")
        return conj
    raise DomainError(f"unknown path override {path!r}")


def path_codes(scenario, lpd, path=None):
    """``(path_code, shape_a, shape_b)`` chosen for a scenario/LPD pair."""
    lpd.validate_for(scenario)
    return _choose_path(scenario, lpd, path)


def slice_from_interval(scenario, gamma, interval, lpd, tol=ROOT_TOL, quad_tol=QUAD_TOL, path=None):
    """Build the slice density on a precomputed preimage interval."""
    path_code, sa, sb = path_codes(scenario, lpd, path)
    code, params, tx, tw = lpd.pack()
    log_mass, upper, base, mass, shift, status = _build(
        scenario.code, scenario.n_or_zero, scenario.x, path_code, sa, sb,
        code, params, tx, tw, interval.lo, interval.hi,
        quad_tol.abs_tol, quad_tol.rel_tol, int(quad_tol.max_iter),
    )
    raise_for_status(status, f"slice normalizer at gamma={gamma!r}")
    return ConditionalSliceDensity(
        scenario=scenario,
        gamma=float(gamma),
        interval=interval,
        lpd=lpd,
        log_normalizer=-log_mass,
        path=_PATH_NAMES[path_code],
        shape_a=sa,
        shape_b=sb,
        _state=(path_code, bool(upper), base, mass, shift),
        tol=tol,
        quad_tol=quad_tol,
    )


def build_slice(scenario, gamma, lpd, tol=ROOT_TOL, quad_tol=QUAD_TOL, path=None):
    """Slice density at ``gamma``; ``path`` may force ``"generic"`` or ``"conjugate"``.

    Flat and Jeffreys LPDs give truncated Beta/Gamma slices evaluated through
    the incomplete beta/gamma functions; everything else is integrated
    numerically.
    """
    interval = preimage_interval(scenario, gamma, tol)
    return slice_from_interval(scenario, gamma, interval, lpd, tol, quad_tol, path)


def lpd_eval(lpd, theta):
    """Value of the LPD at ``theta`` (up to its fixed proportionality constant).

    Power-type weights are extended to the domain ends by continuity, so
    they may return 0 or inf there.
    """
    theta = float(theta)
    binomial_only = lpd.kind == "jeffreys_binomial" or (lpd.kind == "power" and lpd.beta != 0.0)
    if not (0.0 <= theta < math.inf) or (binomial_only and theta > 1.0):
        raise DomainError(f"LPD {lpd.label!r} undefined at {theta}")
    code, params, tx, tw = lpd.pack()
    if 0.0 < theta and (theta < 1.0 or not binomial_only):
        return math.exp(_log_lpd(code, params, tx, tw, theta, 1.0 - theta))
    if lpd.kind in ("constant", "tabulated"):
        return math.exp(_log_lpd(code, params, tx, tw, theta, 1.0 - theta))
    if lpd.kind == "jeffreys_binomial" or lpd.kind == "jeffreys_poisson":
        return math.inf
    with np.errstate(divide="ignore"):
        v = lpd.level * float(np.power(theta, lpd.alpha)) * float(np.power(1.0 - theta, lpd.beta))
    return v


def _log_unnorm_scalar(sl, theta):
    sc = sl.scenario
    code, params, tx, tw = sl.lpd.pack()
    return _log_unnorm(sc.code, sc.n_or_zero, sc.x, code, params, tx, tw, theta, 1.0 - theta)


def slice_pdf(sl, theta):
    """Slice density at ``theta``; zero off the preimage interval."""
    theta = float(theta)
    if not sl.interval.contains(theta):
        return 0.0
    with np.errstate(divide="ignore"):
        v = _log_unnorm_scalar(sl, theta) + sl.log_normalizer
    return math.exp(v)


def slice_cdf(sl, theta):
    args = sl._kernel_args()
    q = sl.quad_tol
    v, status = _cdf_in_slice(*args, float(theta), q.abs_tol, q.rel_tol, int(q.max_iter))
    raise_for_status(status, "slice CDF")
    return v


def slice_quantile(sl, u):
    """Inverse CDF of the slice; returns the interval ends at ``u = 0`` and ``u = 1``."""
    u = float(u)
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {u}")
    t, q = sl.tol, sl.quad_tol
    v, status = _quantile(*sl._kernel_args(), u, t.abs_tol, t.rel_tol, int(t.max_iter),
                          q.abs_tol, q.rel_tol, int(q.max_iter))
    raise_for_status(status, "slice quantile")
    return v


def slice_sample(sl, rng):
    """One draw from the slice by inversion of a uniform from ``rng``."""
    lo, hi = sl.interval.lo, sl.interval.hi
    if hi - lo < 10.0 * max(sl.tol.abs_tol, sl.tol.rel_tol * abs(hi)):
        return 0.5 * (lo + hi)
    return slice_quantile(sl, _open_uniform(rng))


# ---------------------------------------------------------------------------
# Bayesian reference posteriors


@njit(cache=True)
def _beta_cdf_many(a, b, xs, out):
    for i in range(xs.shape[0]):
        out[i] = _inc_beta_tails(a, b, min(max(xs[i], 0.0), 1.0))[0]


@njit(cache=True)
def _gamma_cdf_many(s, xs, out):
    for i in range(xs.shape[0]):
        out[i] = _lower_gamma_tails(s, max(xs[i], 0.0))[0]


@dataclass(frozen=True)
class ReferencePosterior:
    """``Beta(a, b)`` or ``Gamma(a, rate=1)`` posterior for overlays and KS."""

    kind: str
    a: float
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in ("beta", "gamma"):
            raise DomainError(f"unknown posterior family {self.kind!r}")
        if not (self.a > 0 and self.b > 0):
            raise DomainError("posterior parameters must be positive")

    @property
    def label(self):
        if self.kind == "beta":
            return f"Beta({self.a:g},{self.b:g})"
        return f"Gamma({self.a:g},1)"

    @property
    def domain(self):
        if self.kind == "beta":
            return ParameterDomain(0.0, 1.0)
        return ParameterDomain(0.0, math.inf, lo_open=True, hi_open=True)

    def pdf(self, theta):
        t = np.asarray(theta, dtype=np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "beta":
                inside = (t > 0) & (t < 1)
                tc = np.where(inside, t, 0.5)
                logp = (self.a - 1) * np.log(tc) + (self.b - 1) * np.log1p(-tc) - _log_beta(self.a, self.b)
            else:
                inside = t > 0
                tc = np.where(inside, t, 1.0)
                logp = (self.a - 1) * np.log(tc) - tc - math.lgamma(self.a)
        out = np.where(inside, np.exp(logp), 0.0)
        return float(out) if out.ndim == 0 else out

    def cdf(self, theta):
        t = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        out = np.empty_like(t)
        if self.kind == "beta":
            _beta_cdf_many(self.a, self.b, t, out)
        else:
            _gamma_cdf_many(self.a, t, out)
        return float(out[0]) if np.ndim(theta) == 0 else out

    def upper_limit(self):
        """Parameter value above which the posterior mass is below 1e-12."""
        if self.kind == "beta":
            return 1.0
        hi = self.a + 10.0
        while self.cdf(hi) < 1.0 - 1e-12:
            hi *= 1.5
        return hi


_PRIOR_ALIASES = {"uniform": "flat", "constant": "flat", "flat": "flat",
                  "constant_improper": "flat", "jeffreys": "jeffreys"}


def reference_posterior(scenario, prior_kind):
    """Conjugate posterior under a flat or Jeffreys prior.

    For the Poisson model ``"uniform"`` is an alias of the flat improper
    prior on ``(0, inf)``.
    """
    kind = _PRIOR_ALIASES.get(str(prior_kind).lower())
    if kind is None:
        raise DomainError(f"unknown prior {prior_kind!r}")
    x = scenario.x
    shift = 1.0 if kind == "flat" else 0.5
    if scenario.kind == "binomial":
        return ReferencePosterior("beta", x + shift, scenario.n - x + shift)
    return ReferencePosterior("gamma", x + shift)


def reference_for_lpd(scenario, lpd):
    """Posterior whose prior is proportional to ``lpd``; None if not conjugate."""
    if lpd.kind == "constant":
        return reference_posterior(scenario, "uniform")
    if lpd.kind in ("jeffreys_binomial", "jeffreys_poisson"):
        return reference_posterior(scenario, "jeffreys")
    if lpd.kind == "power":
        x = scenario.x
        if scenario.kind == "binomial":
            return ReferencePosterior("beta", x + 1.0 + lpd.alpha, scenario.n - x + 1.0 + lpd.beta)
        return ReferencePosterior("gamma", x + 1.0 + lpd.alpha)
    return None


def posterior_pdf(ref, theta):
    if not ref.domain.contains(float(theta)) and not (ref.kind == "gamma" and theta == 0):
        raise DomainError(f"{theta} outside the {ref.label} support")
    return ref.pdf(float(theta))


def posterior_cdf(ref, theta):
    if not ref.domain.contains(float(theta)) and not (ref.kind == "gamma" and theta == 0):
        raise DomainError(f"{theta} outside the {ref.label} support")
    return ref.cdf(float(theta))
