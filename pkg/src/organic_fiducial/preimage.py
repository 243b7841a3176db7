"""Preimage intervals of the forward map and the applicability checks.

For an observed count ``x`` and primary value ``gamma`` the set of parameter
values reproducing ``x`` is ``{theta : cdf(theta, x-1) <= gamma < cdf(theta, x)}``.
Both partial sums decrease in ``theta``, so the set is an interval whose ends
are found by bisection on the two CDF level crossings.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import (
    STATUS_MAX_ITER,
    STATUS_NON_BRACKETING,
    STATUS_OK,
    DomainError,
    EmptySupport,
    raise_for_status,
)
from .model import BINOMIAL, UNIFORM_PRIMARY, _cdf
from .numerics import ROOT_TOL, _inc_beta_tails, _lower_gamma_tails

__all__ = [
    "PreimageInterval",
    "PostDataSupport",
    "ArgumentKind",
    "Condition2aReport",
    "preimage_interval",
    "post_data_support",
    "classify_argument",
    "check_condition_2a",
    "check_condition_2b",
    "default_gamma_grid",
]

_MAX_DOUBLINGS = 1100


@dataclass(frozen=True)
class PreimageInterval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = False

    @property
    def width(self):
        return self.hi - self.lo

    def contains(self, theta):
        above = theta >= self.lo if self.lo_closed else theta > self.lo
        below = theta <= self.hi if self.hi_closed else theta < self.hi
        return above and below


@njit(cache=True)
def _solve_level(kind, n, z, gamma, lo, hi, abs_tol, rel_tol, max_iter):
    # invariant: cdf(lo, z) > gamma >= cdf(hi, z)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= max(abs_tol, rel_tol * abs(mid)):
            return mid, STATUS_OK
        if _cdf(kind, n, mid, z) > gamma:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    if hi - lo <= max(abs_tol, rel_tol * abs(mid)):
        return mid, STATUS_OK
    return mid, STATUS_MAX_ITER


@njit(cache=True)
def _upper_bracket(kind, n, x, gamma):
    if kind == BINOMIAL:
        return 1.0, STATUS_OK
    b = x + 1.0
    for _ in range(_MAX_DOUBLINGS):
        if _cdf(kind, n, b, x) < gamma:
            return b, STATUS_OK
        b *= 2.0
    return b, STATUS_NON_BRACKETING


@njit(cache=True)
def _preimage(kind, n, x, gamma, abs_tol, rel_tol, max_iter):
    """Return ``(lo, hi, status)`` of the preimage interval for ``gamma``."""
    top, status = _upper_bracket(kind, n, x, gamma)
    if status != STATUS_OK:
        return math.nan, math.nan, status
    if x == 0:
        lo = 0.0
    else:
        lo, status = _solve_level(kind, n, x - 1, gamma, 0.0, top, abs_tol, rel_tol, max_iter)
        if status != STATUS_OK:
            return math.nan, math.nan, status
    if kind == BINOMIAL and x == n:
        hi = 1.0
    else:
        hi, status = _solve_level(kind, n, x, gamma, 0.0, top, abs_tol, rel_tol, max_iter)
        if status != STATUS_OK:
            return math.nan, math.nan, status
    return lo, hi, STATUS_OK


def _endpoint_flags(scenario, lo, hi):
    lo_closed = scenario.domain.contains(lo)
    hi_closed = scenario.kind == "binomial" and scenario.x == scenario.n
    return lo_closed, hi_closed


def preimage_interval(scenario, gamma, tol=ROOT_TOL):
    """Parameter values that reproduce the observed count at ``gamma``.

    Examples
    --------
    >>> from organic_fiducial.model import DiscreteSamplingScenario
    >>> iv = preimage_interval(DiscreteSamplingScenario.poisson(0), 0.25)
    >>> round(iv.hi, 9)
    1.386294361
    """
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    lo, hi, status = _preimage(
        scenario.code, scenario.n_or_zero, scenario.x, gamma,
        tol.abs_tol, tol.rel_tol, int(tol.max_iter),
    )
    raise_for_status(status, f"preimage endpoints at gamma={gamma!r}")
    return PreimageInterval(lo, hi, *_endpoint_flags(scenario, lo, hi))


# ---------------------------------------------------------------------------
# post-data distribution of the primary variable


class ArgumentKind(enum.Enum):
    STRONG = "Strong"
    MODERATE = "Moderate"


@dataclass(frozen=True)
class PostDataSupport:
    """Disjoint sub-intervals of the primary support that survive the data.

    ``normalizer`` rescales the pre-data density to a proper post-data
    density on ``intervals``.
    """

    intervals: tuple
    masses: tuple
    normalizer: float
    pi0: object = field(default=UNIFORM_PRIMARY, compare=False)

    @property
    def total_mass(self):
        return math.fsum(self.masses)

    def contains(self, gamma):
        return any(lo < gamma < hi for lo, hi in self.intervals)

    def as_arrays(self):
        """Interval ends and cumulative normalized masses for the samplers."""
        los = np.array([iv[0] for iv in self.intervals], dtype=np.float64)
        his = np.array([iv[1] for iv in self.intervals], dtype=np.float64)
        cum = np.cumsum(np.asarray(self.masses, dtype=np.float64)) * self.normalizer
        cum[-1] = 1.0
        return los, his, cum


def _merge(intervals):
    merged = []
    for lo, hi in sorted((float(a), float(b)) for a, b in intervals):
        if not lo < hi:
            continue
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    return merged


def post_data_support(scenario, pi0=UNIFORM_PRIMARY, restriction=None):
    """Post-data support of ``Gamma`` and its normalizing constant.

    Every value of ``Gamma`` stays possible after observing a binomial or
    Poisson count, so by default the support is the whole of ``pi0``'s.
    ``restriction`` (a sequence of ``(lo, hi)`` pairs) builds a truncated
    support explicitly.
    """
    lo0, hi0 = pi0.support
    if restriction is None:
        pieces = [(lo0, hi0)]
    else:
        pieces = _merge((max(lo, lo0), min(hi, hi0)) for lo, hi in restriction)
    masses = [pi0.mass(lo, hi) for lo, hi in pieces]
    kept = [(iv, m) for iv, m in zip(pieces, masses) if m > 0.0]
    total = math.fsum(m for _, m in kept)
    if not kept or total <= 0.0:
        raise EmptySupport(f"restriction {restriction!r} has no primary mass")
    return PostDataSupport(
        intervals=tuple(iv for iv, _ in kept),
        masses=tuple(m for _, m in kept),
        normalizer=1.0 / total,
        pi0=pi0,
    )


def classify_argument(support, pi0=None):
    """Strong when the surviving support carries all of ``pi0``'s mass."""
    pi0 = support.pi0 if pi0 is None else pi0
    total = math.fsum(pi0.mass(lo, hi) for lo, hi in support.intervals)
    return ArgumentKind.STRONG if abs(total - 1.0) <= 1e-12 else ArgumentKind.MODERATE


# ---------------------------------------------------------------------------
# applicability checks


@dataclass
class Condition2aReport:
    covered: bool
    uncovered: list
    union: tuple
    grid_size: int

    def describe(self):
        if self.covered:
            return "covered"
        return ";".join(f"[{lo!r},{hi!r})" for lo, hi in self.uncovered)


def default_gamma_grid(size=10_000):
    """Grid on (0, 1) that is geometric near both ends, reaching 1e-9."""
    tail = np.geomspace(1e-9, 1e-2, 200)
    body = np.linspace(1e-2, 1.0 - 1e-2, max(int(size) - 400, 3))
    return np.unique(np.concatenate([tail, body, 1.0 - tail]))


@njit(cache=True)
def _preimages_on_grid(kind, n, x, grid, abs_tol, rel_tol, max_iter, los, his):
    for i in range(grid.shape[0]):
        lo, hi, status = _preimage(kind, n, x, grid[i], abs_tol, rel_tol, max_iter)
        if status != STATUS_OK:
            return i, status
        los[i] = lo
        his[i] = hi
    return -1, STATUS_OK


def _toward(start, stop, slack, count=40):
    """Probe points running from ``start`` toward the domain edge ``stop``.

    The last ``slack`` before a finite edge is tolerance-level and skipped; an
    infinite edge is probed up to where the pmf underflows.
    """
    if math.isinf(stop):
        return start + math.copysign(1.0, stop) * np.geomspace(slack, 500.0, count)
    span = abs(stop - start)
    if span <= slack:
        return np.empty(0)
    return stop + (start - stop) * np.geomspace(slack / span, 1.0, count)


def _band_tails(scenario, theta):
    """``(cdf(theta, x), P(Y >= x))``, each with the small tail kept precise."""
    x = scenario.x
    if scenario.kind == "binomial":
        n = scenario.n
        c_hi = 1.0 if x == n else _inc_beta_tails(n - x, x + 1.0, 1.0 - theta)[0]
        sf_lo = 1.0 if x == 0 else _inc_beta_tails(float(x), n - x + 1.0, theta)[0]
    else:
        c_hi = _lower_gamma_tails(x + 1.0, theta)[1]
        sf_lo = 1.0 if x == 0 else _lower_gamma_tails(float(x), theta)[0]
    return c_hi, sf_lo


def _reachable(scenario, theta, support):
    # theta lies in some preimage iff its gamma band
    # [cdf(theta, x-1), cdf(theta, x)) meets the support.  Inside the domain
    # both tails are positive, so pieces touching 0 or 1 need no comparison
    # (the tails themselves may underflow there)
    c_hi, sf_lo = _band_tails(scenario, theta)
    return any((a <= 0.0 or c_hi > a) and (b >= 1.0 or sf_lo > 1.0 - b) for a, b in support.intervals)


def check_condition_2a(scenario, gamma_grid=None, tol=ROOT_TOL, support=None, h_x=None):
    """Check that preimages over the post-data support cover ``H_x``.

    Preimage ends are nonincreasing in ``gamma``, so over a sorted grid the
    union is connected exactly when each interval overlaps its neighbour.
    What lies beyond the extreme grid points is probed pointwise: a parameter
    value belongs to some preimage iff its gamma band
    ``[cdf(theta, x-1), cdf(theta, x))`` meets the support.
    """
    grid = default_gamma_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=np.float64)
    grid = np.unique(grid)
    if grid.size < 2 or not (grid[0] > 0.0 and grid[-1] < 1.0):
        raise DomainError("gamma grid needs at least two points inside (0, 1)")
    if grid[0] > 1e-6 or grid[-1] < 1.0 - 1e-6:
        raise DomainError("gamma grid must reach within 1e-6 of both 0 and 1")
    support = post_data_support(scenario) if support is None else support
    h_x = scenario.h_x if h_x is None else h_x
    grid = grid[[support.contains(g) for g in grid]]
    if grid.size == 0:
        raise DomainError("no gamma grid point lies in the post-data support")

    los = np.empty_like(grid)
    his = np.empty_like(grid)
    bad, status = _preimages_on_grid(
        scenario.code, scenario.n_or_zero, scenario.x, grid,
        tol.abs_tol, tol.rel_tol, int(tol.max_iter), los, his,
    )
    raise_for_status(status, f"preimage at gamma={grid[bad]!r}" if bad >= 0 else "")

    slack = 10.0 * max(tol.abs_tol, tol.rel_tol * float(np.max(np.abs(his[np.isfinite(his)]))))
    uncovered = []
    for k in range(grid.size - 1):
        # grid points k < k+1: lo and hi both drop, so a gap is (hi[k+1], lo[k])
        if his[k + 1] < los[k] - slack:
            gap = (float(his[k + 1]), float(los[k]))
            mid = 0.5 * (gap[0] + gap[1])
            if not _reachable(scenario, mid, support):
                uncovered.append(gap)
    union = (float(los[-1]), float(his[0]))

    # beyond the grid: the remnants of H_x above and below the union
    remnants = []
    if union[1] < h_x.hi:
        remnants.append(_toward(union[1], h_x.hi, slack))
    if h_x.lo < union[0]:
        remnants.append(_toward(union[0], h_x.lo, slack))
    for probes in remnants:
        missed = [p for p in probes if h_x.contains(p) and not _reachable(scenario, float(p), support)]
        if missed:
            uncovered.append((float(min(missed)), float(max(missed))))
    return Condition2aReport(not uncovered, uncovered, union, int(grid.size))


def _probe_points(domain, count):
    t = (np.arange(count) + 0.5) / count
    if domain.bounded:
        pts = domain.lo + (domain.hi - domain.lo) * np.linspace(0.0, 1.0, count)
        if domain.lo_open or domain.hi_open:
            pts = domain.lo + (domain.hi - domain.lo) * t
        return pts
    if math.isfinite(domain.lo):
        return domain.lo + t / (1.0 - t)
    if math.isfinite(domain.hi):
        return domain.hi - t / (1.0 - t)
    return np.tan(math.pi * (t - 0.5))


def check_condition_2b(gpd, h_x, probe_count=65):
    """True iff the global pre-data weight is one positive constant on ``h_x``.

    Unbounded domains are probed through ``theta = lo + t / (1 - t)``.
    """
    if probe_count < 2:
        raise DomainError("need at least two probe points")
    values = np.array([float(gpd(p)) for p in _probe_points(h_x, int(probe_count))])
    ref = values[0]
    if not (math.isfinite(ref) and ref > 0.0):
        return False
    return bool(np.all(np.abs(values - ref) <= 1e-12 * abs(ref)))
