"""Two-stage fiducial sampler and the numerical fiducial density.

A draw takes ``gamma`` from the post-data density of the primary variable
and then a parameter value from the slice density on the preimage of
``gamma``.  Draw ``i`` consumes counters ``2i+1`` and ``2i+2`` of a
splitmix64 stream keyed by the seed, so the output does not depend on how
the loop is split across threads.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit, prange
from scipy.interpolate import PchipInterpolator

from .densities import LpdDescriptor, _build, _log_unnorm, _quantile, path_codes
from .errors import (
    STATUS_OK,
    ConditionViolated,
    DomainError,
    DrawFailure,
    raise_for_status,
)
from .model import _cdf, _log_pmf
from .numerics import QUAD_TOL, ROOT_TOL, Tolerance
from .preimage import (
    _preimage,
    check_condition_2a,
    check_condition_2b,
    post_data_support,
)

__all__ = [
    "SamplerConfig",
    "FiducialSample",
    "NumericFiducialCdf",
    "draw_fiducial",
    "fiducial_pdf_numeric",
    "numeric_fiducial_cdf",
    "stream_uniform",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_M53 = 2.0 ** -53

_MAX_SEED = 2 ** 64 - 1


@njit(cache=True)
def _splitmix(seed, k):
    z = seed + np.uint64(k) * _GOLDEN
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True)
def _uniform(seed, k):
    # strictly inside (0, 1)
    return (float(_splitmix(seed, k) >> _S11) + 0.5) * _TWO_M53


def stream_uniform(seed, k):
    """Uniform number ``k`` of the stream keyed by ``seed``."""
    return _uniform(np.uint64(seed), k)


@njit(cache=True)
def _gamma_from_support(g, los, his, cum):
    k = 0
    while k < cum.shape[0] - 1 and g > cum[k]:
        k += 1
    prev = 0.0 if k == 0 else cum[k - 1]
    frac = (g - prev) / (cum[k] - prev)
    lo = los[k]
    hi = his[k]
    gamma = lo + (hi - lo) * frac
    if gamma <= lo:
        gamma = np.nextafter(lo, hi)
    elif gamma >= hi:
        gamma = np.nextafter(hi, lo)
    return gamma


@njit(cache=True, parallel=True)
def _draw_kernel(kind, n, x, path, sa, sb, code, params, tx, tw, seed, n_draws,
                 los, his, cum, r_abs, r_rel, r_max, q_abs, q_rel, q_max,
                 draws, gammas, status):
    for i in prange(n_draws):
        gamma = _gamma_from_support(_uniform(seed, 2 * i + 1), los, his, cum)
        u = _uniform(seed, 2 * i + 2)
        gammas[i] = gamma
        lo, hi, st = _preimage(kind, n, x, gamma, r_abs, r_rel, r_max)
        if st != STATUS_OK:
            status[i] = st
            draws[i] = math.nan
            continue
        if hi - lo < 10.0 * max(r_abs, r_rel * abs(hi)):
            draws[i] = 0.5 * (lo + hi)
            status[i] = STATUS_OK
            continue
        log_mass, upper, base, mass, shift, st = _build(
            kind, n, x, path, sa, sb, code, params, tx, tw, lo, hi, q_abs, q_rel, q_max)
        if st != STATUS_OK:
            status[i] = st
            draws[i] = math.nan
            continue
        theta, st = _quantile(kind, n, x, path, sa, sb, code, params, tx, tw, lo, hi,
                              upper, base, mass, shift, u, r_abs, r_rel, r_max,
                              q_abs, q_rel, q_max)
        draws[i] = theta
        status[i] = st


@dataclass(frozen=True)
class SamplerConfig:
    n_draws: int = 1_000_000
    seed: int = 0
    tol: Tolerance = ROOT_TOL
    quad_tol: Tolerance = QUAD_TOL
    path: Optional[str] = None
    retain_gamma: bool = False

    def __post_init__(self):
        if int(self.n_draws) != self.n_draws or self.n_draws < 1:
            raise DomainError(f"n_draws must be a positive integer, got {self.n_draws}")
        if int(self.seed) != self.seed or not 0 <= self.seed <= _MAX_SEED:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.path not in (None, "auto", "generic", "conjugate"):
            raise DomainError(f"unknown path override {self.path!r}")

    def replace(self, **changes):
        fields = dict(n_draws=self.n_draws, seed=self.seed, tol=self.tol,
                      quad_tol=self.quad_tol, path=self.path, retain_gamma=self.retain_gamma)
        fields.update(changes)
        return SamplerConfig(**fields)


@dataclass(frozen=True)
class FiducialSample:
    scenario: object
    lpd: LpdDescriptor
    draws: np.ndarray = field(repr=False)
    gammas: Optional[np.ndarray] = field(default=None, repr=False)
    seed: int = 0

    def __len__(self):
        return int(self.draws.shape[0])


def _support_arrays(scenario, support):
    if support is None:
        support = post_data_support(scenario)
    pi0 = support.pi0
    if pi0.kind != "uniform" or tuple(pi0.support) != (0.0, 1.0):
        raise DomainError("the sampler supports the uniform primary density on (0, 1) only")
    return support, support.as_arrays()


_CHECKED = {}


def _check_conditions(scenario, gpd):
    # applicability depends only on the model, the count and the GPD
    key = (scenario, id(gpd) if gpd is not None else None)
    if key in _CHECKED:
        return
    report = check_condition_2a(scenario)
    if not report.covered:
        raise ConditionViolated(f"preimages leave {report.describe()} uncovered for {scenario.label()}")
    if gpd is not None and not check_condition_2b(gpd, scenario.h_x):
        raise ConditionViolated("global pre-data weight is not constant over the parameter domain")
    _CHECKED[key] = True


def draw_fiducial(scenario, lpd, support=None, config=SamplerConfig(), gpd=None, check=True):
    """Draw ``config.n_draws`` values from the fiducial density of the parameter.

    ``support`` restricts the primary variable (default: all of ``(0, 1)``).
    The coverage check runs against the unrestricted support, which is what
    decides applicability; ``gpd`` (if given) must be constant.

    Raises
    ------
    ConditionViolated
        When the applicability checks fail.
    DrawFailure
        When a numerical step fails for some draw; the draw index and its
        ``gamma`` are attached.
    """
    lpd.validate_for(scenario)
    if check:
        _check_conditions(scenario, gpd)
    support, (los, his, cum) = _support_arrays(scenario, support)
    path, sa, sb = path_codes(scenario, lpd, config.path)
    code, params, tx, tw = lpd.pack()
    n_draws = int(config.n_draws)
    draws = np.empty(n_draws)
    gammas = np.empty(n_draws)
    status = np.zeros(n_draws, dtype=np.int64)
    t, q = config.tol, config.quad_tol
    _draw_kernel(scenario.code, scenario.n_or_zero, scenario.x, path, sa, sb,
                 code, params, tx, tw, np.uint64(config.seed), n_draws,
                 los, his, cum, t.abs_tol, t.rel_tol, int(t.max_iter),
                 q.abs_tol, q.rel_tol, int(q.max_iter), draws, gammas, status)
    bad = np.flatnonzero(status)
    if bad.size:
        i = int(bad[0])
        try:
            raise_for_status(status[i], "fiducial draw")
        except Exception as exc:
            raise DrawFailure(str(exc), i, float(gammas[i])) from exc
    return FiducialSample(scenario, lpd, draws, gammas if config.retain_gamma else None, int(config.seed))


# ---------------------------------------------------------------------------
# numerical fiducial density


@njit(cache=True)
def _band(kind, n, x, theta):
    """Gamma values whose preimage holds ``theta``: ``[cdf(x-1), cdf(x))``."""
    a = _cdf(kind, n, theta, x - 1)
    b = _cdf(kind, n, theta, x)
    width = math.exp(_log_pmf(kind, n, theta, x))
    # take the shorter side from the pmf to keep the band width precise
    if a < 0.5:
        b = min(a + width, 1.0)
    else:
        a = max(b - width, 0.0)
    return a, b


@njit(cache=True)
def _to_var(g, mode):
    # mode 1: s = log(gamma); mode 2: s = -log(1 - gamma); mode 0: s = gamma
    if mode == 1:
        return math.log(g)
    if mode == 2:
        return -math.log1p(-g)
    return g


@njit(cache=True)
def _from_var(s, mode):
    """``(gamma, d gamma / ds)``."""
    if mode == 1:
        g = math.exp(s)
        return g, g
    if mode == 2:
        e = math.exp(-s)
        return 1.0 - e, e
    return s, 1.0


@njit(cache=True)
def _band_piece(kind, n, x, path, sa, sb, code, params, tx, tw, logu, p, q, mode,
                gl_x, gl_w, panels, r_abs, r_rel, r_max, q_abs, q_rel, q_max):
    sp = _to_var(p, mode)
    sq = _to_var(q, mode)
    h = (sq - sp) / panels
    total = 0.0
    for m in range(panels):
        mid = sp + (m + 0.5) * h
        for r in range(gl_x.shape[0]):
            gamma, jac = _from_var(mid + 0.5 * h * gl_x[r], mode)
            if not (0.0 < gamma < 1.0):
                continue
            lo, hi, st = _preimage(kind, n, x, gamma, r_abs, r_rel, r_max)
            if st != STATUS_OK:
                return math.nan, st
            if hi - lo < 10.0 * max(r_abs, r_rel * abs(hi)):
                # below root resolution; the sampler collapses these too
                continue
            log_mass, upper, base, mass, shift, st = _build(
                kind, n, x, path, sa, sb, code, params, tx, tw, lo, hi, q_abs, q_rel, q_max)
            if st != STATUS_OK:
                return math.nan, st
            total += 0.5 * h * gl_w[r] * jac * math.exp(logu - log_mass)
    return total, STATUS_OK


@njit(cache=True)
def _pdf_kernel(kind, n, x, path, sa, sb, code, params, tx, tw, thetas, los, his, c0,
                gl_x, gl_w, panels, r_abs, r_rel, r_max, q_abs, q_rel, q_max, out):
    for j in range(thetas.shape[0]):
        theta = thetas[j]
        a, b = _band(kind, n, x, theta)
        logu = _log_unnorm(kind, n, x, code, params, tx, tw, theta, 1.0 - theta)
        total = 0.0
        for k in range(los.shape[0]):
            p = max(a, los[k])
            q = min(b, his[k])
            if not q > p:
                continue
            # 1/mass(gamma) may grow like 1/gamma or 1/(1-gamma) where the
            # band gets close to 0 or 1, so each half is integrated in a
            # log variable toward its end; an end at exactly 0 or 1 pins a
            # preimage end and is smooth in gamma itself
            m = 0.5 * (p + q)
            lower_mode = 0 if p <= 0.0 else 1
            upper_mode = 0 if q >= 1.0 else 2
            v1, st = _band_piece(kind, n, x, path, sa, sb, code, params, tx, tw, logu, p, m,
                                 lower_mode, gl_x, gl_w, panels, r_abs, r_rel, r_max, q_abs, q_rel, q_max)
            if st != STATUS_OK:
                return j, st
            v2, st = _band_piece(kind, n, x, path, sa, sb, code, params, tx, tw, logu, m, q,
                                 upper_mode, gl_x, gl_w, panels, r_abs, r_rel, r_max, q_abs, q_rel, q_max)
            if st != STATUS_OK:
                return j, st
            total += v1 + v2
        out[j] = c0 * total
    return -1, STATUS_OK


_GL8 = np.polynomial.legendre.leggauss(8)
_GL4 = np.polynomial.legendre.leggauss(4)


def _interior(scenario, theta):
    """Nearest parameter value strictly inside the domain; None if outside."""
    dom = scenario.domain
    if theta < dom.lo or theta > dom.hi or math.isnan(theta):
        return None
    if theta == dom.lo:
        return math.nextafter(dom.lo, dom.hi)
    if theta == dom.hi:
        return math.nextafter(dom.hi, dom.lo)
    return theta


def fiducial_pdf_numeric(scenario, lpd, theta_grid, gamma_nodes=64, support=None,
                         tol=ROOT_TOL, quad_tol=QUAD_TOL, path=None):
    """Fiducial density evaluated by integrating slice densities over ``gamma``.

    A parameter value ``theta`` only lies in the preimages of ``gamma`` in
    the band ``[cdf(theta, x-1), cdf(theta, x))``, and there the slice
    density is ``exp(log_unnorm(theta)) / mass(gamma)``.  The band (cut to the
    post-data support) is integrated with ``gamma_nodes`` Gauss-Legendre
    nodes per half-band, split into 8-point panels.  Domain endpoints are evaluated at the
    adjacent representable interior point.
    """
    if int(gamma_nodes) < 64:
        raise DomainError("gamma_nodes must be at least 64")
    lpd.validate_for(scenario)
    support, (los, his, _) = _support_arrays(scenario, support)
    thetas_in = np.atleast_1d(np.asarray(theta_grid, dtype=np.float64))
    mapped = [_interior(scenario, float(t)) for t in thetas_in]
    keep = np.array([m is not None for m in mapped], dtype=bool)
    thetas = np.array([m for m in mapped if m is not None], dtype=np.float64)
    path_code, sa, sb = path_codes(scenario, lpd, path)
    code, params, tx, tw = lpd.pack()
    panels = -(-int(gamma_nodes) // 8)
    vals = np.empty(thetas.shape[0])
    bad, status = _pdf_kernel(
        scenario.code, scenario.n_or_zero, scenario.x, path_code, sa, sb, code, params, tx, tw,
        thetas, los, his, support.normalizer, _GL8[0], _GL8[1], panels,
        tol.abs_tol, tol.rel_tol, int(tol.max_iter),
        quad_tol.abs_tol, quad_tol.rel_tol, int(quad_tol.max_iter), vals)
    raise_for_status(status, f"numeric fiducial density at theta={thetas[bad]!r}" if bad >= 0 else "")
    out = np.zeros(thetas_in.shape[0])
    out[keep] = vals
    return out


@dataclass(frozen=True)
class NumericFiducialCdf:
    """Cumulative integral of :func:`fiducial_pdf_numeric` on a cell grid.

    ``values[k]`` is the integral up to ``grid[k]``; ``total`` is the whole
    integral (1 up to quadrature error).  ``cdf`` interpolates monotonically
    between cell ends.
    """

    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    total: float = 1.0
    _interp: object = field(default=None, repr=False, compare=False)

    def cdf(self, theta):
        t = np.asarray(theta, dtype=np.float64)
        v = np.clip(self._interp(np.clip(t, self.grid[0], self.grid[-1])), 0.0, 1.0)
        return float(v) if v.ndim == 0 else v

    __call__ = cdf


def _upper_limit(scenario):
    if scenario.kind == "binomial":
        return 1.0
    # fiducial mass above t is at most P(Y <= x | t)
    t = scenario.x + 10.0
    while _cdf(scenario.code, 0, t, scenario.x) > 1e-13:
        t *= 1.25
    return t


def _smoothstep_inverse(s):
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid * mid * (3.0 - 2.0 * mid) < s:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def numeric_fiducial_cdf(scenario, lpd, cells=400, gamma_nodes=64, support=None,
                         tol=ROOT_TOL, quad_tol=QUAD_TOL, path=None):
    """Integrate the numeric fiducial density into a CDF.

    Cells are uniform in ``t`` with ``theta = top * (3t^2 - 2t^3)``, which
    clusters nodes at both ends; the two end cells are further split
    geometrically and each cell gets 4-point Gauss-Legendre.  Where
    the support of the primary variable is restricted, the density has kinks
    at the preimage ends of the cut points, so those become cell boundaries.
    """
    support = post_data_support(scenario) if support is None else support
    top = _upper_limit(scenario)
    t_edges = np.linspace(0.0, 1.0, int(cells) + 1)
    # the density may have a log singularity at a domain end: grade the end cells
    ends = np.geomspace(1e-9, 1.0 / int(cells), 24)
    t_edges = np.concatenate([t_edges, ends, 1.0 - ends])
    cuts = sorted({c for iv in support.intervals for c in iv if 0.0 < c < 1.0})
    extra = []
    for c in cuts:
        lo, hi, status = _preimage(scenario.code, scenario.n_or_zero, scenario.x, c,
                                   tol.abs_tol, tol.rel_tol, int(tol.max_iter))
        raise_for_status(status, "support cut preimage")
        extra += [_smoothstep_inverse(v / top) for v in (lo, hi) if 0.0 < v < top]
    t_edges = np.unique(np.concatenate([t_edges, extra]))

    xg, wg = _GL4
    left, right = t_edges[:-1], t_edges[1:]
    half = 0.5 * (right - left)
    t_nodes = (0.5 * (left + right))[:, None] + half[:, None] * xg[None, :]
    theta = top * t_nodes * t_nodes * (3.0 - 2.0 * t_nodes)
    jac = top * 6.0 * t_nodes * (1.0 - t_nodes)
    f = fiducial_pdf_numeric(scenario, lpd, theta.ravel(), gamma_nodes, support,
                             tol, quad_tol, path).reshape(theta.shape)
    per_cell = np.sum(f * jac * wg[None, :], axis=1) * half
    values = np.concatenate([[0.0], np.cumsum(per_cell)])
    grid = top * t_edges * t_edges * (3.0 - 2.0 * t_edges)
    grid, idx = np.unique(grid, return_index=True)
    values = values[idx]
    total = float(values[-1])
    interp = PchipInterpolator(grid, np.maximum.accumulate(values))
    return NumericFiducialCdf(grid, values, total, interp)
