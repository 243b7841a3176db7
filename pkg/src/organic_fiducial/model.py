"""Binomial and Poisson sampling models and their data-generating map.

Data are generated by drawing ``gamma ~ Uniform(0, 1)`` and returning the
least count ``z`` whose CDF exceeds ``gamma``.  Everything the fiducial
construction needs about a model flows through :func:`cdf` and
:func:`forward_map`.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numba import njit

from .errors import DomainError, SolverFailure

__all__ = [
    "BINOMIAL",
    "POISSON",
    "DiscreteSamplingScenario",
    "ParameterDomain",
    "PrimaryRvSpec",
    "UNIFORM_PRIMARY",
    "pmf",
    "cdf",
    "forward_map",
    "simulate_observation",
    "simulate_observations",
]

BINOMIAL = 0
POISSON = 1

_KIND_CODES = {"binomial": BINOMIAL, "poisson": POISSON}

# rescale the running relative sum before it can overflow
_RESCALE = 1e280


@dataclass(frozen=True)
class ParameterDomain:
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"empty parameter domain [{self.lo}, {self.hi}]")

    def contains(self, theta):
        if self.lo_open and not theta > self.lo:
            return False
        if not self.lo_open and not theta >= self.lo:
            return False
        if self.hi_open and not theta < self.hi:
            return False
        if not self.hi_open and not theta <= self.hi:
            return False
        return True

    @property
    def bounded(self):
        return math.isfinite(self.lo) and math.isfinite(self.hi)


@dataclass(frozen=True)
class PrimaryRvSpec:
    """Density of the primary random variable ``Gamma`` before the data.

    ``kind`` is ``"uniform"`` (the unit interval) or ``"custom"``, in which case
    ``density`` is evaluated over ``support``.
    """

    kind: str = "uniform"
    density: Optional[Callable[[float], float]] = None
    support: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.kind not in ("uniform", "custom"):
            raise DomainError(f"unknown primary density kind {self.kind!r}")
        if self.kind == "custom" and self.density is None:
            raise DomainError("a custom primary density needs an evaluator")

    def pdf(self, gamma):
        lo, hi = self.support
        if not lo < gamma < hi:
            return 0.0
        if self.kind == "uniform":
            return 1.0 / (hi - lo)
        return float(self.density(gamma))

    def mass(self, lo, hi):
        """Probability of ``(lo, hi)`` under this density."""
        from .numerics import Bracket, integrate_adaptive

        lo, hi = max(lo, self.support[0]), min(hi, self.support[1])
        if not lo < hi:
            return 0.0
        if self.kind == "uniform":
            return (hi - lo) / (self.support[1] - self.support[0])
        return integrate_adaptive(self.pdf, Bracket(lo, hi))


UNIFORM_PRIMARY = PrimaryRvSpec()


@dataclass(frozen=True)
class DiscreteSamplingScenario:
    """A one-parameter count model together with the observed count ``x``.

    The observed count is its own fiducial statistic; there are no ancillary
    complements, so ``ancillary_values`` is always empty.
    """

    kind: str
    x: int
    n: Optional[int] = None
    ancillary_values: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise DomainError(f"unknown model kind {self.kind!r}")
        if int(self.x) != self.x or self.x < 0:
            raise DomainError(f"observed count must be a nonnegative integer, got {self.x}")
        if self.kind == "binomial":
            if self.n is None or int(self.n) != self.n or self.n < 1:
                raise DomainError(f"binomial trial count must be a positive integer, got {self.n}")
            if self.x > self.n:
                raise DomainError(f"observed count {self.x} exceeds n={self.n}")
        elif self.n is not None:
            raise DomainError("a Poisson scenario takes no trial count")
        if self.ancillary_values:
            raise DomainError("implemented models have no ancillary complements")
        object.__setattr__(self, "x", int(self.x))
        if self.n is not None:
            object.__setattr__(self, "n", int(self.n))

    @classmethod
    def binomial(cls, n, x):
        return cls("binomial", x, n)

    @classmethod
    def poisson(cls, x):
        return cls("poisson", x)

    @property
    def code(self):
        return _KIND_CODES[self.kind]

    @property
    def n_or_zero(self):
        return self.n if self.n is not None else 0

    @property
    def domain(self):
        if self.kind == "binomial":
            return ParameterDomain(0.0, 1.0)
        return ParameterDomain(0.0, math.inf, lo_open=True, hi_open=True)

    @property
    def h_x(self):
        # parameter values not ruled out by the data: the whole domain here
        return self.domain

    def label(self):
        if self.kind == "binomial":
            return f"binomial(n={self.n}, x={self.x})"
        return f"poisson(x={self.x})"


# ---------------------------------------------------------------------------
# compiled kernels


@njit(cache=True)
def _log_pmf(kind, n, theta, y):
    if kind == BINOMIAL:
        if y < 0 or y > n:
            return -math.inf
        if theta <= 0.0:
            return 0.0 if y == 0 else -math.inf
        if theta >= 1.0:
            return 0.0 if y == n else -math.inf
        log_choose = math.lgamma(n + 1.0) - math.lgamma(y + 1.0) - math.lgamma(n - y + 1.0)
        return log_choose + y * math.log(theta) + (n - y) * math.log1p(-theta)
    if y < 0:
        return -math.inf
    if theta <= 0.0:
        return 0.0 if y == 0 else -math.inf
    return y * math.log(theta) - theta - math.lgamma(y + 1.0)


@njit(cache=True)
def _first_term(kind, n, theta):
    # log of the y = 0 mass and the odds factor for the y -> y+1 ratio
    if kind == BINOMIAL:
        return n * math.log1p(-theta), theta / (1.0 - theta)
    return -theta, theta


@njit(cache=True)
def _ratio(kind, n, y, odds):
    if kind == BINOMIAL:
        return (n - y) / (y + 1.0) * odds
    return odds / (y + 1.0)


@njit(cache=True)
def _cdf(kind, n, theta, z):
    """Sum of the pmf over ``0..z``; ``z = -1`` is the empty sum."""
    if z < 0:
        return 0.0
    if kind == BINOMIAL and z >= n:
        return 1.0
    if theta <= 0.0:
        return 1.0
    if kind == BINOMIAL and theta >= 1.0:
        return 0.0
    log0, odds = _first_term(kind, n, theta)
    term = 1.0
    total = 1.0
    log_scale = 0.0
    for y in range(z):
        term *= _ratio(kind, n, y, odds)
        total += term
        if total > _RESCALE:
            term /= _RESCALE
            total /= _RESCALE
            log_scale += math.log(_RESCALE)
    value = math.exp(log0 + math.log(total) + log_scale)
    return min(value, 1.0)


@njit(cache=True)
def _poisson_cap(theta):
    return int(theta + 40.0 * math.sqrt(theta) + 100.0)


@njit(cache=True)
def _forward_map(kind, n, gamma, theta):
    """Least ``z`` with ``gamma < cdf(theta, z)``; -1 signals the Poisson cap.

    Partial sums are built with the same arithmetic as :func:`_cdf`, so
    ``_forward_map(g, t) <= z`` holds exactly when ``g < _cdf(t, z)``.
    """
    if kind == BINOMIAL:
        if n == 0 or theta >= 1.0:
            return n
        if theta <= 0.0:
            return 0
        cap = n
    else:
        if theta <= 0.0:
            return 0
        cap = _poisson_cap(theta)
    log0, odds = _first_term(kind, n, theta)
    term = 1.0
    total = 1.0
    log_scale = 0.0
    z = 0
    while True:
        if kind == BINOMIAL and z >= n:
            return n
        value = min(math.exp(log0 + math.log(total) + log_scale), 1.0)
        if gamma < value:
            return z
        if z >= cap:
            return -1
        term *= _ratio(kind, n, z, odds)
        total += term
        if total > _RESCALE:
            term /= _RESCALE
            total /= _RESCALE
            log_scale += math.log(_RESCALE)
        z += 1


@njit(cache=True)
def _forward_map_many(kind, n, gammas, theta, out):
    for i in range(gammas.shape[0]):
        out[i] = _forward_map(kind, n, gammas[i], theta)


# ---------------------------------------------------------------------------
# public API


def _check_theta(scenario, theta):
    theta = float(theta)
    if not scenario.domain.contains(theta):
        raise DomainError(f"parameter {theta} outside the {scenario.kind} domain")
    return theta


def pmf(scenario, theta, y):
    """Probability of the count ``y`` under parameter ``theta``."""
    theta = _check_theta(scenario, theta)
    if int(y) != y or y < 0 or (scenario.kind == "binomial" and y > scenario.n):
        raise DomainError(f"count {y} outside the {scenario.kind} support")
    return math.exp(_log_pmf(scenario.code, scenario.n_or_zero, theta, int(y)))


def cdf(scenario, theta, z):
    """Partial sum of :func:`pmf` over ``0..z``; ``z = -1`` gives 0."""
    theta = _check_theta(scenario, theta)
    if int(z) != z or z < -1:
        raise DomainError(f"CDF index must be an integer >= -1, got {z}")
    return _cdf(scenario.code, scenario.n_or_zero, theta, int(z))


def forward_map(scenario, gamma, theta):
    """Count produced by primary value ``gamma`` under parameter ``theta``."""
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise DomainError(f"gamma must lie in (0, 1), got {gamma}")
    theta = _check_theta(scenario, theta)
    z = _forward_map(scenario.code, scenario.n_or_zero, gamma, theta)
    if z < 0:
        raise SolverFailure(f"Poisson count search passed its cap at theta={theta}")
    return int(z)


def _open_uniform(rng, size=None):
    g = rng.random(size)
    if size is None:
        while g == 0.0:
            g = rng.random()
        return g
    zero = g == 0.0
    while zero.any():
        g[zero] = rng.random(int(zero.sum()))
        zero = g == 0.0
    return g


def simulate_observation(scenario, theta, rng):
    """Generate one count by pushing a uniform ``gamma`` through the forward map.

    ``rng`` is a caller-owned :class:`numpy.random.Generator`.
    """
    return forward_map(scenario, _open_uniform(rng), theta)


def simulate_observations(scenario, theta, size, rng):
    """Vectorized :func:`simulate_observation` returning an int64 array."""
    theta = _check_theta(scenario, theta)
    gammas = _open_uniform(rng, int(size))
    out = np.empty(int(size), dtype=np.int64)
    _forward_map_many(scenario.code, scenario.n_or_zero, gammas, theta, out)
    if (out < 0).any():
        raise SolverFailure(f"Poisson count search passed its cap at theta={theta}")
    return out
