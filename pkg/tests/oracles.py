"""Reference computations built from scipy only, independent of the package."""

import math

import numpy as np
from scipy import integrate, optimize, special, stats


def binom_preimage(n, x, gamma):
    """Preimage ends from scipy's binomial CDF and Brent's method."""
    if x == 0:
        lo = 0.0
    else:
        lo = optimize.brentq(lambda p: stats.binom.cdf(x - 1, n, p) - gamma, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
    if x == n:
        hi = 1.0
    else:
        hi = optimize.brentq(lambda p: stats.binom.cdf(x, n, p) - gamma, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
    return lo, hi


def trunc_beta_cdf(a, b, lo, hi, t):
    if t <= lo:
        return 0.0
    if t >= hi:
        return 1.0
    return (special.betainc(a, b, t) - special.betainc(a, b, lo)) / (special.betainc(a, b, hi) - special.betainc(a, b, lo))


def binom_fiducial_cdf(n, x, shift, t):
    """P(theta <= t) = P(whole preimage below t) + integral of the slice CDF over the band.

    ``shift`` is 1 for the flat LPD and 1/2 for Jeffreys.
    """
    a, b = x + shift, n - x + shift
    g_lo = stats.binom.cdf(x - 1, n, t) if x > 0 else 0.0
    g_hi = stats.binom.cdf(x, n, t) if x < n else 1.0
    below = 1.0 - g_hi

    def inner(g):
        lo, hi = binom_preimage(n, x, g)
        return trunc_beta_cdf(a, b, lo, hi, t)

    band, _ = integrate.quad(inner, g_lo, g_hi, epsabs=1e-12, epsrel=1e-10, limit=200)
    return below + band


def n1x1_fiducial_pdf(theta):
    # flat LPD, one success in one trial
    return theta * math.log((1.0 + theta) / (1.0 - theta))


def n1x1_fiducial_cdf(t):
    """Double integral of truncated Beta(2, 1) slice CDFs over gamma, by quadrature."""

    def inner(g):
        lo = 1.0 - g
        if t <= lo:
            return 0.0
        return (t * t - lo * lo) / (1.0 - lo * lo)

    val, _ = integrate.quad(inner, 0.0, 1.0, points=[1.0 - t], epsabs=1e-13, limit=200)
    return val


def grid_inverse_sampler(pdf, lo, hi, size, rng, points=200_001):
    """Draws by inverting a dense trapezoid CDF of ``pdf`` on [lo, hi]."""
    grid = np.linspace(lo, hi, points)
    f = pdf(grid)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    return np.interp(rng.random(size), cdf, grid)
