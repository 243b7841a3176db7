"""Histograms, Kolmogorov-Smirnov distances, LPD sweeps and convergence runs."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .densities import LpdDescriptor, ReferencePosterior, reference_for_lpd, reference_posterior
from .errors import DomainError, EmptySample
from .model import DiscreteSamplingScenario
from .numerics import Bracket
from .sampler import FiducialSample, NumericFiducialCdf, SamplerConfig, draw_fiducial

__all__ = [
    "Histogram",
    "KsReport",
    "SensitivityReport",
    "ConvergenceReport",
    "histogram",
    "bin_probabilities",
    "histogram_zscores",
    "ks_distance",
    "sensitivity_sweep",
    "convergence_study",
]


def _as_draws(sample):
    if isinstance(sample, FiducialSample):
        return sample.draws
    draws = np.asarray(sample, dtype=np.float64).ravel()
    return draws


@dataclass(frozen=True)
class Histogram:
    """Equal-width bins with density-scaled heights.

    ``dropped`` counts draws outside ``bin_edges``; heights are normalized
    by the in-range count so they always integrate to 1.
    """

    bin_edges: np.ndarray = field(repr=False)
    counts: np.ndarray = field(repr=False)
    normalized_heights: np.ndarray = field(repr=False)
    dropped: int = 0

    @property
    def total(self):
        return int(self.counts.sum()) + self.dropped


def _default_range(draws, scenario):
    if scenario is None or scenario.kind == "binomial":
        return 0.0, 1.0
    return 0.0, 1.2 * float(np.quantile(draws, 0.9999))


def histogram(sample, bin_count, range=None, scenario=None):
    """Bin a fiducial sample.

    The default range is ``[0, 1]`` for binomial samples and
    ``[0, 1.2 * q_0.9999]`` for Poisson ones, ``q`` being the empirical quantile.
    """
    draws = _as_draws(sample)
    if draws.size == 0:
        raise EmptySample("cannot bin an empty sample")
    if int(bin_count) != bin_count or bin_count < 2:
        raise DomainError(f"bin_count must be an integer >= 2, got {bin_count}")
    if scenario is None and isinstance(sample, FiducialSample):
        scenario = sample.scenario
    if range is None:
        lo, hi = _default_range(draws, scenario)
    elif isinstance(range, Bracket):
        lo, hi = range.lo, range.hi
    else:
        lo, hi = map(float, range)
    if not lo < hi:
        raise DomainError(f"histogram range must have lo < hi, got [{lo}, {hi}]")
    edges = np.linspace(lo, hi, int(bin_count) + 1)
    counts, _ = np.histogram(draws, bins=edges)
    kept = int(counts.sum())
    if kept == 0:
        raise EmptySample("no draws fall inside the histogram range")
    heights = counts / (kept * np.diff(edges))
    return Histogram(edges, counts.astype(np.int64), heights, int(draws.size - kept))


def bin_probabilities(hist, cdf):
    """Probability of each bin under ``cdf``, renormalized to the binned range."""
    f = np.asarray(_cdf_callable(cdf)(hist.bin_edges), dtype=np.float64)
    p = np.diff(f)
    return p / (f[-1] - f[0])


def histogram_zscores(hist, cdf):
    """Per-bin ``(count - N p) / sqrt(N p (1 - p))`` against ``cdf``."""
    p = bin_probabilities(hist, cdf)
    n = hist.counts.sum()
    sd = np.sqrt(n * p * (1.0 - p))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sd > 0, (hist.counts - n * p) / sd, np.where(hist.counts == 0, 0.0, np.inf))
    return z


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov


@dataclass(frozen=True)
class KsReport:
    statistic: float
    size_a: Optional[int]
    size_b: Optional[int]
    kind: str


def _is_analytic(obj):
    return callable(obj) or hasattr(obj, "cdf")


def _cdf_callable(obj):
    if isinstance(obj, (ReferencePosterior, NumericFiducialCdf)) or hasattr(obj, "cdf"):
        return obj.cdf
    return obj


def _ecdf_vs_cdf(draws, cdf):
    xs = np.sort(draws)
    n = xs.size
    f = np.asarray(cdf(xs), dtype=np.float64)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def _ecdf_vs_ecdf(a, b):
    a = np.sort(a)
    b = np.sort(b)
    pts = np.concatenate([a, b])
    fa = np.searchsorted(a, pts, side="right") / a.size
    fb = np.searchsorted(b, pts, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def _span(obj):
    if isinstance(obj, ReferencePosterior):
        return 0.0, obj.upper_limit()
    if isinstance(obj, NumericFiducialCdf):
        return float(obj.grid[0]), float(obj.grid[-1])
    return None


def _cdf_vs_cdf(fa, fb, lo, hi, points=20001):
    grid = np.linspace(lo, hi, points)
    diff = np.abs(np.asarray(fa(grid)) - np.asarray(fb(grid)))
    k = int(np.argmax(diff))
    best = float(diff[k])
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, points - 1)]
    if b > a:
        res = minimize_scalar(lambda t: -abs(float(fa(t)) - float(fb(t))), bounds=(a, b),
                              method="bounded", options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return best


def ks_distance(a, b, span=None):
    """Sup-norm distance between two CDFs, empirical or analytic.

    Arrays and :class:`FiducialSample` objects are treated as empirical CDFs;
    callables and objects with a ``cdf`` method as analytic ones.  ECDF cases
    are exact.  Two analytic CDFs are compared on a dense grid over ``span``
    (inferred where possible) refined by a bounded 1-D search.

    >>> ks_distance([0.5], lambda t: t).statistic
    0.5
    """
    a_an, b_an = _is_analytic(a), _is_analytic(b)
    if not a_an and not b_an:
        da, db = _as_draws(a), _as_draws(b)
        if da.size == 0 or db.size == 0:
            raise EmptySample("KS distance needs nonempty samples")
        return KsReport(_ecdf_vs_ecdf(da, db), int(da.size), int(db.size), "ECDF-vs-ECDF")
    if a_an and b_an:
        if span is None:
            spans = [s for s in (_span(a), _span(b)) if s is not None]
            if not spans:
                raise DomainError("comparing two analytic CDFs needs a span")
            span = (min(s[0] for s in spans), max(s[1] for s in spans))
        lo, hi = span
        stat = _cdf_vs_cdf(_cdf_callable(a), _cdf_callable(b), lo, hi)
        return KsReport(stat, None, None, "CDF-vs-CDF")
    sample, cdf = (b, a) if a_an else (a, b)
    draws = _as_draws(sample)
    if draws.size == 0:
        raise EmptySample("KS distance needs a nonempty sample")
    return KsReport(_ecdf_vs_cdf(draws, _cdf_callable(cdf)), int(draws.size), None, "ECDF-vs-CDF")


# ---------------------------------------------------------------------------
# sensitivity to the LPD


@dataclass(frozen=True)
class SensitivityReport:
    """Pairwise KS matrices across an LPD family.

    Posterior entries are NaN for members without a conjugate posterior.
    ``summary_ratio`` is the largest fiducial entry over the largest
    posterior entry.
    """

    labels: tuple
    fiducial_ks: np.ndarray = field(repr=False)
    posterior_ks: np.ndarray = field(repr=False)
    summary_ratio: float
    seeds: tuple = ()


def _max_entry(m):
    finite = m[np.isfinite(m)]
    return float(finite.max()) if finite.size else math.nan


def sensitivity_sweep(scenario, lpd_family, config=SamplerConfig(), seed_policy="offset"):
    """Fiducial and posterior KS matrices over ``lpd_family``.

    ``seed_policy="offset"`` gives member ``i`` the seed ``config.seed + i``;
    ``"common"`` reuses ``config.seed`` for every member, so identical
    members give identical samples.
    """
    family = list(lpd_family)
    if len(family) < 2:
        raise DomainError("a sensitivity sweep needs at least two LPDs")
    if seed_policy not in ("offset", "common"):
        raise DomainError(f"unknown seed policy {seed_policy!r}")
    seeds = []
    samples = []
    for i, lpd in enumerate(family):
        seed = (config.seed + i) % 2 ** 64 if seed_policy == "offset" else config.seed
        seeds.append(seed)
        samples.append(draw_fiducial(scenario, lpd, config=config.replace(seed=seed, retain_gamma=False)))
    refs = [reference_for_lpd(scenario, lpd) for lpd in family]
    k = len(family)
    fid = np.zeros((k, k))
    post = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            fid[i, j] = fid[j, i] = ks_distance(samples[i], samples[j]).statistic
            if refs[i] is None or refs[j] is None:
                post[i, j] = post[j, i] = math.nan
            elif refs[i] == refs[j]:
                post[i, j] = post[j, i] = 0.0
            else:
                post[i, j] = post[j, i] = ks_distance(refs[i], refs[j]).statistic
    top_fid, top_post = _max_entry(fid), _max_entry(post)
    ratio = top_fid / top_post if top_post > 0 else math.nan
    labels = tuple(lpd.label for lpd in family)
    return SensitivityReport(labels, fid, post, ratio, tuple(seeds))


# ---------------------------------------------------------------------------
# convergence toward the Jeffreys posterior


@dataclass(frozen=True)
class ConvergenceReport:
    """KS distance to the Jeffreys posterior for growing ``n`` at fixed ``x / n``.

    ``sigma`` holds Monte Carlo standard deviations of each KS value,
    estimated from independent replicate runs.
    """

    ratio: float
    n_values: tuple
    x_values: tuple
    ks: tuple
    sigma: tuple
    lpd_label: str = "jeffreys_binomial"

    def step_ok(self, k):
        """Step ``k -> k+1`` decreases or rises by at most 2 sigma."""
        noise = 2.0 * math.hypot(self.sigma[k], self.sigma[k + 1])
        return self.ks[k + 1] <= self.ks[k] + noise

    @property
    def nonincreasing_within_noise(self):
        return all(self.step_ok(k) for k in range(len(self.ks) - 1))

    @property
    def decreases_overall(self):
        return len(self.ks) < 2 or self.ks[-1] < self.ks[0]

    @property
    def passed(self):
        return self.nonincreasing_within_noise and self.decreases_overall


def _counts_for(ratio, n_list):
    ns = [int(n) for n in n_list]
    if not ns:
        raise DomainError("n_list is empty")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainError("n_list must be strictly increasing")
    xs = []
    for n in ns:
        x = round(n * ratio)
        if n < 1 or abs(n * ratio - x) > 1e-9:
            raise DomainError(f"n={n} times ratio={ratio} is not an integer count")
        xs.append(int(x))
    return ns, xs


def convergence_study(ratio, n_list, lpd=None, config=SamplerConfig(), replicates=8,
                      replicate_draws=None):
    """KS of fiducial samples against ``Beta(x + 1/2, n - x + 1/2)`` along ``n_list``.

    Run ``k`` uses seed ``config.seed + k``.  The noise level of each KS
    value comes from ``replicates`` further runs of ``replicate_draws``
    draws (default ``min(n_draws, 10**5)``), scaled to ``n_draws`` by the
    square-root law.
    """
    ns, xs = _counts_for(ratio, n_list)
    lpd = LpdDescriptor.jeffreys_binomial() if lpd is None else lpd
    n_draws = int(config.n_draws)
    rep_draws = min(n_draws, 100_000) if replicate_draws is None else int(replicate_draws)
    ks, sigma = [], []
    for k, (n, x) in enumerate(zip(ns, xs)):
        scenario = DiscreteSamplingScenario.binomial(n, x)
        ref = reference_posterior(scenario, "jeffreys")
        seed = (config.seed + k) % 2 ** 64
        sample = draw_fiducial(scenario, lpd, config=config.replace(seed=seed, retain_gamma=False))
        ks.append(ks_distance(sample, ref).statistic)
        if replicates >= 2:
            reps = []
            for r in range(replicates):
                # replicate seeds sit far from the main seeds
                rseed = (config.seed + 1_000_003 * (k + 1) + r) % 2 ** 64
                s = draw_fiducial(scenario, lpd, config=config.replace(n_draws=rep_draws, seed=rseed))
                reps.append(ks_distance(s, ref).statistic)
            sigma.append(float(np.std(reps, ddof=1)) * math.sqrt(rep_draws / n_draws))
        else:
            sigma.append(0.0)
    return ConvergenceReport(float(ratio), tuple(ns), tuple(xs), tuple(ks), tuple(sigma), lpd.label)
