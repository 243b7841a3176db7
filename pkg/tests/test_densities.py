import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy import integrate, special, stats

from oracles import grid_inverse_sampler
from organic_fiducial.analysis import ks_distance
from organic_fiducial.densities import (
    GpdDescriptor,
    LpdDescriptor,
    ReferencePosterior,
    build_slice,
    lpd_eval,
    posterior_cdf,
    posterior_pdf,
    reference_for_lpd,
    reference_posterior,
    slice_cdf,
    slice_pdf,
    slice_quantile,
    slice_sample,
)
from organic_fiducial.errors import DomainError
from organic_fiducial.model import DiscreteSamplingScenario

B = DiscreteSamplingScenario.binomial
P = DiscreteSamplingScenario.poisson
L = LpdDescriptor
gammas = st.floats(1e-4, 1 - 1e-4)


@st.composite
def scenarios(draw):
    if draw(st.booleans()):
        n = draw(st.integers(1, 30))
        return B(n, draw(st.integers(0, n)))
    return P(draw(st.integers(0, 12)))


def conjugate_lpds(sc):
    return [L.constant(), L.jeffreys(sc)]


def test_lpd_values():
    assert lpd_eval(L.constant(), 0.37) == 1.0
    assert lpd_eval(L.jeffreys_binomial(), 0.5) == pytest.approx(2.0, abs=1e-15)
    assert lpd_eval(L.jeffreys_poisson(), 4.0) == pytest.approx(0.5, abs=1e-15)
    assert lpd_eval(L.power(2.0, 1.0), 0.5) == pytest.approx(0.125)
    with pytest.raises(DomainError):
        lpd_eval(L.jeffreys_binomial(), 1.5)
    with pytest.raises(DomainError):
        lpd_eval(L.constant(), -0.1)


def test_tabulated_interpolates_log_linearly_and_extrapolates_flat():
    lpd = L.tabulated([0.2, 0.4], [1.0, 4.0])
    assert lpd_eval(lpd, 0.3) == pytest.approx(2.0)
    assert lpd_eval(lpd, 0.05) == pytest.approx(1.0)
    assert lpd_eval(lpd, 0.9) == pytest.approx(4.0)


def test_descriptor_validation():
    with pytest.raises(DomainError):
        L.power(-1.5)
    with pytest.raises(DomainError):
        L.tabulated([0.1, 0.1], [1, 1])
    with pytest.raises(DomainError):
        L.constant(0.0)
    with pytest.raises(DomainError):
        build_slice(P(2), 0.5, L.jeffreys_binomial())
    with pytest.raises(DomainError):
        build_slice(P(2), 0.5, L.power(0.5, 0.5))
    with pytest.raises(DomainError):
        GpdDescriptor(B(1, 0).domain, 0.0)


def test_path_selection():
    assert build_slice(B(10, 1), 0.5, L.constant()).path == "conjugate_beta"
    sl = build_slice(B(10, 1), 0.5, L.jeffreys_binomial())
    assert (sl.shape_a, sl.shape_b) == (1.5, 9.5)
    sl = build_slice(B(10, 1), 0.5, L.constant())
    assert (sl.shape_a, sl.shape_b) == (2.0, 10.0)
    sl = build_slice(P(2), 0.5, L.jeffreys_poisson())
    assert sl.path == "conjugate_gamma" and sl.shape_a == 2.5
    assert build_slice(B(10, 1), 0.5, L.power(0.2)).path == "generic"
    with pytest.raises(DomainError):
        build_slice(B(10, 1), 0.5, L.power(0.2), path="conjugate")


def test_single_trial_slice_closed_form():
    sl = build_slice(B(1, 1), 0.5, L.constant())
    assert abs(sl.interval.lo - 0.5) < 1e-9 and sl.interval.hi == 1.0
    for t in (0.5 + 1e-6, 0.7, 0.99):
        assert slice_pdf(sl, t) == pytest.approx(8 * t / 3, rel=1e-8)
    assert slice_pdf(sl, 0.3) == 0.0
    assert abs(slice_quantile(sl, 0.5) - math.sqrt(0.625)) < 1e-9


def test_quantile_ends():
    sl = build_slice(B(10, 1), 0.5, L.jeffreys_binomial())
    assert slice_quantile(sl, 0.0) == sl.interval.lo
    assert slice_quantile(sl, 1.0) == sl.interval.hi
    with pytest.raises(DomainError):
        slice_quantile(sl, 1.2)


def test_symmetric_slice_median():
    # n=2, x=1 at gamma=1/2: both level crossings are symmetric about 1/2
    sl = build_slice(B(2, 1), 0.5, L.constant())
    assert abs(sl.interval.lo + sl.interval.hi - 1.0) < 1e-9
    assert abs(slice_quantile(sl, 0.5) - 0.5) < 1e-9


def test_slice_cdf_inverts_quantile():
    sl = build_slice(P(3), 0.4, L.power(0.7))
    for u in (0.1, 0.5, 0.9):
        assert abs(slice_cdf(sl, slice_quantile(sl, u)) - u) < 1e-8


@given(scenarios(), gammas, st.floats(1e-3, 1e3), st.floats(0.01, 0.99), st.integers(0, 2))
def test_proportionality_invariance(sc, gamma, c, u, which):
    lpd = [L.constant(), L.jeffreys(sc), L.power(0.3, 0.0)][which]
    a = build_slice(sc, gamma, lpd)
    b = build_slice(sc, gamma, lpd.scaled(c))
    mid = 0.5 * (a.interval.lo + a.interval.hi)
    assert abs(slice_pdf(a, mid) - slice_pdf(b, mid)) <= 1e-10 * max(1.0, slice_pdf(a, mid))
    assert abs(slice_quantile(a, u) - slice_quantile(b, u)) < 1e-10 * max(1.0, a.interval.hi)


def test_tabulated_scaling_invariance():
    lpd = L.tabulated([0.0, 0.3, 1.0], [1.0, 3.0, 2.0])
    a = build_slice(B(10, 1), 0.4, lpd)
    b = build_slice(B(10, 1), 0.4, lpd.scaled(17.0))
    assert abs(slice_quantile(a, 0.3) - slice_quantile(b, 0.3)) < 1e-10


@given(scenarios(), gammas, st.floats(0.001, 0.999), st.booleans())
def test_path_equivalence(sc, gamma, u, jeffreys):
    lpd = L.jeffreys(sc) if jeffreys else L.constant()
    conj = build_slice(sc, gamma, lpd)
    gen = build_slice(sc, gamma, lpd, path="generic")
    assert gen.path == "generic"
    assert abs(slice_quantile(conj, u) - slice_quantile(gen, u)) < 1e-6
    assert abs(conj.log_normalizer - gen.log_normalizer) < 1e-7


def _integral(sl):
    lo, hi = sl.interval.lo, sl.interval.hi
    val, _ = integrate.quad(lambda t: slice_pdf(sl, t), lo, hi, epsabs=1e-13, epsrel=1e-12, limit=400)
    return val


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@given(scenarios(), gammas, st.integers(0, 2))
def test_normalization(sc, gamma, which):
    lpd = [L.constant(), L.jeffreys(sc), L.power(-0.4, 0.0)][which]
    sl = build_slice(sc, gamma, lpd)
    assume(sl.interval.width > 1e-8)
    assert abs(_integral(sl) - 1.0) < 1e-8


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("sc", [B(3, 0), B(3, 3), B(1, 0), B(1, 1), P(0)])
def test_normalization_at_singular_domain_ends(sc):
    for gamma in (1e-3, 0.5, 1 - 1e-3):
        sl = build_slice(sc, gamma, L.jeffreys(sc))
        assert abs(_integral(sl) - 1.0) < 1e-8


@given(scenarios(), gammas, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_quantile_monotone(sc, gamma, u1, u2):
    u1, u2 = sorted((u1, u2))
    assume(u2 - u1 > 1e-6)
    sl = build_slice(sc, gamma, L.jeffreys(sc))
    assume(sl.interval.width > 1e-6)
    assert slice_quantile(sl, u1) < slice_quantile(sl, u2)


def test_degenerate_width_returns_midpoint():
    sl = build_slice(B(10, 1), 0.5, L.constant())
    from organic_fiducial.preimage import PreimageInterval

    narrow = type(sl)(sl.scenario, sl.gamma, PreimageInterval(0.1, 0.1 + 1e-12), sl.lpd,
                      sl.log_normalizer, sl.path, sl.shape_a, sl.shape_b, sl._state)
    assert slice_sample(narrow, np.random.default_rng(0)) == pytest.approx(0.1 + 5e-13, abs=1e-20)


def test_slice_sampling_matches_grid_oracle():
    sc = B(10, 1)
    sl = build_slice(sc, 0.5, L.constant())
    lo, hi = sl.interval.lo, sl.interval.hi
    rng = np.random.default_rng(99)
    draws = np.array([slice_sample(sl, rng) for _ in range(100_000)])
    assert draws.min() >= lo and draws.max() <= hi
    oracle = grid_inverse_sampler(lambda t: stats.beta(2, 10).pdf(t), lo, hi, 100_000, np.random.default_rng(5))
    assert ks_distance(draws, oracle).statistic < 0.015


def test_reference_posteriors():
    assert reference_posterior(B(10, 1), "uniform") == ReferencePosterior("beta", 2, 10)
    assert reference_posterior(B(20, 2), "jeffreys") == ReferencePosterior("beta", 2.5, 18.5)
    assert reference_posterior(P(2), "jeffreys") == ReferencePosterior("gamma", 2.5)
    assert reference_posterior(P(2), "uniform") == reference_posterior(P(2), "constant")
    assert reference_for_lpd(B(10, 1), L.power(0.5, -0.5)) == ReferencePosterior("beta", 2.5, 9.5)
    assert reference_for_lpd(B(10, 1), L.tabulated([0, 1], [1, 2])) is None
    with pytest.raises(DomainError):
        reference_posterior(B(10, 1), "haldane")


def test_posterior_pdf_cdf():
    assert posterior_pdf(ReferencePosterior("beta", 1, 1), 0.3) == pytest.approx(1.0)
    assert posterior_cdf(ReferencePosterior("gamma", 1), math.log(2)) == pytest.approx(0.5, abs=1e-15)
    quad, _ = integrate.quad(lambda t: stats.beta(2, 10).pdf(t), 0, 0.1, epsabs=1e-14)
    assert abs(posterior_cdf(ReferencePosterior("beta", 2, 10), 0.1) - quad) < 1e-12
    with pytest.raises(DomainError):
        posterior_pdf(ReferencePosterior("beta", 2, 10), 1.5)
    with pytest.raises(DomainError):
        ReferencePosterior("beta", 0, 1)


@pytest.mark.parametrize("alpha", [-0.99, -0.9, -0.6, -0.4, 0.0, 1.5])
@pytest.mark.parametrize("gamma", [0.05, 0.5, 0.95])
def test_generic_normalizer_against_incomplete_gamma(alpha, gamma):
    # Poisson x=0: the slice is tau^alpha e^-tau on [0, -log gamma]
    sl = build_slice(P(0), gamma, L.power(alpha))
    exact = math.log(math.gamma(1 + alpha) * special.gammainc(1 + alpha, -math.log(gamma)))
    assert abs(-sl.log_normalizer - exact) < 1e-9
