import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import golden_cdf, golden_sample
from organic_fiducial.analysis import (
    convergence_study,
    histogram,
    histogram_zscores,
    ks_distance,
    sensitivity_sweep,
)
from organic_fiducial.densities import LpdDescriptor, ReferencePosterior
from organic_fiducial.errors import DomainError, EmptySample
from organic_fiducial.model import DiscreteSamplingScenario
from organic_fiducial.sampler import SamplerConfig, draw_fiducial

B = DiscreteSamplingScenario.binomial
P = DiscreteSamplingScenario.poisson
L = LpdDescriptor

unit_samples = st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1, max_size=60)


def test_histogram_hand_count():
    h = histogram([0.1, 0.1, 0.6, 0.9], 2, range=(0.0, 1.0))
    assert list(h.counts) == [2, 2]
    assert np.allclose(h.normalized_heights, [1.0, 1.0])
    assert np.allclose(h.bin_edges, [0.0, 0.5, 1.0])


def test_histogram_rejects_bad_input():
    with pytest.raises(EmptySample):
        histogram([], 4)
    with pytest.raises(DomainError):
        histogram([0.5], 1)
    with pytest.raises(DomainError):
        histogram([0.5], 4, range=(1.0, 0.0))


def test_histogram_default_ranges():
    s = draw_fiducial(B(10, 1), L.constant(), config=SamplerConfig(n_draws=2000, seed=1))
    h = histogram(s, 20)
    assert h.bin_edges[0] == 0.0 and h.bin_edges[-1] == 1.0
    p = draw_fiducial(P(2), L.constant(), config=SamplerConfig(n_draws=20_000, seed=1))
    hp = histogram(p, 20)
    assert hp.bin_edges[0] == 0.0
    assert hp.bin_edges[-1] == pytest.approx(1.2 * np.quantile(p.draws, 0.9999))
    assert hp.dropped == int(np.sum(p.draws > hp.bin_edges[-1]))


@given(unit_samples, st.integers(2, 12))
def test_histogram_heights_integrate_to_one(xs, bins):
    h = histogram(xs, bins, range=(0.0, 1.0))
    assert np.sum(h.normalized_heights * np.diff(h.bin_edges)) == pytest.approx(1.0)
    assert h.total == len(xs)


@given(unit_samples, st.randoms(use_true_random=False))
def test_histogram_permutation_invariant(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    a = histogram(xs, 7, range=(0.0, 1.0))
    b = histogram(ys, 7, range=(0.0, 1.0))
    assert np.array_equal(a.counts, b.counts)


def test_ks_trivial_cases(rng):
    xs = rng.random(1000)
    assert ks_distance(xs, xs.copy()).statistic == 0.0
    assert ks_distance([0.5], lambda t: t).statistic == 0.5
    with pytest.raises(EmptySample):
        ks_distance([], lambda t: t)


def test_ks_uniform_sample_below_critical_value(rng):
    assert ks_distance(rng.random(100_000), lambda t: np.clip(t, 0, 1)).statistic < 0.0087


def test_ks_two_sample_against_brute_force(rng):
    a, b = rng.random(300), rng.random(200) ** 2
    grid = np.concatenate([a, b])
    brute = max(abs(np.mean(a <= t) - np.mean(b <= t)) for t in grid)
    assert ks_distance(a, b).statistic == pytest.approx(brute, abs=1e-15)


def test_ks_between_analytic_cdfs():
    a = ReferencePosterior("beta", 2.0, 10.0)
    b = ReferencePosterior("beta", 1.5, 9.5)
    # dense-grid oracle from scipy
    from scipy import stats

    t = np.linspace(0, 1, 200_001)
    want = np.max(np.abs(stats.beta.cdf(t, 2, 10) - stats.beta.cdf(t, 1.5, 9.5)))
    assert ks_distance(a, b).statistic == pytest.approx(want, abs=1e-7)


@settings(max_examples=60)
@given(unit_samples, unit_samples, unit_samples)
def test_ks_is_a_metric(a, b, c):
    ab = ks_distance(a, b).statistic
    assert ab == ks_distance(b, a).statistic
    assert ab <= ks_distance(a, c).statistic + ks_distance(c, b).statistic + 1e-12
    assert 0.0 <= ab <= 1.0


def test_sweep_structure_and_duplicates():
    cfg = SamplerConfig(n_draws=20_000, seed=3)
    fam = [L.constant(), L.constant()]
    rep = sensitivity_sweep(B(10, 1), fam, cfg, seed_policy="common")
    assert np.all(rep.fiducial_ks == 0.0)
    assert np.isnan(rep.summary_ratio)
    offset = sensitivity_sweep(B(10, 1), fam, cfg)
    assert offset.seeds == (3, 4)
    assert offset.fiducial_ks[0, 1] > 0.0
    with pytest.raises(DomainError):
        sensitivity_sweep(B(10, 1), fam[:1], cfg)
    with pytest.raises(DomainError):
        sensitivity_sweep(B(10, 1), fam, cfg, seed_policy="random")


def test_sweep_binomial_fiducial_barely_moves():
    rep = sensitivity_sweep(B(10, 1), [L.constant(), L.jeffreys_binomial()], SamplerConfig(n_draws=100_000, seed=1))
    assert rep.fiducial_ks[0, 1] < rep.posterior_ks[0, 1]
    assert rep.summary_ratio < 0.5


def test_sweep_poisson_fiducial_small():
    rep = sensitivity_sweep(P(2), [L.constant(), L.jeffreys_poisson()], SamplerConfig(n_draws=100_000, seed=1))
    assert rep.fiducial_ks[0, 1] < 0.02


def test_power_family_gives_full_matrices():
    fam = [L.power(a, a) for a in (-0.5, -0.25, 0.0, 0.5, 1.0)]
    rep = sensitivity_sweep(B(20, 2), fam, SamplerConfig(n_draws=5_000, seed=2))
    for m in (rep.fiducial_ks, rep.posterior_ks):
        assert m.shape == (5, 5)
        assert np.array_equal(m, m.T)
        assert np.all(np.diag(m) == 0.0)
        assert np.all(np.isfinite(m))
    assert len(rep.labels) == 5


def test_tabulated_member_has_no_posterior():
    tab = L.tabulated([0.0, 0.5, 1.0], [1.0, 2.0, 1.0])
    rep = sensitivity_sweep(B(10, 1), [L.constant(), tab], SamplerConfig(n_draws=2_000, seed=2))
    assert np.isnan(rep.posterior_ks[0, 1])
    assert np.isnan(rep.summary_ratio)


def test_fiducial_spread_shrinks_with_n():
    cfg = SamplerConfig(n_draws=200_000, seed=6)
    fam = [L.constant(), L.jeffreys_binomial()]
    small = sensitivity_sweep(B(10, 1), fam, cfg).fiducial_ks[0, 1]
    large = sensitivity_sweep(B(40, 4), fam, cfg).fiducial_ks[0, 1]
    assert large < small


def test_convergence_two_points():
    rep = convergence_study(0.1, [10, 20], config=SamplerConfig(n_draws=200_000, seed=1), replicates=0)
    assert rep.x_values == (1, 2)
    assert rep.ks[1] < rep.ks[0]


def test_convergence_single_entry_is_vacuous():
    rep = convergence_study(0.1, [10], config=SamplerConfig(n_draws=5_000, seed=1), replicates=0)
    assert len(rep.ks) == 1 and rep.passed


def test_convergence_validation():
    with pytest.raises(DomainError):
        convergence_study(0.1, [10, 15])
    with pytest.raises(DomainError):
        convergence_study(0.1, [20, 10])
    with pytest.raises(DomainError):
        convergence_study(0.1, [])


@pytest.mark.slow
def test_histogram_n20_within_multinomial_noise():
    s = golden_sample("b20", "jeffreys")
    z = histogram_zscores(histogram(s, 100), golden_cdf("b20", "jeffreys"))
    assert np.max(np.abs(z)) < 3.0
