import functools

import pytest
from hypothesis import HealthCheck, settings

from organic_fiducial.densities import LpdDescriptor
from organic_fiducial.model import DiscreteSamplingScenario
from organic_fiducial.sampler import SamplerConfig, draw_fiducial

# compiled kernels make the first example slow
settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

GOLDEN = {
    "b10": DiscreteSamplingScenario.binomial(10, 1),
    "b20": DiscreteSamplingScenario.binomial(20, 2),
    "p2": DiscreteSamplingScenario.poisson(2),
}

MILLION = 1_000_000


def lpd_for(scenario, name):
    if name == "constant":
        return LpdDescriptor.constant()
    return LpdDescriptor.jeffreys(scenario)


@functools.lru_cache(maxsize=None)
def golden_sample(key, lpd_name, seed=20240601, n_draws=MILLION):
    """Million-draw samples shared between test modules."""
    sc = GOLDEN[key]
    return draw_fiducial(sc, lpd_for(sc, lpd_name), config=SamplerConfig(n_draws=n_draws, seed=seed))


@functools.lru_cache(maxsize=None)
def golden_cdf(key, lpd_name):
    from organic_fiducial.sampler import numeric_fiducial_cdf

    sc = GOLDEN[key]
    return numeric_fiducial_cdf(sc, lpd_for(sc, lpd_name))


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)


# acceptance verdicts, keyed by criterion number
VERDICTS = {}
CRITERIA = 12


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, CRITERIA + 1):
        if k in VERDICTS:
            ok, title, detail = VERDICTS[k]
            terminalreporter.write_line(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d} FAIL  not reached (error or not run)")
