"""
How much does the LPD matter?
=============================

Sweep a family of local pre-data weightings and compare the spread of the
resulting fiducial densities with the spread of the matching posteriors.

Usage: python lpd_sensitivity.py [draws]
"""
import sys

import numpy as np

from organic_fiducial import DiscreteSamplingScenario, LpdDescriptor, SamplerConfig, sensitivity_sweep

draws = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000
np.set_printoptions(precision=4, suppress=True)
config = SamplerConfig(n_draws=draws, seed=11)

# %%
# Constant against Jeffreys for one success in ten.
sc = DiscreteSamplingScenario.binomial(10, 1)
rep = sensitivity_sweep(sc, [LpdDescriptor.constant(), LpdDescriptor.jeffreys(sc)], config)
print("n=10, x=1")
print("  fiducial KS ", round(rep.fiducial_ks[0, 1], 4))
print("  posterior KS", round(rep.posterior_ks[0, 1], 4))
print("  ratio       ", round(rep.summary_ratio, 4))

# %%
# A wider family: p^a (1 - p)^a for five exponents, on n=20, x=2.
sc = DiscreteSamplingScenario.binomial(20, 2)
family = [LpdDescriptor.power(a, a) for a in (-0.5, -0.25, 0.0, 0.5, 1.0)]
rep = sensitivity_sweep(sc, family, config)
print("\nn=20, x=2, labels:", ", ".join(rep.labels))
print("fiducial KS matrix\n", rep.fiducial_ks)
print("posterior KS matrix\n", rep.posterior_ks)
print("ratio", round(rep.summary_ratio, 4))
