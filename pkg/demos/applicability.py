"""
When does the two-stage recipe apply?
=====================================

Check preimage coverage and the constant global weighting, then see what a
restricted primary support does to the argument and the sample.
"""
import numpy as np

from organic_fiducial import (DiscreteSamplingScenario, GpdDescriptor, LpdDescriptor, SamplerConfig,
                              check_condition_2a, check_condition_2b, classify_argument, draw_fiducial,
                              post_data_support, preimage_interval)

for sc in (DiscreteSamplingScenario.binomial(10, 1), DiscreteSamplingScenario.poisson(0)):
    report = check_condition_2a(sc)
    gpd = GpdDescriptor.constant(sc, 1.0)
    print(f"{sc.label():24s} covered={report.covered}  constant GPD={check_condition_2b(gpd, sc.h_x)}  "
          f"argument={classify_argument(post_data_support(sc)).value}")

# %%
# Preimages: each gamma picks out an interval of parameter values.
sc = DiscreteSamplingScenario.binomial(10, 1)
for g in (0.1, 0.5, 0.9):
    iv = preimage_interval(sc, g)
    print(f"gamma={g}:  [{iv.lo:.5f}, {iv.hi:.5f})")

# %%
# A weighting that varies with p fails the check.
tilted = GpdDescriptor(sc.domain, 1.0, lambda p: 1.0 + p)
print("\nGPD 1 + p passes?", check_condition_2b(tilted, sc.h_x))

# %%
# Restrict gamma to (0, 0.5): the argument becomes moderate and the
# retained gammas are uniform on the restricted range.
sup = post_data_support(sc, restriction=[(0.0, 0.5)])
s = draw_fiducial(sc, LpdDescriptor.constant(), support=sup,
                  config=SamplerConfig(n_draws=100_000, seed=1, retain_gamma=True))
print("restricted argument:", classify_argument(sup).value)
print(f"gamma range [{s.gammas.min():.4f}, {s.gammas.max():.4f}], mean {np.mean(s.gammas):.4f}")
print(f"theta mean {s.draws.mean():.4f} against {draw_fiducial(sc, LpdDescriptor.constant(), config=SamplerConfig(n_draws=100_000, seed=1)).draws.mean():.4f} unrestricted")
