"""
Approach to the Jeffreys posterior
==================================

Hold the sample proportion at 0.1 and grow n.  The KS distance between the
fiducial sample and Beta(x + 1/2, n - x + 1/2) shrinks steadily.

Usage: python convergence.py [draws]
"""
import sys

from organic_fiducial import SamplerConfig, convergence_study

draws = int(sys.argv[1]) if len(sys.argv) > 1 else 1_000_000
rep = convergence_study(0.1, [10, 20, 40, 80, 160], config=SamplerConfig(n_draws=draws, seed=3), replicates=4)

print("   n    x      KS     sigma")
for n, x, ks, s in zip(rep.n_values, rep.x_values, rep.ks, rep.sigma):
    print(f"{n:4d} {x:4d}  {ks:.4f}  {s:.4f}")
print("nonincreasing within noise:", rep.nonincreasing_within_noise)
