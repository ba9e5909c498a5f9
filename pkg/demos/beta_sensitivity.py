"""
How the shrinkage exponent moves the regret slope
=================================================

The default exponent (27 to 28 at these horizons) gives a threshold of
15 to 18 sigma. That is safe but slow to react at moderate n, and the fitted
slope on the hybrid signal comes out close to 1/2. Smaller exponents let
the restart rule fire sooner and the slope drops toward 1/3.

Run with ``python demos/beta_sensitivity.py``.
"""
import numpy as np

from arrows.evaluation import per_n_rows, scaling_slope, sweep
from arrows.policy import default_beta
from arrows.sequences import make_generator

grid = [2**k for k in range(12, 18)]
seeds = range(5)
gen = make_generator("hybrid")

print(f"default exponent at n = 2^17: {default_beta(2**17):.2f}")

###############################################################################
# Sweep a few exponents; ``None`` means the default

for beta in (None, 8.0, 4.0, 2.0, 1.0):
    traces = sweep(["arrows"], gen, grid, seeds, beta=beta, workers=4)
    rows = per_n_rows(traces)["arrows"]
    slope = scaling_slope([(n, m) for n, m, _ in rows])
    bins = np.mean([tr.num_bins for tr in traces if tr.n == grid[-1]])
    label = "default" if beta is None else f"{beta:g}"
    print(f"beta {label:>7s}: slope {slope:.3f}, mean bins at n=2^17 {bins:.1f}")
