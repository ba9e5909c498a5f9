"""
Restart patterns on a step and a ramp, and estimating the noise level
=====================================================================

On a single jump ARROWS should restart once, shortly after the jump.
On a linear ramp the bins should have roughly equal widths. The noise
level fed to the forecaster can itself be estimated from the data with
the median absolute deviation of finest-scale Haar differences.

Run with ``python demos/restarts_and_sigma.py``.
"""
import numpy as np

from arrows import ArrowsConfig, NoiseSpec, add_noise, estimate_sigma_mad, run_arrows
from arrows.policy import bins_from_restarts
from arrows.sequences import gen_linear, gen_step

n = 2**13

###############################################################################
# Step: one jump of height 5 at the midpoint

truth = gen_step(n)
y = add_noise(truth, NoiseSpec(1.0, seed=1))
x, restart, _ = run_arrows(ArrowsConfig(n=n, sigma=1.0), y)
print("step restarts at", (np.flatnonzero(restart) + 1).tolist(), "jump at", n // 2 + 1)

###############################################################################
# Ramp: spatially homogeneous, so the bin widths should be similar

truth = gen_linear(n, slope_total=20.0)
y = add_noise(truth, NoiseSpec(1.0, seed=2))
_, restart, _ = run_arrows(ArrowsConfig(n=n, sigma=1.0), y)
widths = [hi - lo + 1 for lo, hi in bins_from_restarts(restart)]
print("ramp bin widths", widths)

###############################################################################
# Plug-in noise level: estimate sigma first, then forecast with it

for true_sigma in (0.5, 1.0, 2.0):
    y = add_noise(gen_step(n), NoiseSpec(true_sigma, seed=3))
    s_hat = estimate_sigma_mad(y)
    _, restart, _ = run_arrows(ArrowsConfig(n=n, sigma=s_hat), y)
    print(f"sigma {true_sigma}: estimate {s_hat:.3f}, restarts {int(restart.sum())}")
