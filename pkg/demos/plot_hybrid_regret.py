"""
Regret scaling on a signal with uneven smoothness
==================================================

A cubic spline whose knots bunch up toward the middle, followed by a
Doppler chirp. ARROWS restarts often where the trend moves fast and
rarely where it is calm; the linear baselines use one width everywhere.

Run with ``python demos/plot_hybrid_regret.py``. Figures go to ``demos/out``.
"""
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from arrows import ArrowsConfig, NoiseSpec, add_noise, gen_hybrid, run_arrows
from arrows.evaluation import per_n_rows, scaling_slope, sweep
from arrows.sequences import make_generator

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

###############################################################################
# One noisy run, with the restarts marked

n = 2**14
truth = gen_hybrid(n)
y = add_noise(truth, NoiseSpec(sigma=1.0, seed=0))
x, restart, _ = run_arrows(ArrowsConfig(n=n, sigma=1.0), y)
print(f"TV of the trend: {truth.tv:.2f}, restarts: {int(restart.sum())}")

fig, ax = plt.subplots(figsize=(9, 4))
ax.plot(y, ".", ms=1, color="0.7", label="observations")
ax.plot(truth.theta, "k", lw=1, label="trend")
ax.plot(x, "C0", lw=1, label="ARROWS")
for t in np.flatnonzero(restart):
    ax.axvline(t, color="C3", lw=0.5)
ax.legend(loc="upper left")
fig.savefig(out / "hybrid_fit.png", dpi=120)

###############################################################################
# Regret against horizon on log-log axes, averaged over seeds

grid = [2**k for k in range(12, 18)]
traces = sweep(["arrows", "ogd-tv", "ma-tv"], make_generator("hybrid"), grid, range(5), workers=4)
rows = per_n_rows(traces)

fig, ax = plt.subplots(figsize=(5, 4))
for algo, r in rows.items():
    ns, means = [a for a, _, _ in r], [b for _, b, _ in r]
    slope = scaling_slope(list(zip(ns, means)))
    ax.loglog(ns, means, "o-", label=f"{algo} (slope {slope:.2f})")
    print(f"{algo:8s} slope {slope:.3f}")
ax.set_xlabel("n")
ax.set_ylabel("dynamic regret")
ax.legend()
fig.tight_layout()
fig.savefig(out / "hybrid_regret.png", dpi=120)
