"""
Simulating discretely observed jump-diffusion paths
===================================================

A path is a drifted Brownian motion plus occasional jumps.  We only ever see
it on a grid of n equally spaced times, as increments D_i.  The simulator
keeps the hidden truth (which windows the jumps landed in and how big they
were) so later demos can check the estimators against it.
"""

import numpy as np

from jumpvol import DiffusionSpec, JumpSpec, simulate_path, write_increments_csv

# the showcase configuration used throughout the demos: drift 1, volatility
# 10, horizon 1, five jumps per unit time of size +-3
diff = DiffusionSpec(beta=1.0, theta_star=10.0, horizon=1.0)
jumps = JumpSpec.two_point(rate=5.0, tau=3.0)

path = simulate_path(diff, jumps, n=5000, seed=42)

print(f"simulated n={path.n} increments, delta={path.delta}")
print(f"windows containing a jump (1-based): {path.truth.jump_windows}")
print(f"their summed squared sizes: {path.truth.jump_qv:.3f}")

# increments look like tame Gaussian noise except where a jump landed
d = path.increments
print(f"\ntypical |D_i| (median): {np.median(np.abs(d)):.4f}")
print(f"largest  |D_i|:          {np.abs(d).max():.4f}")

# the level path X_t is the cumulative sum of the increments
levels = np.concatenate([[0.0], np.cumsum(d)])

write_increments_csv("demo_path.csv", path, with_truth=True)
print("\nwrote demo_path.csv (columns index,t_i,D_i,mu_i)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(11, 4))
    t = np.concatenate([[0.0], path.times])
    ax0.plot(t, levels, lw=0.6, color="black")
    for i in path.truth.jump_windows:
        ax0.axvline(i * path.delta, color="tab:red", alpha=0.4, lw=0.8)
    ax0.set_xlabel("t")
    ax0.set_ylabel("X_t")
    ax0.set_title("sample path (jump windows marked)")

    ax1.plot(path.times, d, lw=0.4, color="tab:blue")
    ax1.set_xlabel("t_i")
    ax1.set_ylabel("D_i")
    ax1.set_title("observed increments")
    fig.tight_layout()
    fig.savefig("demo_path.png", dpi=120)
    print("wrote demo_path.png")
except ImportError:
    print("matplotlib not available; skipped the plot")
