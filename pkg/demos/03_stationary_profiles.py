"""Stationary profiles and their upstream decay split.

At the threshold junction value the upstream tail decays at the fast rate
k+ = (beta + sqrt(beta^2-4))/2; at every larger junction value it switches
to the slow rate k-.  The fitted exponents below come from the sampled
profiles alone.  Run:  python demos/03_stationary_profiles.py
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from riverkpp import compute_thresholds, decay_exponents, stationary_profile, two_branch

net = two_branch(3.0, 1.0)
alpha0 = compute_thresholds(net).thresholds["alpha0"]
k_plus, k_minus = decay_exponents(3.0)

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))
for alpha, color in [(alpha0, "tab:red"), ((alpha0 + 1) / 2, "tab:blue"), (0.9, "tab:green")]:
    prof = stationary_profile(net, alpha)
    d = prof.decay["U1"]
    label = rf"$\alpha={alpha:.3f}$: {d.kind.value}, fitted $k={d.fitted_exponent:.3f}$"
    print(label, f" (closed forms k+={k_plus:.3f}, k-={k_minus:.3f})")
    for bid, bp in prof.branches.items():
        sel = np.abs(bp.x) <= 25
        ax1.plot(bp.x[sel], bp.values[sel], color=color,
                 label=label if bid == "U1" else None)
    up = prof.branches["U1"]
    pos = up.values > 1e-12
    ax2.semilogy(up.x[pos], up.values[pos], color=color)

ax1.axvline(0, color="k", lw=0.5)
ax1.set_xlabel("x (junction at 0, upstream left)")
ax1.set_ylabel("population density")
ax1.legend(fontsize=8)
ax1.set_title("stationary states, fast upper / slow lower branch")
ax2.set_xlabel("x on the upper branch")
ax2.set_ylabel("density (log scale)")
ax2.set_title("upstream tails: fast at threshold, slow above")
fig.tight_layout()
fig.savefig("demo_profiles.png", dpi=130)
print("wrote demo_profiles.png")
