"""How the critical junction value appears.

For a two-branch river with a fast upper branch (beta_U = 3) and a slow
lower one (beta_L = 1), stationary states exist only above a threshold
junction value alpha0.  The threshold is the unique crossing of two curves:
the saddle entry orbit of the lower branch (which every downstream profile
must ride) and the fast exit orbit of the upper branch (the largest
admissible upstream slope).  Run:  python demos/02_threshold_construction.py
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from riverkpp import (
    TrajectoryKind,
    compute_thresholds,
    psi_curve,
    trace_special_trajectory,
    two_branch,
)

net = two_branch(3.0, 1.0)
report = compute_thresholds(net)
alpha0 = report.thresholds["alpha0"]
print(f"regime {report.case.regime}: alpha0 = {alpha0:.6f} "
      f"({report.crossing_count} crossing)")

lower = psi_curve(trace_special_trajectory(TrajectoryKind.GAMMA_PLUS, net.lowers[0].mu))
upper = psi_curve(trace_special_trajectory(TrajectoryKind.GAMMA_STAR, net.uppers[0].mu))

fig, ax = plt.subplots(figsize=(6.5, 4.5))
ax.plot(lower.grid, lower.values, label="lower-branch requirement (saddle entry)")
ax.plot(upper.grid, upper.values, label="upper-branch capacity (fast exit)")
ax.axvline(alpha0, color="k", ls="--", lw=1, label=rf"$\alpha_0 = {alpha0:.4f}$")
ax.fill_between(lower.grid, lower.values, upper.values,
                where=upper.values >= lower.values, alpha=0.15, color="tab:green",
                label="stationary states exist")
ax.set_xlabel(r"junction value $\alpha$")
ax.set_ylabel(r"scaled junction slope $\Psi(\alpha)$")
ax.legend(fontsize=8)
ax.set_title(r"$\beta_U = 3, \beta_L = 1$: existence threshold")
fig.tight_layout()
fig.savefig("demo_threshold.png", dpi=130)
print("wrote demo_threshold.png")
