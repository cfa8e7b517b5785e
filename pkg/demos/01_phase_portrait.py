"""Special orbits of the scaled stationary system.

The stationary equation on one branch, -phi'' + phi' = mu (phi - phi^2)
with mu = 1/beta^2, has exactly two equilibria in the phase plane: the
origin and the saddle (1, 0).  Everything in the network analysis hinges
on four special orbits, traced here for a node-regime mu and a spiral-
regime mu.  Run:  python demos/01_phase_portrait.py
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from riverkpp import TrajectoryKind, equilibrium_eigen, trace_special_trajectory

fig, axes = plt.subplots(1, 2, figsize=(11, 4.5), sharey=True)

# Left: beta = 3 (mu = 1/9 < 1/4, the origin is an unstable node).
# The fast exit orbit (gamma-star), the origin-to-saddle connection (H)
# and the descending orbit (gamma-minus) coexist.
mu = 1 / 9
rep = equilibrium_eigen(mu)
print(f"mu={mu:.4f}: origin is a {rep.origin_type.value}, "
      f"fast/slow directions {rep.lambda0_plus.real:.4f}/{rep.lambda0_minus.real:.4f}")
for kind, color, label in [
    (TrajectoryKind.GAMMA_STAR, "tab:red", "fast exit orbit"),
    (TrajectoryKind.H, "tab:blue", "origin-saddle connection"),
    (TrajectoryKind.GAMMA_MINUS, "tab:green", "descending orbit"),
]:
    tr = trace_special_trajectory(kind, mu)
    axes[0].plot(tr.phi, tr.psi, color=color, label=label)
axes[0].set_title(r"$\mu = 1/9$ (node regime, $\beta = 3$)")

# Right: beta = 1 (mu = 1 > 1/4, the origin is an unstable spiral).
# Only the saddle manifolds survive inside the strip; the ascending one
# now leaves through the psi-axis at a positive height.
mu = 1.0
print(f"mu={mu:.4f}: origin is a {equilibrium_eigen(mu).origin_type.value}")
for kind, color, label in [
    (TrajectoryKind.GAMMA_PLUS, "tab:blue", "saddle entry orbit"),
    (TrajectoryKind.GAMMA_MINUS, "tab:green", "descending orbit"),
]:
    tr = trace_special_trajectory(kind, mu)
    axes[1].plot(tr.phi, tr.psi, color=color, label=label)
axes[1].set_title(r"$\mu = 1$ (spiral regime, $\beta = 1$)")

for ax in axes:
    ax.axhline(0, color="k", lw=0.5)
    ax.plot([0, 1], [0, 0], "ko", ms=4)
    ax.set_xlabel(r"$\phi$")
    ax.legend(fontsize=8)
axes[0].set_ylabel(r"$\psi = \mathrm{d}\phi/\mathrm{d}x$")
fig.tight_layout()
fig.savefig("demo_phase_portrait.png", dpi=130)
print("wrote demo_phase_portrait.png")
