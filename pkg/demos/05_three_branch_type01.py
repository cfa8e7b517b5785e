"""A mixed-speed fork keeps one tributary full.

Two upper branches feed one lower branch.  The fast tributary (beta = 3)
gets washed toward the junction, but the slow one (beta = 1) holds its
population all the way upstream: the limiting state rises to carrying
capacity as x -> -infinity on that branch only.  The simulation finds the
same state the threshold construction predicts.
Run:  python demos/05_three_branch_type01.py  (about a minute)
"""
import warnings

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from riverkpp import (
    GridSpec,
    bump_init,
    classify_parameters,
    discretize,
    run,
    stationary_profile,
    two_up_one_down,
)
from riverkpp.errors import ContaminationWarning

net = two_up_one_down(3.0, 1.0, 4.0)  # unit cross-sections fix beta_L = 4
predicted = classify_parameters(net)
print(f"prediction: {predicted.outcome}, junction {predicted.alpha:.4f}, "
      f"{predicted.solution_type}")

grid = GridSpec.uniform(net, length=120.0, spacing=0.05)
with warnings.catch_warnings():
    warnings.simplefilter("ignore", ContaminationWarning)
    series = run(discretize(net, grid, bump_init), T=100.0,
                 stop_on_contamination=False)
state = series.final_state
print(f"simulated junction at T=100: {series.final_junction:.4f}")

profile = stationary_profile(net, predicted.alpha)
fig, ax = plt.subplots(figsize=(7.5, 4.5))
colors = {"U1": "tab:red", "U2": "tab:green", "L1": "tab:blue"}
for k, b in enumerate(net.branches):
    xs = grid.positions(net, k)
    ax.plot(xs, state.fields[k], color=colors[b.id], lw=1.8,
            label=f"simulated {b.id} (beta={b.beta:g})")
    bp = profile.branches[b.id]
    ax.plot(bp.x, bp.values, color=colors[b.id], ls="--", lw=1)
ax.set_xlim(-60, 60)
ax.axvline(0, color="k", lw=0.5)
ax.set_xlabel("x (upper branches left, lower right)")
ax.set_ylabel("population density")
ax.legend(fontsize=8, title="solid: T=100 state, dashed: predicted")
ax.set_title("slow tributary persists at capacity upstream")
fig.tight_layout()
fig.savefig("demo_type01.png", dpi=130)
print("wrote demo_type01.png")
