"""Long-time outcome prediction and verification.

The trichotomy: every branch at or above the critical speed 2 washes the
population out; every upper branch below 2 lets it reach carrying capacity
everywhere; any other speed pattern settles onto a stationary state
strictly between 0 and 1, whose junction value is the regime threshold
computed by :mod:`riverkpp.stationary`.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import simulator
from .errors import ContaminationWarning, NotSettled, UnsupportedTopology
from .network import RiverNetwork, Topology
from .stationary import CRITICAL_SPEED, compute_thresholds
from .simulator import GridSpec, TimeSeries, bump_init, discretize, run

TYPE01_PROBE_LEVEL = 0.9  # upper-branch probe above this at -L/2 marks a
                          # state rising to 1 upstream


@dataclass(frozen=True)
class PersistenceState:
    outcome: str                      # "Washout" | "CarryingCapacity" | "BelowCapacity"
    alpha: float | None = None        # junction value, BelowCapacity only
    solution_type: str | None = None  # "type-00" | "type-01:<branch>", BelowCapacity only

    def __post_init__(self):
        if self.outcome == "BelowCapacity":
            if self.alpha is None or not (0.0 < self.alpha < 1.0):
                raise ValueError("BelowCapacity carries a junction value in (0, 1)")


@dataclass(frozen=True)
class VerificationReport:
    predicted: PersistenceState
    observed: PersistenceState
    junction_gap: float | None
    tolerance: float
    passed: bool
    series: TimeSeries | None = None


def classify_parameters(network: RiverNetwork) -> PersistenceState:
    """Predicted outcome from the branch speeds alone."""
    if network.topology is Topology.GENERAL_STAR:
        raise UnsupportedTopology(
            "outcome prediction covers two- and three-branch stars only")
    if all(b.beta >= CRITICAL_SPEED for b in network.branches):
        return PersistenceState(outcome="Washout")
    if all(b.beta < CRITICAL_SPEED for b in network.uppers):
        return PersistenceState(outcome="CarryingCapacity")
    report = compute_thresholds(network)
    regime = report.case.regime
    if regime == "TB-iii":
        return PersistenceState("BelowCapacity", report.thresholds["alpha0"], "type-00")
    if regime in ("UUL-III", "ULL-III"):
        return PersistenceState("BelowCapacity", report.thresholds["alpha_star"], "type-00")
    # UUL-IV: the sub-critical upper branch rises to 1 upstream
    slow = min(network.uppers, key=lambda b: b.beta)
    return PersistenceState("BelowCapacity", report.thresholds["alpha_star_star"],
                            f"type-01:{slow.id}")


def classify_simulation(series: TimeSeries, network: RiverNetwork,
                        tol: float = 1e-2) -> PersistenceState:
    """Outcome read off a finished time series.

    Requires the junction value to have settled: its drift over the trailing
    20% of the run must stay under tol/10, else NotSettled.
    """
    n_tail = max(int(0.2 * len(series.times)), 2)
    tail = series.junction[-n_tail:]
    drift = float(np.max(np.abs(tail - tail[-1])))
    if drift >= tol / 10.0:
        raise NotSettled(
            f"junction value still drifting by {drift:.3e} over the trailing 20% "
            f"(needs < {tol/10:.1e}); extend T")
    final = float(series.junction[-1])
    if final < tol:
        return PersistenceState(outcome="Washout")
    if final > 1.0 - tol:
        return PersistenceState(outcome="CarryingCapacity")
    sol_type = "type-00"
    for b in network.uppers:
        if series.probes[b.id][-1] > TYPE01_PROBE_LEVEL:
            sol_type = f"type-01:{b.id}"
            break
    return PersistenceState(outcome="BelowCapacity", alpha=final, solution_type=sol_type)


@dataclass(frozen=True)
class SimOptions:
    T: float = 200.0
    length: float = 500.0
    spacing: float = 0.05
    dt: float = simulator.DEFAULT_DT
    far_bc: simulator.FarBC = simulator.FarBC.NEUMANN0
    tol: float = 1e-2
    # persistence states legitimately fill the truncation; the contamination
    # warning is recorded on the report instead of aborting
    stop_on_contamination: bool = False


def verify_trichotomy(network: RiverNetwork,
                      sim_opts: SimOptions = SimOptions()) -> VerificationReport:
    """Predict the outcome, simulate from the canonical hump, compare."""
    predicted = classify_parameters(network)
    grid = GridSpec.uniform(network, length=sim_opts.length, spacing=sim_opts.spacing,
                            far_bc=sim_opts.far_bc)
    state = discretize(network, grid, bump_init)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContaminationWarning)
        series = run(state, T=sim_opts.T, dt=sim_opts.dt,
                     stop_on_contamination=sim_opts.stop_on_contamination)
    observed = classify_simulation(series, network, tol=sim_opts.tol)

    gap = None
    passed = predicted.outcome == observed.outcome
    if passed and predicted.outcome == "BelowCapacity":
        gap = abs(predicted.alpha - observed.alpha)
        passed = gap < sim_opts.tol and predicted.solution_type == observed.solution_type
    return VerificationReport(predicted=predicted, observed=observed,
                              junction_gap=gap, tolerance=sim_opts.tol,
                              passed=passed, series=series)


# -- parameter sweeps ------------------------------------------------------------

def _sweep_row(args):
    from .network import network_from_dict

    spec, simulate, opts_tuple = args
    network = network_from_dict(spec)
    row = {f"beta_{b.id}": b.beta for b in network.branches}
    row.update({f"a_{b.id}": b.a for b in network.branches})
    predicted = classify_parameters(network)
    row["predicted"] = predicted.outcome
    row["predicted_alpha"] = predicted.alpha if predicted.alpha is not None else ""
    row["predicted_type"] = predicted.solution_type or ""
    if simulate:
        opts = SimOptions(*opts_tuple)
        report = verify_trichotomy(network, opts)
        row["observed"] = report.observed.outcome
        row["observed_alpha"] = report.observed.alpha if report.observed.alpha is not None else ""
        row["observed_type"] = report.observed.solution_type or ""
        row["pass"] = report.passed
    return row


def sweep(networks, simulate: bool = False,
          sim_opts: SimOptions = SimOptions(), workers: int = 1) -> list[dict]:
    """Classify (and optionally verify by simulation) a list of networks.

    Rows come back in input order; failures propagate.  With workers > 1
    the jobs fan out over a process pool.
    """
    from .network import network_to_dict

    opts_tuple = (sim_opts.T, sim_opts.length, sim_opts.spacing, sim_opts.dt,
                  sim_opts.far_bc, sim_opts.tol, sim_opts.stop_on_contamination)
    jobs = [(network_to_dict(n), simulate, opts_tuple) for n in networks]
    if workers <= 1:
        return [_sweep_row(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_row, jobs))
