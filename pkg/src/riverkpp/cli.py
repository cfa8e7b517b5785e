"""Command-line entry point.

Subcommands: phase-plane, stationary, simulate, classify, verify, sweep.
Every invocation writes its outputs (CSV with 17 significant digits, JSON)
plus a run manifest capturing the fully resolved configuration, so a rerun
from the manifest reproduces the artifacts bit for bit.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ContaminationWarning, RiverKppError
from .network import (
    network_from_dict,
    network_to_dict,
    read_network_config,
)
from . import classify as classify_mod
from . import simulator
from . import stationary
from .phaseplane import (
    GridOptions,
    IntegrationOptions,
    TrajectoryKind,
    equilibrium_eigen,
    psi_curve,
    trace_special_trajectory,
)

log = logging.getLogger("riverkpp")

FLOAT_FMT = "%.17g"  # lossless round-trip of doubles


def _fmt(value) -> str:
    if isinstance(value, float):
        return FLOAT_FMT % value
    return str(value)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_json(path: Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_manifest(out_dir: Path, subcommand: str, resolved: dict, started: float) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": resolved,
        "tool_version": __version__,
        "duration_seconds": time.time() - started,
    }
    write_json(out_dir / "manifest.json", manifest)


def load_manifest_config(path) -> dict:
    with open(path) as fh:
        return json.load(fh)["config"]


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _persistence_payload(state: classify_mod.PersistenceState) -> dict:
    return {"outcome": state.outcome, "alpha": state.alpha,
            "solution_type": state.solution_type}


# -- subcommand handlers ---------------------------------------------------------

def cmd_phase_plane(args) -> int:
    started = time.time()
    out = _out_dir(args)
    kind = TrajectoryKind(args.kind)
    opts = IntegrationOptions()
    traj = trace_special_trajectory(kind, args.mu, opts)
    curve = psi_curve(traj, GridOptions())
    rep = equilibrium_eigen(args.mu)

    write_csv(out / "trajectory.csv", ["x", "phi", "psi"],
              zip(traj.x.tolist(), traj.phi.tolist(), traj.psi.tolist()))
    write_csv(out / "psi_curve.csv", ["phi", "psi"],
              zip(curve.grid.tolist(), curve.values.tolist()))
    lo, hi = curve.endpoint_values()
    write_json(out / "summary.json", {
        "mu": args.mu,
        "kind": kind.value,
        "origin_type": rep.origin_type.value,
        "lambda0_plus": [rep.lambda0_plus.real, rep.lambda0_plus.imag],
        "lambda0_minus": [rep.lambda0_minus.real, rep.lambda0_minus.imag],
        "lambda1_plus": rep.lambda1_plus,
        "lambda1_minus": rep.lambda1_minus,
        "psi_at_grid_start": lo,
        "psi_at_grid_end": hi,
        "terminal": traj.terminal,
        "launch": traj.launch,
    })
    write_manifest(out, "phase-plane", {"mu": args.mu, "kind": kind.value,
                                        "out": str(out)}, started)
    return 0


def cmd_stationary(args) -> int:
    started = time.time()
    out = _out_dir(args)
    network = read_network_config(args.config)
    case = stationary.classify_case(network)
    payload: dict = {"network": network_to_dict(network),
                     "configuration": case.configuration.value,
                     "regime": case.regime}
    try:
        report = stationary.compute_thresholds(network)
        payload["thresholds"] = report.thresholds
        payload["crossing_count"] = report.crossing_count
        payload["existence_intervals"] = [
            {"from": a, "to": b, "type": label}
            for a, b, label in report.existence_intervals]
    except RiverKppError as exc:
        payload["thresholds"] = {}
        payload["note"] = str(exc)
    write_json(out / "thresholds.json", payload)

    if args.alpha is not None:
        profile = stationary.stationary_profile(network, args.alpha)
        rows = []
        for bid, bp in profile.branches.items():
            rows.extend((bid, x, v) for x, v in zip(bp.x.tolist(), bp.values.tolist()))
        write_csv(out / "profile.csv", ["branch", "x", "value"], rows)
        payload_profile = {
            "alpha": profile.alpha,
            "solution_type": profile.solution_type,
            "flux_residual": profile.flux_residual,
            "decay": {k: (v.kind.value if v else None) for k, v in profile.decay.items()},
        }
        write_json(out / "profile_summary.json", payload_profile)

    write_manifest(out, "stationary",
                   {"network": network_to_dict(network), "alpha": args.alpha,
                    "out": str(out)}, started)
    return 0


def _parse_init(spec: str):
    name, _, rest = spec.partition(":")
    if name == "bump":
        return simulator.bump_init
    if name == "constant":
        c = float(rest or 0.0)
        return lambda x: np.full_like(np.asarray(x, dtype=float), c)
    if name == "supersolution":
        raise argparse.ArgumentTypeError(
            "supersolution init is network-dependent; use the stationary oracle API")
    raise argparse.ArgumentTypeError(f"unknown init spec {spec!r}")


def _sim_config(args, network) -> dict:
    return {
        "network": network_to_dict(network),
        "T": args.T, "dt": args.dt, "L": args.L, "N": int(round(args.L / args.h)) + 1,
        "h": args.h, "far_bc": args.far_bc, "init": args.init,
    }


def cmd_simulate(args) -> int:
    started = time.time()
    out = _out_dir(args)
    network = read_network_config(args.config)
    grid = simulator.GridSpec.uniform(network, length=args.L, spacing=args.h,
                                      far_bc=simulator.FarBC(args.far_bc))
    state = simulator.discretize(network, grid, _parse_init(args.init))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ContaminationWarning)
        series = simulator.run(state, T=args.T, dt=args.dt,
                               stop_on_contamination=not args.run_past_contamination)
    for w in caught:
        log.warning("%s", w.message)

    cols = ["t", "junction"]
    data = [series.times.tolist(), series.junction.tolist()]
    for bid in series.sup:
        cols.append(f"sup_{bid}")
        data.append(series.sup[bid].tolist())
    for bid in series.probes:
        cols.append(f"probe_{bid}")
        data.append(series.probes[bid].tolist())
    write_csv(out / "timeseries.csv", cols, zip(*data))

    rows = []
    final_state = series.final_state
    for k, b in enumerate(network.branches):
        xs = grid.positions(network, k)
        rows.extend((b.id, x, v) for x, v in zip(xs.tolist(), final_state.fields[k].tolist()))
    write_csv(out / "final_profile.csv", ["branch", "x", "value"], rows)
    write_json(out / "run_summary.json", {
        "final_time": float(series.times[-1]),
        "final_junction": series.final_junction,
        "contaminated": series.contaminated,
    })
    write_manifest(out, "simulate", _sim_config(args, network), started)
    return 0


def cmd_classify(args) -> int:
    started = time.time()
    out = _out_dir(args)
    network = read_network_config(args.config)
    predicted = classify_mod.classify_parameters(network)
    write_json(out / "prediction.json", _persistence_payload(predicted))
    write_manifest(out, "classify", {"network": network_to_dict(network),
                                     "out": str(out)}, started)
    return 0


def cmd_verify(args) -> int:
    started = time.time()
    out = _out_dir(args)
    network = read_network_config(args.config)
    opts = classify_mod.SimOptions(T=args.T, length=args.L, spacing=args.h, dt=args.dt)
    report = classify_mod.verify_trichotomy(network, opts)
    write_json(out / "report.json", {
        "predicted": _persistence_payload(report.predicted),
        "observed": _persistence_payload(report.observed),
        "junction_gap": report.junction_gap,
        "tolerance": report.tolerance,
        "pass": report.passed,
        "contaminated": report.series.contaminated if report.series else None,
    })
    write_manifest(out, "verify", {"network": network_to_dict(network), "T": args.T,
                                   "L": args.L, "h": args.h, "dt": args.dt}, started)
    return 0 if report.passed else 1


def cmd_sweep(args) -> int:
    started = time.time()
    out = _out_dir(args)
    with open(args.grid) as fh:
        spec = json.load(fh)
    networks = [network_from_dict(entry) for entry in spec["networks"]]
    simulate = bool(spec.get("simulate", False))
    sim_opts = classify_mod.SimOptions(**spec.get("sim", {}))
    rows = classify_mod.sweep(networks, simulate=simulate, sim_opts=sim_opts,
                              workers=args.workers)
    header = sorted({k for row in rows for k in row})
    write_csv(out / "sweep.csv", header, ([row.get(k, "") for k in header] for row in rows))
    write_manifest(out, "sweep", {"grid": spec, "workers": args.workers}, started)
    return 0


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riverkpp",
        description="Stationary states and long-time dynamics of logistic "
                    "growth with drift on star-shaped river networks.")
    parser.add_argument("--version", action="version", version=f"riverkpp {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    pp = sub.add_parser("phase-plane", help="trace a special orbit and its Psi-curve")
    pp.add_argument("--mu", type=float, required=True, help="scaled reaction strength 1/beta^2")
    pp.add_argument("--kind", required=True,
                    choices=[k.value for k in TrajectoryKind])
    pp.add_argument("--out", default="out-phase-plane")
    pp.set_defaults(handler=cmd_phase_plane)

    st = sub.add_parser("stationary", help="thresholds and stationary profiles")
    st.add_argument("--config", required=True, help="network JSON")
    st.add_argument("--alpha", type=float, default=None)
    st.add_argument("--out", default="out-stationary")
    st.set_defaults(handler=cmd_stationary)

    sim = sub.add_parser("simulate", help="time-integrate from an initial hump")
    sim.add_argument("--config", required=True)
    sim.add_argument("--init", default="bump", help="bump | constant:<c>")
    sim.add_argument("--T", type=float, required=True)
    sim.add_argument("--dt", type=float, default=simulator.DEFAULT_DT)
    sim.add_argument("--L", type=float, default=500.0)
    sim.add_argument("--N", type=int, default=None,
                     help="node count per branch (overrides --h)")
    sim.add_argument("--h", type=float, default=0.05)
    sim.add_argument("--far-bc", dest="far_bc", default="neumann",
                     choices=[b.value for b in simulator.FarBC])
    sim.add_argument("--run-past-contamination", action="store_true")
    sim.add_argument("--out", default="out-simulate")
    sim.set_defaults(handler=cmd_simulate)

    cl = sub.add_parser("classify", help="predict the outcome from parameters")
    cl.add_argument("--config", required=True)
    cl.add_argument("--out", default="out-classify")
    cl.set_defaults(handler=cmd_classify)

    ver = sub.add_parser("verify", help="prediction vs simulation report")
    ver.add_argument("--config", required=True)
    ver.add_argument("--T", type=float, default=200.0)
    ver.add_argument("--L", type=float, default=500.0)
    ver.add_argument("--h", type=float, default=0.05)
    ver.add_argument("--dt", type=float, default=simulator.DEFAULT_DT)
    ver.add_argument("--out", default="out-verify")
    ver.set_defaults(handler=cmd_verify)

    sw = sub.add_parser("sweep", help="phase diagram over a network list")
    sw.add_argument("--grid", required=True, help="sweep spec JSON")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out", default="out-sweep")
    sw.set_defaults(handler=cmd_sweep)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("RIVERKPP_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "N", None):
        args.h = args.L / (args.N - 1)
    try:
        return args.handler(args)
    except RiverKppError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
