"""Star-shaped river networks and junction flow conservation.

A network is a set of half-infinite branches meeting at the single junction
x = 0.  Upper (upstream) branches live on (-inf, 0], lower (downstream)
branches on [0, +inf).  Each branch carries a constant advection speed
``beta`` (water flowing toward the junction on upper branches, away from it
on lower ones, both in the increasing-x direction) and a cross-section area
``a``.  Admissible networks balance the cross-section-weighted flow at the
junction:  sum of a*beta over upper branches == sum over lower branches.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from .errors import (
    ConservationViolated,
    NoLowerBranch,
    NonpositiveParameter,
    NoUpperBranch,
    UnsupportedTopology,
)

CONSERVATION_RTOL = 1e-12
WEIGHT_SUM_RTOL = 1e-12


class Orientation(str, Enum):
    UPPER = "upper"
    LOWER = "lower"


class Topology(str, Enum):
    TWO_BRANCH = "two_branch"            # 1 upper + 1 lower
    TWO_UP_ONE_DOWN = "two_up_one_down"  # 2 upper + 1 lower
    ONE_UP_TWO_DOWN = "one_up_two_down"  # 1 upper + 2 lower
    GENERAL_STAR = "general_star"        # anything else (simulation only)


@dataclass(frozen=True)
class BranchSpec:
    """One branch of the network.

    ``diffusion`` is fixed to 1 by the model normalization; it is kept as a
    field so configs stay explicit about it.
    """

    orientation: Orientation
    beta: float
    a: float
    id: str = ""
    diffusion: float = 1.0

    def __post_init__(self):
        if not (self.beta > 0.0):
            raise NonpositiveParameter(f"beta must be > 0, got {self.beta}")
        if not (self.a > 0.0):
            raise NonpositiveParameter(f"cross-section a must be > 0, got {self.a}")
        if self.diffusion != 1.0:
            raise ValueError("diffusion is normalized to 1 in this model")

    @property
    def mu(self) -> float:
        """Scaled reaction strength 1/beta^2 of the stationary problem."""
        return 1.0 / (self.beta * self.beta)

    @property
    def flux(self) -> float:
        return self.a * self.beta


@dataclass(frozen=True)
class RiverNetwork:
    branches: tuple[BranchSpec, ...]
    topology: Topology

    @property
    def uppers(self) -> tuple[BranchSpec, ...]:
        return tuple(b for b in self.branches if b.orientation is Orientation.UPPER)

    @property
    def lowers(self) -> tuple[BranchSpec, ...]:
        return tuple(b for b in self.branches if b.orientation is Orientation.LOWER)

    def branch(self, branch_id: str) -> BranchSpec:
        for b in self.branches:
            if b.id == branch_id:
                return b
        raise KeyError(f"no branch with id {branch_id!r}")

    def conservation_residual(self) -> float:
        """Relative imbalance of a*beta between upper and lower branches."""
        up = sum(b.flux for b in self.uppers)
        low = sum(b.flux for b in self.lowers)
        return abs(up - low) / max(up, low)


@dataclass(frozen=True)
class JunctionWeights:
    """Dimensionless flux fractions of the split side of the junction.

    For a two-upper/one-lower network these are the per-upper-branch ratios
    a_i*beta_i / (a_L*beta_L); for one-upper/two-lower the per-lower-branch
    ratios a_i*beta_i / (a_U*beta_U).  They sum to 1 by conservation.
    """

    branch_ids: tuple[str, ...]
    weights: tuple[float, ...]
    side: Orientation

    def __post_init__(self):
        s = sum(self.weights)
        if abs(s - 1.0) > WEIGHT_SUM_RTOL:
            raise ConservationViolated(abs(s - 1.0), f"junction weights sum to {s}, not 1")
        if any(not (0.0 < w <= 1.0) for w in self.weights):
            raise NonpositiveParameter(f"weights must lie in (0, 1], got {self.weights}")


def _infer_topology(n_upper: int, n_lower: int) -> Topology:
    if n_upper == 1 and n_lower == 1:
        return Topology.TWO_BRANCH
    if n_upper == 2 and n_lower == 1:
        return Topology.TWO_UP_ONE_DOWN
    if n_upper == 1 and n_lower == 2:
        return Topology.ONE_UP_TWO_DOWN
    return Topology.GENERAL_STAR


def build_network(branches) -> RiverNetwork:
    """Validate a branch list and tag its topology.

    Raises NoUpperBranch/NoLowerBranch when one side of the junction is
    missing, and ConservationViolated when a*beta does not balance to
    relative tolerance 1e-12.
    """
    branches = tuple(branches)
    if not branches:
        raise NoUpperBranch("empty branch list")
    uppers = [b for b in branches if b.orientation is Orientation.UPPER]
    lowers = [b for b in branches if b.orientation is Orientation.LOWER]
    if not uppers:
        raise NoUpperBranch("network needs at least one upper branch")
    if not lowers:
        raise NoLowerBranch("network needs at least one lower branch")

    # assign stable default ids (U1.., L1..) where none were given
    named = []
    n_up = n_low = 0
    seen = {b.id for b in branches if b.id}
    for b in branches:
        if b.id:
            named.append(b)
            continue
        if b.orientation is Orientation.UPPER:
            n_up += 1
            candidate = f"U{n_up}"
        else:
            n_low += 1
            candidate = f"L{n_low}"
        while candidate in seen:
            candidate += "'"
        seen.add(candidate)
        named.append(replace(b, id=candidate))
    if len({b.id for b in named}) != len(named):
        raise ValueError("branch ids must be unique")

    up = sum(b.flux for b in uppers)
    low = sum(b.flux for b in lowers)
    residual = abs(up - low) / max(up, low)
    if residual > CONSERVATION_RTOL:
        raise ConservationViolated(residual)

    return RiverNetwork(branches=tuple(named), topology=_infer_topology(len(uppers), len(lowers)))


def junction_weights(network: RiverNetwork) -> JunctionWeights:
    """Flux fractions of the two-branch side of a three-branch junction."""
    if network.topology is Topology.TWO_UP_ONE_DOWN:
        side = Orientation.UPPER
        split = network.uppers
        total = network.lowers[0].flux
    elif network.topology is Topology.ONE_UP_TWO_DOWN:
        side = Orientation.LOWER
        split = network.lowers
        total = network.uppers[0].flux
    else:
        raise UnsupportedTopology(
            f"junction weights are defined for three-branch stars, not {network.topology.value}"
        )
    return JunctionWeights(
        branch_ids=tuple(b.id for b in split),
        weights=tuple(b.flux / total for b in split),
        side=side,
    )


# -- config file round-trip ----------------------------------------------------

def network_to_dict(network: RiverNetwork) -> dict:
    out = {
        "branches": [
            {"id": b.id, "orientation": b.orientation.value, "beta": b.beta, "a": b.a}
            for b in network.branches
        ],
        "topology": network.topology.value,
    }
    if network.topology in (Topology.TWO_UP_ONE_DOWN, Topology.ONE_UP_TWO_DOWN):
        w = junction_weights(network)
        out["junction_weights"] = dict(zip(w.branch_ids, w.weights))
    return out


def network_from_dict(data: dict) -> RiverNetwork:
    branches = [
        BranchSpec(
            orientation=Orientation(spec["orientation"]),
            beta=float(spec["beta"]),
            a=float(spec["a"]),
            id=str(spec.get("id", "")),
        )
        for spec in data["branches"]
    ]
    return build_network(branches)


def read_network_config(path) -> RiverNetwork:
    with open(path) as fh:
        return network_from_dict(json.load(fh))


def write_network_config(network: RiverNetwork, path) -> None:
    Path(path).write_text(json.dumps(network_to_dict(network), indent=2) + "\n")


def two_branch(beta_upper: float, beta_lower: float, a_upper: float = 1.0,
               a_lower: float | None = None) -> RiverNetwork:
    """Convenience builder; picks a_lower from conservation when omitted."""
    if a_lower is None:
        a_lower = a_upper * beta_upper / beta_lower
    return build_network([
        BranchSpec(Orientation.UPPER, beta_upper, a_upper, id="U1"),
        BranchSpec(Orientation.LOWER, beta_lower, a_lower, id="L1"),
    ])


def two_up_one_down(beta_u1: float, beta_u2: float, beta_lower: float,
                    a_u1: float = 1.0, a_u2: float = 1.0,
                    a_lower: float | None = None) -> RiverNetwork:
    if a_lower is None:
        a_lower = (a_u1 * beta_u1 + a_u2 * beta_u2) / beta_lower
    return build_network([
        BranchSpec(Orientation.UPPER, beta_u1, a_u1, id="U1"),
        BranchSpec(Orientation.UPPER, beta_u2, a_u2, id="U2"),
        BranchSpec(Orientation.LOWER, beta_lower, a_lower, id="L1"),
    ])


def one_up_two_down(beta_upper: float, beta_l1: float, beta_l2: float,
                    a_l1: float = 1.0, a_l2: float = 1.0,
                    a_upper: float | None = None) -> RiverNetwork:
    if a_upper is None:
        a_upper = (a_l1 * beta_l1 + a_l2 * beta_l2) / beta_upper
    return build_network([
        BranchSpec(Orientation.UPPER, beta_upper, a_upper, id="U1"),
        BranchSpec(Orientation.LOWER, beta_l1, a_l1, id="L1"),
        BranchSpec(Orientation.LOWER, beta_l2, a_l2, id="L2"),
    ])
