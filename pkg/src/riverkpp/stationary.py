"""Stationary states of the network problem via phase-plane thresholds.

Every bounded stationary state decomposes branch-by-branch into orbits of
the scaled planar system (see :mod:`riverkpp.phaseplane`) that share the
junction value alpha and balance cross-section-weighted slopes.  Three
structural facts drive everything here:

* each lower branch must ride the orbit entering the saddle (1, 0) inside
  the unit strip -- GAMMA_PLUS when beta < 2 (mu > 1/4), H when beta >= 2 --
  so its scaled junction slope is pinned to that curve's value at alpha;
* an upper branch that decays to 0 upstream must launch below-or-on the
  fast origin orbit GAMMA_STAR of its mu (which requires beta >= 2), while
  an upper branch rising to 1 upstream must ride GAMMA_MINUS;
* the junction balance then either has no admissible slope allocation
  (no stationary state at this alpha), exactly one, or a continuum.

Thresholds in alpha are the crossings of the resulting curve families, and
existence holds exactly where the slope-allocation margin is nonnegative.
The critical junction values (alpha0 for two branches, alpha* / alpha** and
the one-branch-decreasing onsets alpha_hat_i for three branches) are found
by a sign scan over the shared phi-grid plus bracketed refinement.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (
    AmbiguousFit,
    InfeasibleAlpha,
    NoCrossingFound,
    NotConverged,
    RegimeHasNoThreshold,
    TrajectoryEscapedUnitBox,
    UnsupportedTopology,
    WindowTooShort,
)
from .network import BranchSpec, Orientation, RiverNetwork, Topology
from .phaseplane import (
    MU_NODE_MAX,
    GridOptions,
    IntegrationOptions,
    PsiCurve,
    TrajectoryCurve,
    TrajectoryKind,
    _invert_phi,
    kpp_reaction,
    psi_curve,
    trace_special_trajectory,
)

CRITICAL_SPEED = 2.0        # advection speed separating the regimes
THRESHOLD_XTOL = 1e-10      # refinement tolerance for alpha thresholds
ON_CURVE_ATOL = 1e-7        # junction slope within this of a cap counts as "on the curve"
TAIL_FLOOR = 1e-8           # profiles are sampled until within this of their limit


# -- regime classification -------------------------------------------------

@dataclass(frozen=True)
class CaseTag:
    configuration: Topology
    regime: str  # "TB-i..iii", "UUL-I..IV", "ULL-I..III"


def _ge2(beta: float) -> bool:
    # speeds exactly at the critical value 2 belong to the fast regime
    return beta >= CRITICAL_SPEED


def classify_case(network: RiverNetwork) -> CaseTag:
    """Parameter regime of the stationary problem, by comparing each branch
    speed against the critical speed 2 (ties go to the >= 2 side)."""
    topo = network.topology
    if topo is Topology.TWO_BRANCH:
        bu = network.uppers[0].beta
        bl = network.lowers[0].beta
        if not _ge2(bu):
            regime = "TB-i"
        elif _ge2(bl):
            regime = "TB-ii"
        else:
            regime = "TB-iii"
    elif topo is Topology.TWO_UP_ONE_DOWN:
        b1, b2 = (b.beta for b in network.uppers)
        bl = network.lowers[0].beta
        if not _ge2(b1) and not _ge2(b2):
            regime = "UUL-I"
        elif _ge2(b1) != _ge2(b2):
            regime = "UUL-IV"
        elif _ge2(bl):
            regime = "UUL-II"
        else:
            regime = "UUL-III"
    elif topo is Topology.ONE_UP_TWO_DOWN:
        bu = network.uppers[0].beta
        if not _ge2(bu):
            regime = "ULL-I"
        elif all(_ge2(b.beta) for b in network.lowers):
            regime = "ULL-II"
        else:
            regime = "ULL-III"
    else:
        raise UnsupportedTopology(
            "threshold analysis covers two- and three-branch stars only")
    return CaseTag(configuration=topo, regime=regime)


# -- curve cache -------------------------------------------------------------

_TRACE_OPTS = IntegrationOptions()
_GRID_OPTS = GridOptions()


@lru_cache(maxsize=128)
def _traced(kind: TrajectoryKind, mu: float) -> TrajectoryCurve:
    return trace_special_trajectory(kind, mu, _TRACE_OPTS)


@lru_cache(maxsize=128)
def _curve(kind: TrajectoryKind, mu: float) -> PsiCurve:
    return psi_curve(_traced(kind, mu), _GRID_OPTS)


def saddle_entry_kind(mu: float) -> TrajectoryKind:
    """Orbit entering the saddle inside the strip: GAMMA_PLUS for mu > 1/4,
    the origin-connecting H otherwise."""
    return TrajectoryKind.GAMMA_PLUS if mu > MU_NODE_MAX else TrajectoryKind.H

def entry_curve(branch: BranchSpec) -> PsiCurve:
    return _curve(saddle_entry_kind(branch.mu), branch.mu)


def fast_exit_curve(branch: BranchSpec) -> PsiCurve:
    if branch.mu > MU_NODE_MAX:
        raise InfeasibleAlpha(
            f"branch {branch.id}: no orbit decays to 0 with positive slope for beta < 2")
    return _curve(TrajectoryKind.GAMMA_STAR, branch.mu)


def descending_curve(branch: BranchSpec) -> PsiCurve:
    return _curve(TrajectoryKind.GAMMA_MINUS, branch.mu)


# -- thresholds ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ThresholdReport:
    case: CaseTag
    thresholds: dict[str, float]
    crossing_count: int
    existence_intervals: tuple[tuple[float, float, str], ...]


def _sign_scan(grid: np.ndarray, diff_fn) -> list[float]:
    """Roots of diff_fn on the grid: sign-change brackets refined by brentq."""
    values = diff_fn(grid)
    roots = []
    sign = np.sign(values)
    for i in range(len(grid) - 1):
        if sign[i] == 0.0:
            roots.append(float(grid[i]))
        elif sign[i] * sign[i + 1] < 0:
            roots.append(float(brentq(lambda a: float(diff_fn(np.asarray(a))),
                                      grid[i], grid[i + 1], xtol=THRESHOLD_XTOL)))
    if sign[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def _psi_on_trace(trace: TrajectoryCurve, phi: float) -> float:
    """Exact orbit height at phi, straight from the dense solution (no grid)."""
    x = _invert_phi(trace, np.asarray([phi]))
    return float(trace.sol(x[0])[1])


def _feasibility_margin(network: RiverNetwork, descending: BranchSpec | None):
    """Margin(alpha) = (upper-side slope capacity) - (lower-side requirement),
    in units of the total junction flux.  Stationary states with the given
    decreasing branch (None for all-increasing) exist exactly where it is
    >= 0; its sign changes are the thresholds.

    Returns (margin_on_grid, margin_exact): the first evaluates through the
    gridded curves, the second straight off the orbit traces, which reaches
    below the curve grid's lower edge (thresholds sink exponentially close
    to 0 when a branch speed approaches 2 from below).
    """
    def parts():
        lower, upper = [], []
        for b in network.lowers:
            lower.append((b.flux, saddle_entry_kind(b.mu), b.mu))
        for b in network.uppers:
            if descending is not None and b.id == descending.id:
                upper.append((b.flux, TrajectoryKind.GAMMA_MINUS, b.mu))
            else:
                if b.mu > MU_NODE_MAX:
                    raise InfeasibleAlpha(
                        f"branch {b.id}: no orbit decays to 0 with positive "
                        "slope for beta < 2")
                upper.append((b.flux, TrajectoryKind.GAMMA_STAR, b.mu))
        return lower, upper

    lower_kinds, upper_kinds = parts()
    lower_curves = [(f, _curve(kind, mu)) for f, kind, mu in lower_kinds]
    upper_curves = [(f, _curve(kind, mu)) for f, kind, mu in upper_kinds]
    total = sum(f for f, _ in lower_curves)

    def margin(alpha):
        up = sum(f * c(alpha) for f, c in upper_curves)
        low = sum(f * c(alpha) for f, c in lower_curves)
        return (up - low) / total

    def margin_exact(alpha: float) -> float:
        up = sum(f * _psi_on_trace(_traced(kind, mu), alpha)
                 for f, kind, mu in upper_kinds)
        low = sum(f * _psi_on_trace(_traced(kind, mu), alpha)
                  for f, kind, mu in lower_kinds)
        return (up - low) / total

    return margin, margin_exact


def compute_thresholds(network: RiverNetwork) -> ThresholdReport:
    """Critical junction values for the regimes that have them.

    Raises RegimeHasNoThreshold where no stationary state exists at any
    alpha (TB-i, UUL-I, ULL-I) or where states exist for every alpha with
    no onset to locate (TB-ii, ULL-II).
    """
    case = classify_case(network)
    regime = case.regime
    if regime in ("TB-i", "UUL-I", "ULL-I"):
        raise RegimeHasNoThreshold(f"{regime}: no stationary states at any junction value")
    if regime in ("TB-ii", "ULL-II"):
        raise RegimeHasNoThreshold(f"{regime}: stationary states exist for every junction value")

    grid = _GRID_OPTS
    phis = np.linspace(grid.delta, 1.0 - grid.delta, grid.n)
    phi_floor = 1.2e-8  # just above the manifold launch offset; every
    # special orbit trace covers phi down to here
    thresholds: dict[str, float] = {}
    intervals: list[tuple[float, float, str]] = []

    def onset(margins, what: str) -> tuple[float, int]:
        margin, margin_exact = margins
        roots = _sign_scan(phis, margin)
        if roots:
            return roots[0], len(roots)
        # feasible on the whole grid: the onset sits below the grid edge
        # (it sinks exponentially close to 0 as a speed approaches 2-)
        if margin(np.asarray(grid.delta)) > 0.0 and margin_exact(phi_floor) < 0.0:
            root = brentq(margin_exact, phi_floor, grid.delta, xtol=1e-14)
            return float(root), 1
        raise NoCrossingFound(
            f"{regime}: comparison curves for {what} never cross on "
            f"[{phi_floor:g}, {1 - grid.delta:g}], so the threshold this "
            "regime predicts is numerically unresolvable")

    if regime == "TB-iii":
        alpha0, count = onset(_feasibility_margin(network, None), "alpha0")
        thresholds["alpha0"] = alpha0
        intervals.append((alpha0, 1.0, "type-00"))
    elif regime == "UUL-III":
        alpha_star, count = onset(_feasibility_margin(network, None), "alpha_star")
        thresholds["alpha_star"] = alpha_star
        intervals.append((alpha_star, 1.0, "type-00"))
        for b in network.uppers:
            hat, _ = onset(_feasibility_margin(network, b), f"alpha_hat ({b.id})")
            thresholds[f"alpha_hat_{b.id}"] = hat
            intervals.append((hat, 1.0, f"type-01:{b.id}"))
    elif regime == "UUL-IV":
        slow = min(network.uppers, key=lambda b: b.beta)
        alpha_ss, count = onset(_feasibility_margin(network, slow), "alpha_star_star")
        thresholds["alpha_star_star"] = alpha_ss
        intervals.append((alpha_ss, 1.0, f"type-01:{slow.id}"))
    elif regime == "UUL-II":
        intervals.append((0.0, 1.0, "type-00"))
        count = 1
        for b in network.uppers:
            hat, n_hat = onset(_feasibility_margin(network, b), f"alpha_hat ({b.id})")
            thresholds[f"alpha_hat_{b.id}"] = hat
            intervals.append((hat, 1.0, f"type-01:{b.id}"))
            count = max(count, n_hat)
    elif regime == "ULL-III":
        alpha_star, count = onset(_feasibility_margin(network, None), "alpha_star")
        thresholds["alpha_star"] = alpha_star
        intervals.append((alpha_star, 1.0, "type-00"))
    else:  # pragma: no cover
        raise RegimeHasNoThreshold(regime)

    return ThresholdReport(case=case, thresholds=thresholds, crossing_count=count,
                           existence_intervals=tuple(intervals))


def existence_classification(network: RiverNetwork, alpha: float) -> str:
    """One of NoSolution / Unique / UniqueType01 / Continuum for the given
    junction value, straight from the regime's threshold structure."""
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    regime = classify_case(network).regime
    if regime in ("TB-i", "UUL-I", "ULL-I"):
        return "NoSolution"
    if regime in ("TB-ii", "ULL-II"):
        return "Unique"
    if regime == "UUL-II":
        return "Continuum"
    rep = compute_thresholds(network)
    if regime == "TB-iii":
        return "NoSolution" if alpha < rep.thresholds["alpha0"] else "Unique"
    if regime == "ULL-III":
        return "NoSolution" if alpha < rep.thresholds["alpha_star"] else "Unique"
    if regime == "UUL-III":
        a_star = rep.thresholds["alpha_star"]
        if alpha < a_star:
            return "NoSolution"
        if abs(alpha - a_star) <= 1e-9:
            return "Unique"
        return "Continuum"
    # UUL-IV
    a_ss = rep.thresholds["alpha_star_star"]
    return "NoSolution" if alpha < a_ss else "UniqueType01"


# -- profiles -----------------------------------------------------------------

class DecayKind(str, Enum):
    FAST = "fast"                    # exponent (beta + sqrt(beta^2-4))/2
    SLOW = "slow"                    # exponent (beta - sqrt(beta^2-4))/2
    SLOW_CRITICAL = "slow_critical"  # beta = 2: |x| e^x profile


@dataclass(frozen=True)
class DecayClass:
    kind: DecayKind
    fitted_exponent: float
    fit_window: tuple[float, float]


def decay_exponents(beta: float) -> tuple[float, float]:
    """Closed-form upstream decay exponents (k_plus, k_minus); equal at beta=2."""
    if beta < CRITICAL_SPEED:
        raise ValueError("upstream decay exponents require beta >= 2")
    root = math.sqrt(beta * beta - 4.0)
    return (beta + root) / 2.0, (beta - root) / 2.0


class BranchProfile:
    """Sampled stationary profile of one branch, evaluable at any position.

    Inside the integrated range the value comes from the dense orbit
    solution (in scaled coordinates y = beta * x); beyond it the profile
    continues with its exact local exponential tail toward ``limit``.
    """

    def __init__(self, branch: BranchSpec, x: np.ndarray, values: np.ndarray,
                 limit: float, sol=None, y_junction: float = 0.0,
                 y_edge: float = 0.0, tail_rate: float = 0.0, evaluator=None):
        self.branch_id = branch.id
        self.orientation = branch.orientation
        self.beta = branch.beta
        self.x = x
        self.values = values
        self.limit = limit
        self._sol = sol
        self._y_junction = y_junction
        self._y_edge = y_edge
        self._tail_rate = tail_rate
        self._evaluator = evaluator  # direct physical-coordinate override

    @property
    def junction_value(self) -> float:
        j = 0 if self.orientation is Orientation.LOWER else -1
        return float(self.values[j])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self._evaluator is not None:
            return self._evaluator(x)
        if self._sol is None:  # constant state
            return np.full_like(x, self.limit)
        y = self._y_junction + self.beta * x
        lo = min(self._y_junction, self._y_edge)
        hi = max(self._y_junction, self._y_edge)
        out = np.empty_like(y)
        inside = (y >= lo) & (y <= hi)
        if inside.any():
            out[inside] = self._sol(y[inside])[0]
        beyond = ~inside
        if beyond.any():
            edge_val = float(self._sol(self._y_edge)[0])
            out[beyond] = self.limit + (edge_val - self.limit) * np.exp(
                self._tail_rate * (y[beyond] - self._y_edge))
        return out


@dataclass(eq=False)
class StationaryProfile:
    network: RiverNetwork
    alpha: float
    branches: dict[str, BranchProfile]
    scaled_slopes: dict[str, float]
    flux_residual: float
    solution_type: str
    decay: dict[str, DecayClass | None] = field(default_factory=dict)


@dataclass(frozen=True)
class _Arc:
    """Scaled-coordinate orbit arc backing one branch profile."""
    sol: object
    y_junction: float
    y_edge: float
    psi_junction: float
    limit: float


def _arc_from_trace(trace: TrajectoryCurve, alpha: float) -> _Arc:
    """Cut a traced special orbit at phi = alpha.  The branch occupies the
    part of the orbit running from the junction back toward the launch
    equilibrium (parameter 0), which is always its far-field limit here:
    the saddle for entry/descending orbits, the origin for the fast exit."""
    y_j = float(_invert_phi(trace, np.asarray([alpha]))[0])
    y_edge = 0.0
    phi_e = float(trace.sol(y_edge)[0])
    limit = 1.0 if abs(phi_e - 1.0) < 0.5 else 0.0
    psi_j = float(trace.sol(y_j)[1])
    return _Arc(sol=trace.sol, y_junction=y_j, y_edge=y_edge, psi_junction=psi_j, limit=limit)


def _arc_fresh_to_origin(mu: float, alpha: float, psi0: float,
                         opts: IntegrationOptions = _TRACE_OPTS) -> _Arc:
    """Integrate backward from the junction point (alpha, psi0) toward the
    origin (the numerically stable direction for a generic upstream tail)."""
    lam_minus = (1.0 - math.sqrt(max(1.0 - 4.0 * mu, 0.0))) / 2.0
    span = 80.0 + abs(math.log(TAIL_FLOOR / max(alpha, 1e-6))) / max(lam_minus, 1e-3)

    def rhs(x, y):
        return (y[1], y[1] - mu * kpp_reaction(y[0]))

    def tail(x, y):
        return y[0] - 0.1 * TAIL_FLOOR
    tail.terminal = True

    def escaped(x, y):
        return y[0] - (1.0 + 1e-9)
    escaped.terminal = True

    sol = solve_ivp(rhs, (0.0, -span), (alpha, psi0), method="RK45", rtol=opts.rtol,
                    atol=opts.atol, dense_output=True, events=[tail, escaped])
    if sol.t_events[1].size or not sol.success:
        raise TrajectoryEscapedUnitBox(
            f"upstream orbit from (alpha={alpha}, psi={psi0}) left the unit box")
    if not sol.t_events[0].size:
        raise TrajectoryEscapedUnitBox(
            f"upstream orbit from (alpha={alpha}, psi={psi0}) failed to reach 0 "
            f"within span {span}")
    return _Arc(sol=sol.sol, y_junction=0.0, y_edge=float(sol.t[-1]),
                psi_junction=psi0, limit=0.0)


def _branch_profile(branch: BranchSpec, arc: _Arc, alpha: float) -> BranchProfile:
    h = min(0.01, 1.0 / (4.0 * branch.beta))
    edge_val, edge_psi = (float(v) for v in arc.sol(arc.y_edge))
    gap = edge_val - arc.limit
    rate = edge_psi / gap if gap != 0.0 else 1.0

    # how much farther past the dense edge until within TAIL_FLOOR of the limit
    extra = 0.0
    if abs(gap) > TAIL_FLOOR and rate != 0.0:
        extra = abs(math.log(TAIL_FLOOR / abs(gap)) / rate)
    y_extent = abs(arc.y_edge - arc.y_junction) + extra
    n = max(int(math.ceil(y_extent / branch.beta / h)), 8)
    sign = 1.0 if branch.orientation is Orientation.LOWER else -1.0
    x = sign * h * np.arange(n + 1)
    if branch.orientation is Orientation.UPPER:
        x = x[::-1]
    profile = BranchProfile(branch, x, np.empty_like(x), limit=arc.limit, sol=arc.sol,
                            y_junction=arc.y_junction, y_edge=arc.y_edge, tail_rate=rate)
    profile.values = profile(x)
    return profile


def _allocate_upper_slopes(network: RiverNetwork, alpha: float, requirement: float,
                           descending: BranchSpec | None,
                           slope_split: dict[str, float] | None) -> dict[str, float]:
    """Scaled junction slopes psi_i for the upper branches, satisfying
    sum(flux_i * psi_i) == requirement with each increasing branch capped by
    its fast origin orbit.  The default split equalizes physical slopes
    beta_i * psi_i, clamped into the feasible box."""
    free: list[BranchSpec] = []
    slopes: dict[str, float] = {}
    remaining = requirement
    for b in network.uppers:
        if descending is not None and b.id == descending.id:
            pinned = float(descending_curve(b)(alpha))
            slopes[b.id] = pinned
            remaining -= b.flux * pinned
        else:
            free.append(b)

    caps = {}
    for b in free:
        caps[b.id] = float(fast_exit_curve(b)(alpha))

    cap_total = sum(b.flux * caps[b.id] for b in free)
    if remaining <= 0.0:
        raise InfeasibleAlpha(
            f"alpha={alpha}: junction balance needs a nonpositive upstream slope budget")
    if remaining > cap_total + ON_CURVE_ATOL * max(1.0, cap_total):
        raise InfeasibleAlpha(
            f"alpha={alpha} lies below the existence threshold "
            f"(needs {remaining:.6g}, upstream orbits supply at most {cap_total:.6g})")

    if slope_split is not None:
        for b in free:
            psi = float(slope_split[b.id])
            if not (0.0 < psi <= caps[b.id] + ON_CURVE_ATOL):
                raise InfeasibleAlpha(
                    f"requested slope {psi} for {b.id} outside (0, {caps[b.id]:.6g}]")
            slopes[b.id] = psi
        total = sum(b.flux * slopes[b.id] for b in free)
        if abs(total - remaining) > 1e-9 * max(1.0, abs(remaining)):
            raise InfeasibleAlpha(
                f"requested slope split misses the junction balance by {total - remaining:.3g}")
        return slopes

    if remaining >= cap_total - ON_CURVE_ATOL * max(1.0, cap_total):
        for b in free:  # threshold case: every free branch rides its fast orbit
            slopes[b.id] = caps[b.id]
        return slopes

    # equalize physical slopes, then clamp to caps and rebalance
    active = list(free)
    budget = remaining
    while active:
        s = budget / sum(b.flux / b.beta for b in active)
        over = [b for b in active if s / b.beta > caps[b.id]]
        if not over:
            for b in active:
                slopes[b.id] = s / b.beta
            break
        for b in over:
            slopes[b.id] = caps[b.id]
            budget -= b.flux * caps[b.id]
            active.remove(b)
    return slopes


def stationary_profile(network: RiverNetwork, alpha: float,
                       type_selector: str | None = None,
                       slope_split: dict[str, float] | None = None) -> StationaryProfile:
    """Stationary state with junction value alpha, sampled per branch in
    physical coordinates.

    ``type_selector``: None picks the regime's default (all branches
    monotone toward their limits where possible); "type-00" forces the
    all-increasing state; "type-01:<branch_id>" makes that upper branch
    decrease from 1 upstream.  ``slope_split`` optionally fixes the scaled
    junction slopes of the free upper branches in continuum regimes.
    """
    if network.topology is Topology.GENERAL_STAR:
        raise UnsupportedTopology("stationary analysis covers 2- and 3-branch stars")
    if alpha in (0.0, 1.0):
        value = float(alpha)
        branches = {}
        for b in network.branches:
            n = max(int(10.0 / min(0.01, 1.0 / (4 * b.beta))), 8)
            sign = 1.0 if b.orientation is Orientation.LOWER else -1.0
            x = sign * min(0.01, 1.0 / (4 * b.beta)) * np.arange(n + 1)
            if b.orientation is Orientation.UPPER:
                x = x[::-1]
            branches[b.id] = BranchProfile(b, x, np.full_like(x, value), limit=value)
        return StationaryProfile(network=network, alpha=alpha, branches=branches,
                                 scaled_slopes={b.id: 0.0 for b in network.branches},
                                 flux_residual=0.0, solution_type="constant")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in [0, 1]")

    descending = None
    if type_selector is not None and type_selector.startswith("type-01"):
        _, _, bid = type_selector.partition(":")
        cands = [b for b in network.uppers if b.beta < CRITICAL_SPEED]
        if bid:
            descending = network.branch(bid)
        elif len(cands) == 1:
            descending = cands[0]
        else:
            raise ValueError("type-01 needs a branch id, e.g. 'type-01:U2'")
        if descending.orientation is not Orientation.UPPER:
            raise ValueError("only upper branches can decrease toward 1 upstream")
    elif type_selector is None:
        # a sub-critical upper branch cannot decay to 0: it must be the
        # decreasing one (mixed-speed three-branch regime)
        slow = [b for b in network.uppers if b.beta < CRITICAL_SPEED]
        if slow and any(_ge2(b.beta) for b in network.uppers):
            if len(slow) > 1:
                raise InfeasibleAlpha("no stationary states: two sub-critical upper branches")
            descending = slow[0]
    elif type_selector != "type-00":
        raise ValueError(f"unknown type selector {type_selector!r}")

    # lower branches are pinned to their saddle-entry orbits
    requirement = 0.0
    lower_pinned: dict[str, float] = {}
    for b in network.lowers:
        psi = float(entry_curve(b)(alpha))
        lower_pinned[b.id] = psi
        requirement += b.flux * psi

    slopes = _allocate_upper_slopes(network, alpha, requirement, descending, slope_split)
    slopes.update(lower_pinned)

    branches: dict[str, BranchProfile] = {}
    for b in network.lowers:
        arc = _arc_from_trace(_traced(saddle_entry_kind(b.mu), b.mu), alpha)
        branches[b.id] = _branch_profile(b, arc, alpha)
    for b in network.uppers:
        psi = slopes[b.id]
        if descending is not None and b.id == descending.id:
            arc = _arc_from_trace(_traced(TrajectoryKind.GAMMA_MINUS, b.mu), alpha)
        else:
            cap = float(fast_exit_curve(b)(alpha))
            if psi >= cap - ON_CURVE_ATOL * max(1.0, cap):
                arc = _arc_from_trace(_traced(TrajectoryKind.GAMMA_STAR, b.mu), alpha)
            else:
                arc = _arc_fresh_to_origin(b.mu, alpha, psi)
        branches[b.id] = _branch_profile(b, arc, alpha)
        slopes[b.id] = arc.psi_junction if abs(arc.psi_junction - psi) < 1e-6 else psi

    flux_up = sum(b.flux * slopes[b.id] for b in network.uppers)
    flux_low = sum(b.flux * slopes[b.id] for b in network.lowers)
    sol_type = "type-00" if descending is None else f"type-01:{descending.id}"
    profile = StationaryProfile(network=network, alpha=alpha, branches=branches,
                                scaled_slopes=slopes,
                                flux_residual=abs(flux_up - flux_low),
                                solution_type=sol_type)
    for b in network.uppers:
        if descending is not None and b.id == descending.id:
            profile.decay[b.id] = None
            continue
        try:
            profile.decay[b.id] = decay_rate(profile, b.id)
        except (WindowTooShort, AmbiguousFit):
            profile.decay[b.id] = None
    return profile


def decay_rate(profile: StationaryProfile, branch_id: str) -> DecayClass:
    """Upstream decay class of an upper branch vanishing at -infinity.

    Fits the log-slope of the sampled tail; beta > 2 profiles are classified
    fast/slow by the nearer closed-form exponent, while beta = 2 separates
    the |x| e^x branch from the pure e^x one by the log|x| trend of
    log(value) - x.
    """
    bp = profile.branches[branch_id]
    branch = profile.network.branch(branch_id)
    if branch.orientation is not Orientation.UPPER:
        raise ValueError("decay classification applies to upper branches")
    if bp.limit != 0.0:
        raise ValueError(f"branch {branch_id} does not vanish upstream")

    x, v = bp.x, bp.values
    lo_v, hi_v = 10.0 * TAIL_FLOOR, min(1e-3, profile.alpha / 10.0)
    sel = (v > lo_v) & (v < hi_v)
    if sel.sum() < 8 or math.log(v[sel].max() / v[sel].min()) < 3.0:
        raise WindowTooShort(
            f"branch {branch_id}: tail window spans fewer than 3 e-foldings")
    xs, vs = x[sel], v[sel]
    window = (float(xs.min()), float(xs.max()))
    beta = branch.beta

    if beta == CRITICAL_SPEED:
        # distinguish c|x|e^x from c e^x by the log|x| trend of log v - x;
        # the asymptote carries strong 1/|x| corrections, so fit them out
        g = np.log(vs) - xs
        basis = np.column_stack([np.log(np.abs(xs)), np.ones_like(xs), 1.0 / np.abs(xs)])
        trend = float(np.linalg.lstsq(basis, g, rcond=None)[0][0])
        if abs(trend - 1.0) < 0.25:
            exp_basis = np.column_stack([xs, np.ones_like(xs), 1.0 / np.abs(xs)])
            fitted = float(np.linalg.lstsq(exp_basis, np.log(vs / np.abs(xs)),
                                           rcond=None)[0][0])
            return DecayClass(DecayKind.SLOW_CRITICAL, fitted, window)
        if abs(trend) < 0.25:
            fitted = float(np.polyfit(xs, np.log(vs), 1)[0])
            return DecayClass(DecayKind.FAST, fitted, window)
        raise AmbiguousFit(f"branch {branch_id}: log|x| trend {trend:.3f} matches neither form")

    fitted = float(np.polyfit(xs, np.log(vs), 1)[0])
    k_plus, k_minus = decay_exponents(beta)
    rel_fast = abs(fitted - k_plus) / k_plus
    rel_slow = abs(fitted - k_minus) / k_minus
    if min(rel_fast, rel_slow) > 0.10:
        raise AmbiguousFit(
            f"branch {branch_id}: fitted exponent {fitted:.4f} is over 10% from "
            f"both {k_plus:.4f} and {k_minus:.4f}")
    kind = DecayKind.FAST if rel_fast <= rel_slow else DecayKind.SLOW
    return DecayClass(kind, fitted, window)


# -- relaxation oracle ---------------------------------------------------------

@dataclass(frozen=True)
class RelaxationOptions:
    length: float = 200.0
    spacing: float = 0.02    # threshold junction values carry O(h^2) error
    dt: float = 0.01
    tol: float = 1e-9        # stop when sup |w_new - w| / dt falls below
    max_time: float = 4000.0
    check_every: int = 25    # steps between convergence checks


def default_relaxation_options(network: RiverNetwork) -> RelaxationOptions:
    """At the critical speed the linearized relaxation gap closes like
    (pi/L)^2 while the truncation bias stays ~e^{-2L}: a short, finer domain
    is the only way to converge in finite time, and costs nothing in
    accuracy (the grid bias of the junction value is what needs the finer
    spacing there)."""
    if any(b.beta == CRITICAL_SPEED for b in network.uppers):
        return RelaxationOptions(length=50.0, spacing=0.01, max_time=40000.0)
    return RelaxationOptions()


def supersolution_init(network: RiverNetwork, amplitude: float = 5.0):
    """Initial data lying above every stationary state: constant M on lower
    branches (and on sub-critical uppers), M * e^{k_plus x} on fast uppers.
    Relaxing from it lands on the maximal stationary state compatible with
    fast upstream decay."""
    fns = {}
    for b in network.branches:
        if b.orientation is Orientation.UPPER and _ge2(b.beta):
            k_plus, _ = decay_exponents(b.beta)
            fns[b.id] = (lambda k: (lambda x: amplitude * np.exp(k * np.asarray(x))))(k_plus)
        else:
            fns[b.id] = lambda x: np.full_like(np.asarray(x, dtype=float), amplitude)
    return fns


def relaxation_oracle(network: RiverNetwork, init,
                      opts: RelaxationOptions | None = None) -> StationaryProfile:
    """Run the time stepper until the state stops moving; an independent
    check on the phase-plane constructions.

    ``init`` is either a dict of per-branch callables or an existing
    SimulationState.  Raises NotConverged when max_time is hit first.
    """
    from . import simulator

    if opts is None:
        opts = default_relaxation_options(network)

    if isinstance(init, simulator.SimulationState):
        state = init
    else:
        grid = simulator.GridSpec.uniform(network, length=opts.length, spacing=opts.spacing,
                                          far_bc=simulator.FarBC.MIXED)
        state = simulator.discretize(network, grid, init, clip_negative=False)
        if grid.far_bc in (simulator.FarBC.MIXED, simulator.FarBC.DIRICHLET0):
            fields = []
            for b, f in zip(network.branches, state.fields):
                f = f.copy()
                if b.orientation is Orientation.UPPER:
                    f[0] = 0.0  # absorbing upstream wall
                fields.append(f)
            state = simulator.SimulationState(
                time=state.time, junction_value=state.junction_value,
                fields=tuple(fields), grid=grid, network=network, bound=state.bound)

    stepper = simulator.Stepper(network, state.grid, opts.dt)
    rate = math.inf
    while state.time < opts.max_time:
        for _ in range(opts.check_every):
            state = stepper.step(state)
        probe = stepper.step(state)  # single-step motion, the honest rate
        rate = max(float(np.max(np.abs(fp - fs)))
                   for fp, fs in zip(probe.fields, state.fields)) / opts.dt
        state = probe
        if rate < opts.tol:
            break
    else:
        raise NotConverged(
            f"relaxation still moving at rate {rate:.3e} after t={opts.max_time}")

    branches = {}
    for n, (b, fld) in enumerate(zip(network.branches, state.fields)):
        xs = state.grid.positions(network, n)
        limit = float(fld[0]) if b.orientation is Orientation.UPPER else float(fld[-1])
        evaluator = _sampled_evaluator(xs, fld)
        branches[b.id] = BranchProfile(b, xs, fld.copy(), limit=float(round(limit)),
                                       evaluator=evaluator)

    slopes = {}
    for n, (b, fld) in enumerate(zip(network.branches, state.fields)):
        h = state.grid.spacings[n]
        if b.orientation is Orientation.LOWER:
            d = (-3.0 * fld[0] + 4.0 * fld[1] - fld[2]) / (2.0 * h)
        else:
            d = (3.0 * fld[-1] - 4.0 * fld[-2] + fld[-3]) / (2.0 * h)
        slopes[b.id] = d / b.beta
    up = sum(b.flux * slopes[b.id] for b in network.uppers)
    low = sum(b.flux * slopes[b.id] for b in network.lowers)

    profile = StationaryProfile(network=network, alpha=float(state.junction_value),
                                branches=branches, scaled_slopes=slopes,
                                flux_residual=abs(up - low),
                                solution_type="relaxation-limit")
    for b in network.uppers:
        try:
            profile.decay[b.id] = decay_rate(profile, b.id)
        except (WindowTooShort, AmbiguousFit, ValueError):
            profile.decay[b.id] = None
    return profile


def _sampled_evaluator(x: np.ndarray, values: np.ndarray):
    """Linear interpolation over physical samples (clamped beyond the ends)."""
    order = np.argsort(x)
    xs, vs = x[order], values[order]

    def evaluate(xq):
        return np.interp(np.asarray(xq, dtype=float), xs, vs)

    return evaluate
