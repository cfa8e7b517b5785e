"""Phase-plane analysis of the scaled stationary KPP equation.

The scaled stationary equation -phi'' + phi' = mu*(phi - phi^2), with
mu = 1/beta^2, becomes the planar system

    phi' = psi,
    psi' = psi - mu * f(phi),        f(phi) = phi - phi^2,

whose orbits in the strip 0 <= phi <= 1 organize every stationary state of
the network problems.  (0, 0) and (1, 0) are the only equilibria; (1, 0) is
always a saddle, while the origin is an unstable spiral for mu > 1/4 and an
unstable node for mu <= 1/4.

Four special orbits matter downstream:

* ``GAMMA_PLUS``  -- the piece of the stable manifold of (1, 0) with psi > 0.
  For mu > 1/4 it crosses the positive psi-axis at finite parameter; for
  mu <= 1/4 it connects to the origin (and then equals ``H``).
* ``GAMMA_MINUS`` -- the piece of the unstable manifold of (1, 0) with
  psi < 0, reaching the negative psi-axis at finite parameter.
* ``GAMMA_STAR``  -- only for mu <= 1/4: the unique orbit leaving the origin
  along the fast direction psi = lambda0_plus * phi, reaching phi = 1 at a
  positive height gamma*.
* ``H``           -- only for mu <= 1/4: the orbit entering (1, 0) that
  emanates from the origin along the slow direction psi = lambda0_minus*phi.

Each orbit, restricted to 0 < phi < 1, is a graph psi = Psi(phi) satisfying
dPsi/dphi = 1 - mu*f(phi)/Psi; :func:`psi_curve` resamples it on a uniform
phi-grid with a monotone (overshoot-free) cubic interpolant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import (
    IntegrationDiverged,
    InvalidKindForMu,
    NonMonotonePhi,
    StoppingConditionNotReached,
)

MU_NODE_MAX = 0.25  # origin is a node for mu <= 1/4, a spiral above


def kpp_reaction(phi):
    """Logistic growth f(phi) = phi - phi^2 (carrying capacity 1)."""
    return phi * (1.0 - phi)


@dataclass(frozen=True)
class PhasePoint:
    phi: float
    psi: float


def vector_field(point: PhasePoint, mu: float) -> tuple[float, float]:
    """Right-hand side (phi', psi') of the planar system at ``point``."""
    if not mu > 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    return (point.psi, point.psi - mu * kpp_reaction(point.phi))


class OriginType(str, Enum):
    SPIRAL = "spiral"                  # mu > 1/4
    DEGENERATE_NODE = "degenerate_node"  # mu == 1/4
    NODE = "node"                      # mu < 1/4


@dataclass(frozen=True)
class EquilibriumReport:
    """Eigen-structure of the two equilibria.

    Origin eigenvalues are complex for mu > 1/4; they are returned as complex
    numbers with zero imaginary part otherwise.  Eigenvectors (1, lambda),
    normalized to unit length, are only defined for real eigenvalues.
    """

    mu: float
    origin_type: OriginType
    lambda0_plus: complex
    lambda0_minus: complex
    lambda1_plus: float
    lambda1_minus: float
    eigvec0_plus: tuple[float, float] | None
    eigvec0_minus: tuple[float, float] | None
    eigvec1_plus: tuple[float, float]
    eigvec1_minus: tuple[float, float]


def _unit(v: tuple[float, float]) -> tuple[float, float]:
    n = math.hypot(*v)
    return (v[0] / n, v[1] / n)


def equilibrium_eigen(mu: float) -> EquilibriumReport:
    """Closed-form eigenvalues lambda0± = (1 ± sqrt(1-4mu))/2 at the origin
    and lambda1± = (1 ± sqrt(1+4mu))/2 at the saddle (1, 0)."""
    if not mu > 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    disc0 = 1.0 - 4.0 * mu
    root0 = complex(disc0) ** 0.5
    lam0p = (1.0 + root0) / 2.0
    lam0m = (1.0 - root0) / 2.0
    root1 = math.sqrt(1.0 + 4.0 * mu)
    lam1p = (1.0 + root1) / 2.0
    lam1m = (1.0 - root1) / 2.0
    if disc0 < 0.0:
        origin = OriginType.SPIRAL
        v0p = v0m = None
    else:
        origin = OriginType.DEGENERATE_NODE if disc0 == 0.0 else OriginType.NODE
        v0p = _unit((1.0, lam0p.real))
        v0m = _unit((1.0, lam0m.real))
    return EquilibriumReport(
        mu=mu,
        origin_type=origin,
        lambda0_plus=lam0p,
        lambda0_minus=lam0m,
        lambda1_plus=lam1p,
        lambda1_minus=lam1m,
        eigvec0_plus=v0p,
        eigvec0_minus=v0m,
        eigvec1_plus=_unit((1.0, lam1p)),
        eigvec1_minus=_unit((1.0, lam1m)),
    )


class TrajectoryKind(str, Enum):
    GAMMA_PLUS = "gamma-plus"
    GAMMA_MINUS = "gamma-minus"
    GAMMA_STAR = "gamma-star"
    H = "h"


@dataclass(frozen=True)
class IntegrationOptions:
    """Launch offset, error control and stop conditions for orbit tracing.

    atol sits well below the launch offset: orbit tails carry values around
    1e-8 where a 1e-10 absolute tolerance would leave percent-level relative
    noise, too coarse for tangency and decay-rate fits.
    """

    eps: float = 1e-8          # offset along the unit eigenvector
    rtol: float = 1e-10
    atol: float = 1e-13
    origin_tol: float = 1e-9   # declare convergence to (0,0) below this norm
    psi_guard: float = 5.0     # |psi| beyond this means the orbit escaped
    max_span: float | None = None  # budget for |x|; derived from mu if None


@dataclass(frozen=True)
class TrajectoryCurve:
    """A traced special orbit: samples (x_k, phi_k, psi_k) plus dense output.

    ``x`` is the scaled arclength parameter of the planar system (increasing
    along the flow); samples are ordered by increasing x regardless of the
    integration direction.  ``sol`` is the scipy dense solution over
    [x.min(), x.max()].
    """

    kind: TrajectoryKind
    mu: float
    x: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    launch: str
    terminal: str  # one of "phi=0", "phi=1", "origin"
    sol: object = field(repr=False, compare=False, default=None)

    @property
    def points(self) -> list[tuple[float, PhasePoint]]:
        return [(float(x), PhasePoint(float(p), float(q)))
                for x, p, q in zip(self.x, self.phi, self.psi)]


def quadratic_manifold_coeff(mu: float, lam: float) -> float:
    """Second-order coefficient b of the invariant curve psi = lam*phi + b*phi^2
    at the origin, from matching dpsi/dphi = 1 - mu*f(phi)/psi."""
    return mu * lam / (2.0 * lam * lam - mu)


def _default_span(kind: TrajectoryKind, mu: float, opts: IntegrationOptions) -> float:
    # Budget = time to escape the launch equilibrium from offset eps, plus
    # time to approach the terminal equilibrium (origin approach happens at
    # the slow rate lambda0_minus), plus transit slack.
    rep = equilibrium_eigen(mu)
    slack = 80.0
    escape_saddle = abs(math.log(opts.eps)) / min(abs(rep.lambda1_minus), rep.lambda1_plus)
    if kind in (TrajectoryKind.H, TrajectoryKind.GAMMA_PLUS):
        span = slack + escape_saddle
        if mu <= MU_NODE_MAX:
            span += abs(math.log(opts.origin_tol)) / max(rep.lambda0_minus.real, 1e-6)
        return span
    if kind is TrajectoryKind.GAMMA_STAR:
        lam = rep.lambda0_plus.real
        return slack + (abs(math.log(opts.eps)) + 5.0) / max(lam, 1e-6)
    return slack + escape_saddle + 120.0


def trace_special_trajectory(kind: TrajectoryKind, mu: float,
                             opts: IntegrationOptions = IntegrationOptions()) -> TrajectoryCurve:
    """Trace one of the four special orbits.

    Launch points sit ``opts.eps`` away from the equilibrium along the unit
    eigenvector of the relevant direction (with a quadratic invariant-curve
    correction for launches at the origin, where the repeated eigenvalue at
    mu = 1/4 would otherwise make the launch ill-conditioned).  Saddle
    launches integrate away from (1, 0), which is the numerically stable
    direction for manifold tracing; the origin launch of GAMMA_STAR runs
    forward, which contracts relative error onto the fast direction.
    """
    if not mu > 0.0:
        raise ValueError(f"mu must be positive, got {mu}")
    kind = TrajectoryKind(kind)
    if kind in (TrajectoryKind.GAMMA_STAR, TrajectoryKind.H) and mu > MU_NODE_MAX:
        raise InvalidKindForMu(
            f"{kind.value} requires mu <= 1/4 (origin is a spiral at mu={mu})")

    rep = equilibrium_eigen(mu)
    eps = opts.eps

    if kind is TrajectoryKind.GAMMA_PLUS or kind is TrajectoryKind.H:
        # stable manifold of (1,0): enter the strip with phi < 1, psi > 0
        v = rep.eigvec1_minus
        y0 = np.array([1.0 - eps * v[0], -eps * v[1]])
        backward = True
        launch = f"(1,0) - {eps:g}*v(lambda1_minus)"
    elif kind is TrajectoryKind.GAMMA_MINUS:
        # unstable manifold of (1,0): phi < 1, psi < 0
        v = rep.eigvec1_plus
        y0 = np.array([1.0 - eps * v[0], -eps * v[1]])
        backward = False
        launch = f"(1,0) - {eps:g}*v(lambda1_plus)"
    else:  # GAMMA_STAR
        lam = rep.lambda0_plus.real
        b = quadratic_manifold_coeff(mu, lam)
        phi0 = eps / math.hypot(1.0, lam)
        y0 = np.array([phi0, lam * phi0 + b * phi0 * phi0])
        backward = False
        launch = f"(0,0) + {eps:g}*v(lambda0_plus) + quadratic correction"

    def rhs(x, y):
        return (y[1], y[1] - mu * kpp_reaction(y[0]))

    events = []

    def hit_phi0(x, y):
        return y[0]
    hit_phi0.terminal = True
    events.append(hit_phi0)

    def hit_phi1(x, y):
        return y[0] - 1.0
    hit_phi1.terminal = (kind is TrajectoryKind.GAMMA_STAR)
    events.append(hit_phi1)

    def near_origin(x, y):
        return math.hypot(y[0], y[1]) - opts.origin_tol
    near_origin.terminal = True
    events.append(near_origin)

    def psi_escape(x, y):
        return abs(y[1]) - opts.psi_guard
    psi_escape.terminal = True
    events.append(psi_escape)

    span = opts.max_span if opts.max_span is not None else _default_span(kind, mu, opts)
    x_end = -span if backward else span
    sol = solve_ivp(rhs, (0.0, x_end), y0, method="RK45", rtol=opts.rtol,
                    atol=opts.atol, dense_output=True, events=events)
    if not sol.success:
        raise IntegrationDiverged(f"integrator failed for {kind.value}, mu={mu}: {sol.message}")

    hit0, hit1, origin, escaped = (ev.size > 0 for ev in sol.t_events)
    if escaped:
        raise IntegrationDiverged(
            f"{kind.value} at mu={mu} left the psi guard window |psi|<{opts.psi_guard}")

    if kind is TrajectoryKind.GAMMA_STAR:
        if not hit1:
            raise StoppingConditionNotReached(
                f"gamma-star at mu={mu} did not reach phi=1 within span {span}")
        terminal = "phi=1"
    elif kind is TrajectoryKind.GAMMA_MINUS:
        if not hit0:
            raise StoppingConditionNotReached(
                f"gamma-minus at mu={mu} did not reach phi=0 within span {span}")
        terminal = "phi=0"
    elif kind is TrajectoryKind.H:
        if not origin:
            raise StoppingConditionNotReached(
                f"heteroclinic at mu={mu} did not converge to the origin within span {span}")
        terminal = "origin"
    else:  # GAMMA_PLUS: crosses the psi-axis (mu > 1/4) or joins the origin
        if origin:
            terminal = "origin"
        elif hit0:
            terminal = "phi=0"
        else:
            raise StoppingConditionNotReached(
                f"gamma-plus at mu={mu} reached neither phi=0 nor the origin within span {span}")

    xs, ys = sol.t, sol.y
    if backward:
        xs = xs[::-1]
        ys = ys[:, ::-1]
    return TrajectoryCurve(kind=kind, mu=mu, x=np.asarray(xs, dtype=float),
                           phi=np.asarray(ys[0], dtype=float),
                           psi=np.asarray(ys[1], dtype=float),
                           launch=launch, terminal=terminal, sol=sol.sol)


def max_ode_residual(curve: TrajectoryCurve, samples: int = 200) -> float:
    """Max norm of (phi' - psi, psi' - psi + mu*f(phi)) along the curve,
    with derivatives estimated from the dense output by a 5-point stencil."""
    x0, x1 = curve.x[0], curve.x[-1]
    xs = np.linspace(x0, x1, samples + 2)[1:-1]
    d = max(1e-6 * (x1 - x0), 1e-7)
    xs = xs[(xs - 2 * d > x0) & (xs + 2 * d < x1)]
    worst = 0.0
    for x in xs:
        f_m2, f_m1, f_0, f_p1, f_p2 = (curve.sol(x + k * d) for k in (-2, -1, 0, 1, 2))
        deriv = (f_m2 - 8 * f_m1 + 8 * f_p1 - f_p2) / (12 * d)
        res_phi = deriv[0] - f_0[1]
        res_psi = deriv[1] - (f_0[1] - curve.mu * kpp_reaction(f_0[0]))
        worst = max(worst, math.hypot(res_phi, res_psi))
    return worst


def _invert_phi(curve: TrajectoryCurve, phi_targets: np.ndarray) -> np.ndarray:
    """x-parameters where the (monotone-in-phi) curve passes phi_targets:
    vectorized Newton on the dense output, seeded from a refined table."""
    lo, hi = min(curve.x[0], curve.x[-1]), max(curve.x[0], curve.x[-1])
    n_fine = max(4096, 8 * len(curve.x))
    xf = np.linspace(lo, hi, n_fine)
    phif = curve.sol(xf)[0]
    if phif[0] > phif[-1]:
        phif, xf = phif[::-1], xf[::-1]
    # enforce strict monotonicity of the seed table (roundoff plateaus near ends)
    keep = np.concatenate(([True], np.diff(phif) > 0))
    x = np.interp(phi_targets, phif[keep], xf[keep])

    for _ in range(10):
        vals = curve.sol(x)
        f = vals[0] - phi_targets
        if np.max(np.abs(f)) < 1e-14:
            break
        dphi = vals[1]
        step = np.where(np.abs(dphi) > 1e-300, f / np.where(dphi == 0.0, 1.0, dphi), 0.0)
        x = np.clip(x - step, lo, hi)

    f = curve.sol(x)[0] - phi_targets
    bad = np.flatnonzero(np.abs(f) > 1e-9)
    for i in bad:  # occasional stragglers: bracketed fallback
        target = phi_targets[i]
        j = np.searchsorted(phif[keep], target)
        tbl_x = xf[keep]
        if j == 0 or j >= keep.sum():
            continue
        a, b = sorted((tbl_x[j - 1], tbl_x[j]))
        x[i] = brentq(lambda t: curve.sol(t)[0] - target, a, b, xtol=1e-14)
    return x


def origin_tangency_slope(curve: TrajectoryCurve) -> float:
    """Slope dpsi/dphi of the curve at the origin, extrapolated from its tail.

    For mu < 1/4 the ratio psi/phi approaches the eigenvalue with an O(phi)
    correction, so a linear fit in phi over the inner tail converges fast.
    At mu = 1/4 generic orbits close like (c1 + c2*x)*e^{x/2}, making
    psi/phi - 1/2 decay only like 1/x; there 1/(s - lam) is affine in the
    arclength parameter, and lam is recovered by zeroing its second
    difference across three tail stations.
    """
    phi_min = float(np.min(curve.phi[curve.phi > 0.0]))
    degenerate_generic = (curve.mu == MU_NODE_MAX and curve.kind is not TrajectoryKind.GAMMA_STAR)

    if not degenerate_generic:
        lo = max(3.0 * phi_min, 1e-5)
        hi = max(10.0 * lo, 1e-3)
        targets = np.geomspace(lo, hi, 40)
        x = _invert_phi(curve, targets)
        p, q = curve.sol(x)
        s = q / p
        return float(np.polyfit(p, s, 1)[1])

    # three stations equally spaced in x (the second difference of 1/(s-lam)
    # vanishes only on an equispaced stencil), deep enough that 1/(s-lam) is
    # affine in x to ~1e-4, inner one above the trace floor
    inner = max(4.0 * phi_min, 1e-9)
    outer = max(1e-6, 1e3 * inner)
    ends = _invert_phi(curve, np.array([outer, inner]))
    x = np.array([ends[0], 0.5 * (ends[0] + ends[1]), ends[1]])
    p, q = curve.sol(x)
    s = q / p
    s1, s2, s3 = s  # ordered outer -> inner, s increasing toward lam

    def second_diff(lam):
        return 1.0 / (s3 - lam) - 2.0 / (s2 - lam) + 1.0 / (s1 - lam)

    hi = max(s1, s2, s3)
    step = max(abs(s3 - s1), 1e-12)
    a, b = hi + 1e-14, hi + step
    fa = second_diff(a)
    for _ in range(80):
        if second_diff(b) * fa < 0:
            break
        b = hi + (b - hi) * 2.0
    else:
        return float(s3)  # correction unresolvable; tail value is the best estimate
    return float(brentq(second_diff, a, b, xtol=1e-14))


@dataclass(frozen=True)
class GridOptions:
    n: int = 2048
    delta: float = 1e-4   # grid covers [delta, 1 - delta]
    knot_factor: int = 64  # interpolant knots per grid interval / n ratio


@dataclass(frozen=True)
class PsiCurve:
    """psi = Psi(phi) for one special orbit, on a uniform phi-grid."""

    kind: TrajectoryKind
    mu: float
    grid: np.ndarray
    values: np.ndarray
    interpolant: PchipInterpolator = field(repr=False, compare=False)

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        lo, hi = self.grid[0], self.grid[-1]
        if np.any(phi < lo - 1e-12) or np.any(phi > hi + 1e-12):
            raise ValueError(f"Psi evaluable on [{lo}, {hi}] only")
        return self.interpolant(np.clip(phi, lo, hi))

    def derivative(self, phi):
        phi = np.asarray(phi, dtype=float)
        return self.interpolant(np.clip(phi, self.grid[0], self.grid[-1]), nu=1)

    def endpoint_values(self) -> tuple[float, float]:
        return float(self.values[0]), float(self.values[-1])


def psi_curve(traj: TrajectoryCurve, grid_opts: GridOptions = GridOptions()) -> PsiCurve:
    """Resample a traced orbit as a function psi = Psi(phi).

    The orbit arc with 0 < phi < 1 must be strictly monotone in phi (true for
    all four special kinds).  Grid values come from Newton inversion of the
    dense output, so they carry solver accuracy rather than resampling error.
    The stored interpolant is a monotone piecewise cubic, which cannot
    overshoot through zero near the origin where Psi -> 0; its knots sit
    ``knot_factor`` times denser than the grid because the shape-preserving
    limiter is only first-order accurate right at the hump of a non-monotone
    Psi (the grid itself stays at the coarser, uniform resolution).
    """
    if traj.sol is None:
        raise ValueError("trajectory carries no dense output")
    x0, x1 = float(traj.x[0]), float(traj.x[-1])
    n_fine = max(8 * (len(traj.x) - 1) + 1, 512)
    xf = np.linspace(x0, x1, n_fine)
    phis, psis = traj.sol(xf)

    inside = (phis > 0.0) & (phis < 1.0)
    if inside.sum() < 8:
        raise NonMonotonePhi("orbit arc has too few interior samples")
    dphi = np.diff(phis[inside])
    if not (np.all(dphi > 0) or np.all(dphi < 0)):
        raise NonMonotonePhi(
            f"{traj.kind.value} arc folds in phi (mu={traj.mu}); cannot form Psi(phi)")

    # launch offsets (~1e-8) and the origin stop tolerance sit far below
    # delta, so every special arc covers [delta, 1-delta] in phi
    delta, n = grid_opts.delta, grid_opts.n
    knots = np.linspace(delta, 1.0 - delta, grid_opts.knot_factor * (n - 1) + 1)
    x_knots = _invert_phi(traj, knots)
    knot_values = traj.sol(x_knots)[1]
    interp = PchipInterpolator(knots, knot_values)

    grid = np.linspace(delta, 1.0 - delta, n)
    values = knot_values[:: grid_opts.knot_factor].copy()
    return PsiCurve(kind=traj.kind, mu=traj.mu, grid=grid, values=values, interpolant=interp)


def richardson_launch_gap(kind: TrajectoryKind, mu: float,
                          opts: IntegrationOptions = IntegrationOptions(),
                          grid_opts: GridOptions = GridOptions()) -> float:
    """Max |Psi_eps - Psi_eps/2| over the grid: halving the launch offset must
    not move the curve, else the manifold launch is under-resolved."""
    from dataclasses import replace as _replace
    c1 = psi_curve(trace_special_trajectory(kind, mu, opts), grid_opts)
    c2 = psi_curve(trace_special_trajectory(kind, mu, _replace(opts, eps=opts.eps / 2)), grid_opts)
    return float(np.max(np.abs(c1.values - c2.values)))
