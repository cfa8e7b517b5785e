import math

import numpy as np
import pytest

from riverkpp.errors import InvalidKindForMu
from riverkpp.phaseplane import (
    GridOptions,
    IntegrationOptions,
    OriginType,
    PhasePoint,
    TrajectoryKind,
    equilibrium_eigen,
    kpp_reaction,
    max_ode_residual,
    origin_tangency_slope,
    psi_curve,
    richardson_launch_gap,
    trace_special_trajectory,
    vector_field,
)

GS, H, GP, GM = (TrajectoryKind.GAMMA_STAR, TrajectoryKind.H,
                 TrajectoryKind.GAMMA_PLUS, TrajectoryKind.GAMMA_MINUS)


def test_vector_field_values():
    assert vector_field(PhasePoint(0.5, 0.25), 1.0) == pytest.approx((0.25, 0.0))
    assert vector_field(PhasePoint(0.0, 0.0), 0.3) == (0.0, 0.0)
    assert vector_field(PhasePoint(1.0, 0.0), 7.0) == (0.0, 0.0)


def test_equilibrium_eigen_degenerate():
    rep = equilibrium_eigen(0.25)
    assert rep.origin_type is OriginType.DEGENERATE_NODE
    assert rep.lambda0_plus == pytest.approx(0.5)
    assert rep.lambda0_minus == pytest.approx(0.5)


def test_equilibrium_eigen_spiral():
    rep = equilibrium_eigen(2.0)
    assert rep.origin_type is OriginType.SPIRAL
    assert rep.lambda1_plus == pytest.approx(2.0)
    assert rep.lambda1_minus == pytest.approx(-1.0)
    assert rep.eigvec0_plus is None
    assert rep.lambda0_plus.imag != 0.0


def test_equilibrium_eigen_node():
    rep = equilibrium_eigen(1.0 / 9.0)
    lam_p = (1 + math.sqrt(5) / 3) / 2
    assert rep.origin_type is OriginType.NODE
    assert rep.lambda0_plus.real == pytest.approx(lam_p, abs=1e-12)
    assert rep.lambda0_minus.real == pytest.approx(1 - lam_p, abs=1e-12)
    # eigenvectors are (1, lambda) normalized
    v = rep.eigvec1_plus
    assert v[1] / v[0] == pytest.approx(rep.lambda1_plus)


def test_saddle_always_saddle():
    for mu in (0.01, 0.25, 1.0, 5.0):
        rep = equilibrium_eigen(mu)
        assert rep.lambda1_plus > 0 > rep.lambda1_minus


@pytest.mark.parametrize("mu", [1 / 9, 1 / 16, 0.25])
def test_tangency_gamma_star_and_h(mu):
    rep = equilibrium_eigen(mu)
    gs = trace_special_trajectory(GS, mu)
    h = trace_special_trajectory(H, mu)
    assert origin_tangency_slope(gs) == pytest.approx(rep.lambda0_plus.real, abs=1e-4)
    assert origin_tangency_slope(h) == pytest.approx(rep.lambda0_minus.real, abs=1e-4)


def test_star_and_h_invalid_in_spiral_regime():
    with pytest.raises(InvalidKindForMu):
        trace_special_trajectory(GS, 0.5)
    with pytest.raises(InvalidKindForMu):
        trace_special_trajectory(H, 0.26)


def test_gamma_plus_hits_psi_axis_in_spiral_regime():
    tr = trace_special_trajectory(GP, 1.0)
    assert tr.terminal == "phi=0"
    assert tr.psi[0] > 0.0  # positive psi-axis intercept


def test_h_and_star_converge_to_origin():
    h = trace_special_trajectory(H, 1 / 9)
    assert math.hypot(h.phi[0], h.psi[0]) < 1e-6
    gs = trace_special_trajectory(GS, 1 / 9)
    assert math.hypot(gs.phi[0], gs.psi[0]) < 1e-6


@pytest.mark.parametrize("kind,mu", [(GS, 1 / 9), (H, 1 / 9), (GP, 1.0), (GM, 1 / 9)])
def test_ode_residual_along_trace(kind, mu):
    tr = trace_special_trajectory(kind, mu)
    assert max_ode_residual(tr) < 10 * 1e-9


def test_sign_conventions_inside_strip():
    gm = trace_special_trajectory(GM, 1 / 9)
    inside = (gm.phi > 0) & (gm.phi < 1)
    assert np.all(gm.psi[inside] < 0)
    for kind in (GS, H):
        tr = trace_special_trajectory(kind, 1 / 9)
        inside = (tr.phi > 0) & (tr.phi < 1)
        assert np.all(tr.psi[inside] > 0)


def test_psi_curve_gamma_minus_saddle_linearization():
    # near phi=1 the descending orbit follows the unstable eigenline
    mu = 1 / 9
    c = psi_curve(trace_special_trajectory(GM, mu))
    lam1p = equilibrium_eigen(mu).lambda1_plus
    val = float(c(0.999))
    assert val < 0
    assert val == pytest.approx(lam1p * (0.999 - 1.0), rel=5e-4)


def test_psi_curve_star_tangent_line_at_quarter():
    c = psi_curve(trace_special_trajectory(GS, 0.25))
    assert float(c(1e-3)) == pytest.approx(0.5e-3, rel=2e-2)


@pytest.mark.parametrize("kind,mu", [(GS, 1 / 9), (H, 1 / 9), (H, 0.25),
                                     (GP, 1.0), (GP, 4.0), (GM, 1.0)])
def test_interpolant_satisfies_defining_ode(kind, mu):
    c = psi_curve(trace_special_trajectory(kind, mu))
    g = c.grid[1:-1]
    resid = np.abs(c.derivative(g) - (1.0 - mu * kpp_reaction(g) / c(g)))
    assert float(np.max(resid)) < 1e-6


def test_slope_comparison_at_crossings():
    # where a higher-mu curve crosses a lower-mu one (both positive), the
    # higher-mu slope is strictly smaller: d psi/d phi = 1 - mu f/psi
    mu1, mu2 = 1.0, 1 / 9
    c1 = psi_curve(trace_special_trajectory(GP, mu1))
    c2 = psi_curve(trace_special_trajectory(GS, mu2))
    diff = c1.values - c2.values
    sign_changes = np.nonzero(np.diff(np.sign(diff)))[0]
    assert len(sign_changes) == 1
    i = sign_changes[0]
    phi0 = c1.grid[i]
    assert float(c1.derivative(phi0)) < float(c2.derivative(phi0))


def test_self_convergence_under_tolerance_halving():
    mu = 1 / 9
    tight = IntegrationOptions(rtol=5e-11, atol=5e-14)
    c1 = psi_curve(trace_special_trajectory(GS, mu))
    c2 = psi_curve(trace_special_trajectory(GS, mu, tight))
    assert float(np.max(np.abs(c1.values - c2.values))) < 10 * 5e-11


@pytest.mark.parametrize("kind,mu", [(GS, 1 / 9), (H, 0.25), (GP, 1.0)])
def test_richardson_launch_gap(kind, mu):
    assert richardson_launch_gap(kind, mu) < 1e-6


def test_launch_description_recorded():
    tr = trace_special_trajectory(GS, 1 / 9)
    assert "lambda0_plus" in tr.launch
    assert tr.kind is GS and tr.mu == pytest.approx(1 / 9)


def test_psi_curve_grid_shape():
    c = psi_curve(trace_special_trajectory(H, 1 / 9), GridOptions(n=512))
    assert len(c.grid) == 512
    assert c.grid[0] == pytest.approx(1e-4)
    assert c.grid[-1] == pytest.approx(1 - 1e-4)
    with pytest.raises(ValueError):
        c(2.0)
