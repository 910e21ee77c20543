"""End-to-end acceptance gate.

Each test pins one verifiable property of the package with an explicit
tolerance and, where relevant, a runtime budget. Two behavioral claims that
the geometry itself contradicts are kept as strict expected failures, each
paired with a green companion test pinning the behavior that actually holds.
"""

import math
import time

import numpy as np
import pytest

from hopflens import (
    AnsatzConfig,
    GeodesicState,
    IntegratorSettings,
    build_fig2,
    build_fig4,
    build_fig6,
    build_fig7,
    focal_points,
    hopf_charge_whitehead,
    integrate,
    inv_metric_cartesian,
    lorentzian_check,
    metric_cartesian,
    normalize_velocity,
    principal_symbol,
    ricci_scalar,
    ricci_scalar_numeric,
    rhs_christoffel,
    rhs_closed_form,
    run,
    wavefront_measure,
)
from hopflens.geodesics import integrate_fixed
from hopflens.hopf_map import linking_number_refined

from conftest import random_chart_points


@pytest.fixture(scope="module")
def fig2_result():
    return run(build_fig2())


def test_metric_inverse_identity():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    pts = rng.uniform(-10.0, 10.0, (1000, 3))
    prod = np.einsum('...ij,...jk->...ik', metric_cartesian(pts),
                     inv_metric_cartesian(pts))
    dev = np.abs(prod - np.eye(3)).max()
    elapsed = time.perf_counter() - start
    assert dev < 1e-10
    assert elapsed < 1.0


def test_rhs_cross_validation():
    start = time.perf_counter()
    rng = np.random.default_rng(2025)
    pos = rng.uniform(-5.0, 5.0, (1000, 3))
    vel = normalize_velocity(pos, rng.normal(size=(1000, 3)))
    dev = np.abs(rhs_closed_form(pos, vel) - rhs_christoffel(pos, vel)).max()
    elapsed = time.perf_counter() - start
    assert dev < 1e-6
    assert elapsed < 10.0


def test_curvature_oracle():
    start = time.perf_counter()
    axis = np.linspace(-3.0, 3.0, 5)
    worst = 0.0
    for x in axis:
        for y in axis:
            for z in axis:
                p = np.array([x, y, z])
                exact = float(ricci_scalar(p))
                dev = abs(ricci_scalar_numeric(p) - exact) / max(1.0, abs(exact))
                worst = max(worst, dev)
    elapsed = time.perf_counter() - start
    assert worst < 1e-3
    assert elapsed < 5.0


def test_ricci_landmarks():
    assert ricci_scalar(np.zeros(3)) == -2.0
    for z in (0.5, -0.5):
        assert ricci_scalar(np.array([0.0, 0.0, z])) == pytest.approx(0.0,
                                                                      abs=1e-15)
    # grid + refinement search for the global maxima
    from scipy.optimize import minimize
    axis = np.linspace(-4, 4, 33)
    xs, ys, zs = np.meshgrid(axis, axis, axis, indexing="ij")
    pts = np.stack([xs, ys, zs], axis=-1).reshape(-1, 3)
    vals = ricci_scalar(pts)
    for sign in (1.0, -1.0):
        cands = pts[(vals > 1.5) & (np.sign(pts[:, 2]) == sign)]
        best = cands[np.argmax(ricci_scalar(cands))]
        res = minimize(lambda p: -ricci_scalar(np.asarray(p)), best,
                       method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-13})
        assert np.linalg.norm(res.x - [0, 0, sign * math.sqrt(1.5)]) < 1e-6
        assert -res.fun == pytest.approx(1.6, abs=1e-9)


def test_profile_exactness():
    from hopflens import profile_residual
    cfg = AnsatzConfig(a=1, b=1)
    for eta in np.geomspace(1e-3, 10.0, 50):
        assert abs(profile_residual(cfg, float(eta))) < 1e-8


def test_topological_charge():
    start = time.perf_counter()
    for a, b in ((1, 1), (2, 1)):
        cfg = AnsatzConfig(a=a, b=b)
        assert hopf_charge_whitehead(cfg) == pytest.approx(a * b, rel=0.01)
        assert linking_number_refined(cfg) == pytest.approx(a * b, rel=0.01)
    assert time.perf_counter() - start < 60.0


def test_constraint_conservation(fig2_result):
    start = time.perf_counter()
    fig4 = run(build_fig4())
    elapsed = time.perf_counter() - start
    for result in (fig2_result, fig4):
        assert result.n_aborted == 0
        assert result.drift.max() < 1e-6
    assert elapsed < 60.0


@pytest.mark.xfail(
    strict=True,
    reason="a pi/4 cone from (0,0,5) is too wide for the near-axis focusing "
           "channel: after converging near the origin its rays spread and "
           "re-cross the axis only around z = -80, far outside any bundle "
           "reaching (0,0,-5); the second on-axis focus at (0,0,-5) occurs "
           "for half-angle 0.188 rad (see the companion test)")
def test_wide_cone_refocuses_at_minus_five():
    result = run(build_fig6(half_angle=math.pi / 4, t_end=14.0))
    fps = focal_points(result)
    assert any(np.linalg.norm(np.subtract(fp.point, (0, 0, -5))) < 0.2
               and fp.spread < 0.1 for fp in fps)


def test_narrow_cone_refocuses_at_minus_five():
    result = run(build_fig6())  # default half-angle 0.188 rad
    fps = [fp for fp in focal_points(result) if fp.spread < 0.1]
    assert len(fps) == 2
    first, second = fps
    assert np.linalg.norm(first.point) < 0.1  # first convergence at the origin
    assert np.linalg.norm(np.subtract(second.point, (0, 0, -5))) < 0.2
    assert second.spread < 0.1


def test_parallel_pencil_two_focal_points():
    result = run(build_fig7())
    fps = [fp for fp in focal_points(result) if fp.spread < 0.15]
    assert len(fps) == 2


@pytest.mark.xfail(
    strict=True,
    reason="the metric-weighted perimeter of the t=2 front is genuinely "
           "shorter than 2*pi*t: the effective metric has positive sectional "
           "curvature in the fan plane near the source (about +0.0015 at "
           "(3,0,0)), so small geodesic circles show a perimeter deficit; "
           "the excess only sets in around t = 2.5")
def test_perimeter_excess_includes_t2(fig2_result):
    eff, _ = wavefront_measure(fig2_result, 2.0)
    assert eff > 2 * math.pi * 2.0


def test_perimeter_excess_at_late_times(fig2_result):
    for t in (4.0, 6.0, 8.0):
        eff, _ = wavefront_measure(fig2_result, t)
        assert eff > 2 * math.pi * t


def test_euclidean_perimeter_excess_all_times(fig2_result):
    # the Euclidean footprint of the front exceeds the flat disk at every
    # probe time, including t=2 where the metric-weighted length does not
    for t in (2.0, 4.0, 6.0, 8.0):
        _, euc = wavefront_measure(fig2_result, t)
        assert euc > 2 * math.pi * t


def test_integrator_global_order():
    p0 = np.array([3.0, 0.0, 0.0])
    v0 = normalize_velocity(p0, np.array([-1.0, 0.3, 0.1]))
    ref = integrate_fixed(GeodesicState(p0, v0), 1e-4, 2.0)
    errs = []
    for h in (0.04, 0.02, 0.01):
        s = integrate_fixed(GeodesicState(p0, v0), h, 2.0)
        errs.append(np.abs(s.position - ref.position).max())
    for i in range(2):
        order = math.log2(errs[i] / errs[i + 1])
        assert abs(order - 4.0) < 0.2


def test_symbol_factorization_and_lorentzian():
    rng = np.random.default_rng(7)
    cfg = AnsatzConfig(a=1, b=1)
    for x in random_chart_points(rng, 100, box=4.0):
        k = rng.normal(size=4)
        sym = principal_symbol(cfg, x, k)
        lhs = np.linalg.det(sym.M)
        rhs = np.linalg.det(sym.h) * sym.P1 * sym.P2
        scale = max(abs(lhs), abs(rhs), 1e-30)
        assert abs(lhs - rhs) / scale < 1e-10
    # static ansatz: the time-time strain eigenvalue vanishes, so the
    # strict eigenvalue inequality holds at every chart point
    for x in random_chart_points(rng, 50, box=4.0):
        from hopflens.hopf_map import strain
        lam = np.linalg.eigvalsh(strain(cfg, x).L)
        lam = np.concatenate([[0.0], np.clip(lam, 0.0, None)])
        res = lorentzian_check(np.sort(lam))
        assert res.lorentzian


def test_geodesic_sanity_reference_ray():
    p0 = np.array([3.0, 0.0, 0.0])
    v0 = normalize_velocity(p0, np.array([-1.0, 0.0, 0.0]))
    traj = integrate(GeodesicState(p0, v0), IntegratorSettings(t_end=8.0))
    assert traj.completed and traj.drift.max() < 1e-6
