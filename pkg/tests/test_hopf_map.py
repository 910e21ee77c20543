import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import least_squares

from hopflens.hopf_map import (
    AnsatzConfig,
    ChartDomainError,
    Profile,
    Q1_PROFILE,
    SpherePoint,
    ToroidalPoint,
    ansatz_map,
    cartesian_to_toroidal,
    hopf_charge_whitehead,
    linking_number,
    linking_number_refined,
    preimage_curve,
    profile_residual,
    sigma1,
    strain,
    toroidal_to_cartesian,
)

from conftest import random_chart_points

Q1 = AnsatzConfig(a=1, b=1)


# ---------------------------------------------------------------------------
# chart maps
# ---------------------------------------------------------------------------

class TestToroidalToCartesian:
    def test_axis_point(self):
        x = toroidal_to_cartesian(ToroidalPoint(0.0, math.pi / 2, 0.0))
        np.testing.assert_allclose(x, [0.0, 0.0, 1.0], atol=1e-15)

    def test_large_eta_approaches_core_ring(self):
        x = toroidal_to_cartesian(ToroidalPoint(12.0, 1.3, 0.0))
        np.testing.assert_allclose(x, [1.0, 0.0, 0.0], atol=1e-4)

    def test_point_at_infinity_rejected(self):
        with pytest.raises(ChartDomainError):
            toroidal_to_cartesian(ToroidalPoint(0.0, 0.0, 1.0))

    def test_negative_eta_rejected(self):
        with pytest.raises(ValueError):
            ToroidalPoint(-0.1, 0.0, 0.0)


class TestCartesianToToroidal:
    def test_unit_z_is_on_axis(self):
        # (0,0,1) sits on the z-axis (eta=0 locus) where psi is undefined
        with pytest.raises(ChartDomainError):
            cartesian_to_toroidal([0.0, 0.0, 1.0])

    def test_known_point(self):
        p = cartesian_to_toroidal([math.tanh(1.0), 0.0, 1.0 / math.cosh(1.0)])
        assert p.eta == pytest.approx(1.0, abs=1e-12)
        assert p.theta == pytest.approx(math.pi / 2, abs=1e-12)
        assert p.psi == pytest.approx(0.0, abs=1e-12)

    def test_z_axis_rejected(self):
        with pytest.raises(ChartDomainError):
            cartesian_to_toroidal([0.0, 0.0, 3.0])

    def test_core_ring_rejected(self):
        with pytest.raises(ChartDomainError):
            cartesian_to_toroidal([1.0, 0.0, 0.0])

    def test_round_trip_cartesian(self, rng):
        pts = random_chart_points(rng, 1000)
        for x in pts:
            back = toroidal_to_cartesian(cartesian_to_toroidal(x))
            np.testing.assert_allclose(back, x, atol=1e-10)

    def test_round_trip_toroidal(self, rng):
        for _ in range(200):
            p = ToroidalPoint(rng.uniform(0.05, 5.0),
                              rng.uniform(0.0, 2 * math.pi),
                              rng.uniform(0.0, 2 * math.pi))
            q = cartesian_to_toroidal(toroidal_to_cartesian(p))
            assert q.eta == pytest.approx(p.eta, abs=1e-10)
            assert q.theta == pytest.approx(p.theta, abs=1e-10)
            assert q.psi == pytest.approx(p.psi, abs=1e-10)

    @settings(max_examples=100, deadline=None)
    @given(eta=st.floats(0.05, 6.0), theta=st.floats(0.0, 2 * math.pi),
           psi=st.floats(0.0, 2 * math.pi))
    def test_round_trip_property(self, eta, theta, psi):
        p = ToroidalPoint(eta, theta, psi)
        x = toroidal_to_cartesian(p)
        back = toroidal_to_cartesian(cartesian_to_toroidal(x))
        np.testing.assert_allclose(back, x, atol=1e-9)

    def test_inverse_against_root_finding_oracle(self, rng):
        # independent inverse: solve the forward map numerically
        for x in random_chart_points(rng, 20, box=3.0):
            p = cartesian_to_toroidal(x)

            def fun(v):
                return toroidal_to_cartesian(
                    ToroidalPoint(abs(v[0]), v[1], v[2])) - x

            sol = least_squares(fun, [max(p.eta, 0.1), p.theta + 0.05,
                                      p.psi - 0.05], xtol=1e-14, ftol=1e-14)
            assert abs(abs(sol.x[0]) - p.eta) < 1e-6
            assert abs((sol.x[1] - p.theta + math.pi) % (2 * math.pi)
                       - math.pi) < 1e-6


class TestAnsatzMap:
    def test_unit_profile_point(self):
        sp = ansatz_map(Q1, ToroidalPoint(1.0, 0.0, 0.0))
        assert sp.R == pytest.approx(math.sinh(1.0), abs=1e-14)
        assert sp.Phi == pytest.approx(0.0, abs=1e-14)

    def test_axis_maps_to_north_pole(self):
        for theta, psi in ((0.3, 1.0), (2.0, 5.0)):
            assert ansatz_map(Q1, ToroidalPoint(0.0, theta, psi)).R == 0.0

    def test_winding_combination(self):
        sp = ansatz_map(AnsatzConfig(a=2, b=1),
                        ToroidalPoint(1.0, math.pi / 4, math.pi / 2))
        assert sp.Phi == pytest.approx(math.pi, abs=1e-14)


# ---------------------------------------------------------------------------
# profile equation and sigma1
# ---------------------------------------------------------------------------

class TestProfileResidual:
    @pytest.mark.parametrize("eta", [0.5, 1.0, 2.0])
    def test_sinh_is_exact(self, eta):
        assert abs(profile_residual(Q1, eta)) < 1e-8

    def test_sinh_log_grid(self):
        for eta in np.geomspace(1e-3, 10.0, 50):
            assert abs(profile_residual(Q1, float(eta))) < 1e-8

    def test_sinh_fails_other_windings(self):
        assert abs(profile_residual(AnsatzConfig(a=2, b=1), 1.0)) > 1e-3

    def test_wrong_profile_fails(self):
        linear = AnsatzConfig(a=1, b=1, profile=Profile(f=lambda e: e,
                                                        name="linear"))
        assert abs(profile_residual(linear, 1.0)) > 1e-3

    def test_nonpositive_eta_rejected(self):
        with pytest.raises(ValueError):
            profile_residual(Q1, 0.0)


class TestSigma1:
    def test_closed_form_q1(self, rng):
        # for f = sinh the general formula collapses to 8 q^2 / cosh^2
        for _ in range(50):
            p = ToroidalPoint(rng.uniform(0.05, 5.0),
                              rng.uniform(0, 2 * math.pi),
                              rng.uniform(0, 2 * math.pi))
            q = math.cosh(p.eta) - math.cos(p.theta)
            expected = 8.0 * q * q / math.cosh(p.eta) ** 2
            assert sigma1(Q1, p) == pytest.approx(expected, rel=1e-12)

    def test_positive(self, rng):
        for _ in range(1000):
            p = ToroidalPoint(rng.uniform(0.01, 8.0),
                              rng.uniform(0, 2 * math.pi), 0.0)
            assert sigma1(AnsatzConfig(a=2, b=1), p) > 0.0

    def test_axis_limit(self):
        # as eta -> 0 the closed form 8 q^2 / cosh^2(eta) tends to
        # 8 (1 - cos theta)^2
        theta = 1.0
        vals = [sigma1(Q1, ToroidalPoint(e, theta, 0.0))
                for e in (1e-2, 1e-4, 1e-6)]
        assert vals[0] > vals[1] > vals[2]
        assert vals[2] == pytest.approx(8 * (1 - math.cos(theta)) ** 2,
                                        rel=1e-8)

    def test_nonpositive_eta_rejected(self):
        with pytest.raises(ValueError):
            sigma1(Q1, ToroidalPoint(0.0, 1.0, 0.0))


# ---------------------------------------------------------------------------
# strain
# ---------------------------------------------------------------------------

def _strain_fd_oracle(cfg, x, h=1e-6):
    """Pullback strain by finite differences of the (R, Phi) field values."""
    def fields(p):
        tp = cartesian_to_toroidal(p)
        sp = ansatz_map(cfg, tp)
        return sp.R, sp.Phi

    R0, _ = fields(x)
    dR = np.zeros(3)
    dPhi = np.zeros(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        Rp, Pp = fields(x + e)
        Rm, Pm = fields(x - e)
        dR[i] = (Rp - Rm) / (2 * h)
        dphi = Pp - Pm
        dPhi[i] = (dphi + math.pi) % (2 * math.pi) - math.pi
        dPhi[i] /= 2 * h
    w = 4.0 / (1.0 + R0 * R0) ** 2
    return w * (np.outer(dR, dR) + R0 * R0 * np.outer(dPhi, dPhi))


class TestStrain:
    def test_trace_equals_sigma1(self, rng):
        for x in random_chart_points(rng, 100):
            s = strain(Q1, x)
            expected = sigma1(Q1, cartesian_to_toroidal(x))
            assert np.trace(s.L) == pytest.approx(expected, rel=1e-10)

    def test_positive_semidefinite_rank_two(self, rng):
        for x in random_chart_points(rng, 50):
            lam = strain(Q1, x).lambda_sq
            assert lam.min() > -1e-12          # nonnegative
            assert abs(sorted(lam)[0]) < 1e-10  # rank <= 2

    def test_matches_fd_pullback_oracle(self):
        for x in ([0.5, 0.3, 0.8], [2.0, -1.0, 0.5], [-0.4, 1.5, -2.0]):
            L = strain(Q1, np.array(x)).L
            L_fd = _strain_fd_oracle(Q1, np.array(x))
            np.testing.assert_allclose(L, L_fd, atol=1e-6)


# ---------------------------------------------------------------------------
# topological charge
# ---------------------------------------------------------------------------

class TestHopfCharge:
    def test_unit_charge(self):
        assert hopf_charge_whitehead(Q1) == pytest.approx(1.0, rel=0.01)

    def test_double_charge(self):
        assert hopf_charge_whitehead(AnsatzConfig(a=2, b=1)) == \
            pytest.approx(2.0, rel=0.01)

    def test_degenerate_winding(self):
        assert hopf_charge_whitehead(AnsatzConfig(a=0, b=1)) == \
            pytest.approx(0.0, abs=1e-12)


class TestPreimageCurves:
    def test_points_map_to_target(self):
        target = SpherePoint(math.sinh(1.0), 0.0)
        curve = preimage_curve(Q1, target, samples=128)
        for pt in curve[:-1]:
            sp = ansatz_map(Q1, cartesian_to_toroidal(pt))
            assert abs(sp.R - target.R) < 1e-8
            assert abs((sp.Phi - target.Phi + math.pi) % (2 * math.pi)
                       - math.pi) < 1e-8

    def test_closed(self):
        curve = preimage_curve(Q1, SpherePoint(1.0, 0.5), samples=64)
        np.testing.assert_allclose(curve[0], curve[-1], atol=1e-10)

    def test_distinct_targets_disjoint(self):
        c1 = preimage_curve(Q1, SpherePoint(math.sinh(1.0), 0.0), 128)
        c2 = preimage_curve(Q1, SpherePoint(math.sinh(1.0), math.pi), 128)
        d = np.linalg.norm(c1[:, None, :] - c2[None, :, :], axis=-1)
        assert d.min() > 0.1

    def test_pole_target_rejected(self):
        with pytest.raises(ValueError):
            preimage_curve(Q1, SpherePoint(0.0, 0.0))


class TestLinkingNumber:
    def test_unit_charge_loops(self):
        assert linking_number_refined(Q1) == pytest.approx(1.0, abs=1e-2)

    def test_double_charge_loops(self):
        assert linking_number_refined(AnsatzConfig(a=2, b=1)) == \
            pytest.approx(2.0, abs=2e-2)

    def test_unlinked_circles(self):
        s = np.linspace(0, 2 * math.pi, 129)
        c1 = np.stack([np.cos(s) - 2, np.sin(s), np.zeros_like(s)], axis=-1)
        c2 = np.stack([np.cos(s) + 2, np.sin(s), np.zeros_like(s)], axis=-1)
        assert linking_number(c1, c2) == pytest.approx(0.0, abs=1e-2)

    def test_too_few_segments_rejected(self):
        s = np.linspace(0, 2 * math.pi, 17)
        c = np.stack([np.cos(s), np.sin(s), np.zeros_like(s)], axis=-1)
        with pytest.raises(ValueError):
            linking_number(c, c + [0, 0, 3.0])

    def test_too_close_rejected(self):
        s = np.linspace(0, 2 * math.pi, 129)
        c1 = np.stack([np.cos(s), np.sin(s), np.zeros_like(s)], axis=-1)
        c2 = c1 + [0.0, 0.0, 1e-5]
        with pytest.raises(ValueError):
            linking_number(c1, c2)
