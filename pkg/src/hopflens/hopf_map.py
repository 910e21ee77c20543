"""Toroidal chart, torus ansatz, pullback strain and topological charge.

The soliton is a map R^3 -> S^2 built from toroidal coordinates
(eta, theta, psi):

    x = sinh(eta) cos(psi) / q,  y = sinh(eta) sin(psi) / q,
    z = sin(theta) / q,          q = cosh(eta) - cos(theta),

and the torus ansatz R = f(eta), Phi = a*theta + b*psi into the
stereographic chart (R, Phi) of the 2-sphere. The z-axis is eta = 0 and
the unit core ring x^2 + y^2 = 1, z = 0 is eta -> infinity; both are
excluded from chart operations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

TWO_PI = 2.0 * math.pi

# distance below which a point counts as sitting on a chart singularity
SINGULAR_TOL = 1e-12


class ChartDomainError(ValueError):
    """Input lies on (or numerically at) a singular locus of the toroidal chart."""


class QuadratureWarning(UserWarning):
    """A quadrature did not converge to its internal error threshold."""


@dataclass(frozen=True)
class ToroidalPoint:
    """Point in the toroidal chart; angles are reduced mod 2*pi."""

    eta: float
    theta: float
    psi: float

    def __post_init__(self):
        if not self.eta >= 0.0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")
        object.__setattr__(self, "theta", self.theta % TWO_PI)
        object.__setattr__(self, "psi", self.psi % TWO_PI)


@dataclass(frozen=True)
class SpherePoint:
    """Stereographic coordinates on S^2: R=0 is the north pole, R->inf the south."""

    R: float
    Phi: float

    def __post_init__(self):
        if not self.R >= 0.0:
            raise ValueError(f"R must be nonnegative, got {self.R}")


@dataclass(frozen=True)
class Profile:
    """Radial profile f(eta) of the ansatz, with optional analytic derivatives.

    Boundary conditions: f(0) = 0 and f -> infinity as eta -> infinity.
    Missing derivatives fall back to 4th-order central differences with
    step 1e-4 * max(1, eta).
    """

    f: Callable[[float], float]
    df: Callable[[float], float] | None = None
    d2f: Callable[[float], float] | None = None
    name: str = "custom"

    def deriv(self, eta):
        if self.df is not None:
            return self.df(eta)
        h = 1e-4 * max(1.0, abs(eta))
        h = min(h, eta / 4.0) if eta > 0 else h
        return (self.f(eta - 2 * h) - 8 * self.f(eta - h)
                + 8 * self.f(eta + h) - self.f(eta + 2 * h)) / (12 * h)

    def deriv2(self, eta):
        if self.d2f is not None:
            return self.d2f(eta)
        h = 1e-4 * max(1.0, abs(eta))
        h = min(h, eta / 4.0) if eta > 0 else h
        return (-self.f(eta - 2 * h) + 16 * self.f(eta - h) - 30 * self.f(eta)
                + 16 * self.f(eta + h) - self.f(eta + 2 * h)) / (12 * h * h)


#: Exact unit-charge profile.
Q1_PROFILE = Profile(f=np.sinh, df=np.cosh, d2f=np.sinh, name="sinh")


@dataclass(frozen=True)
class AnsatzConfig:
    """Torus ansatz R = f(eta), Phi = a*theta + b*psi; the charge is a*b."""

    a: int
    b: int
    profile: Profile = Q1_PROFILE

    def __post_init__(self):
        if self.a != int(self.a) or self.b != int(self.b):
            raise ValueError("windings a, b must be integers")


@dataclass(frozen=True)
class StrainSample:
    """Spatial pullback strain L_ij and its eigenvalues w.r.t. the flat metric."""

    L: np.ndarray
    lambda_sq: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.lambda_sq is None:
            object.__setattr__(self, "lambda_sq", np.linalg.eigvalsh(self.L))


# ---------------------------------------------------------------------------
# chart maps
# ---------------------------------------------------------------------------

def toroidal_to_cartesian(p: ToroidalPoint) -> np.ndarray:
    """Map a toroidal point to Cartesian coordinates.

    Rejects (eta=0, theta=0), the point at infinity where q -> 0.
    """
    q = math.cosh(p.eta) - math.cos(p.theta)
    if q < SINGULAR_TOL:
        raise ChartDomainError(
            f"(eta={p.eta}, theta={p.theta}) is the point at infinity (q={q})")
    s = math.sinh(p.eta)
    return np.array([s * math.cos(p.psi) / q,
                     s * math.sin(p.psi) / q,
                     math.sin(p.theta) / q])


def cartesian_to_toroidal(x) -> ToroidalPoint:
    """Invert the toroidal chart.

    Rejects points on the z-axis (eta=0, psi undefined) and on the core
    ring x^2+y^2=1, z=0 (eta -> infinity).
    """
    x = np.asarray(x, dtype=float)
    rho = math.hypot(x[0], x[1])
    z = x[2]
    if rho < SINGULAR_TOL:
        raise ChartDomainError("point on the z-axis: psi is undefined (eta=0 locus)")
    d_ring_sq = (rho - 1.0) ** 2 + z * z
    if d_ring_sq < SINGULAR_TOL ** 2:
        raise ChartDomainError("point on the core ring x^2+y^2=1, z=0 (eta -> inf)")
    d1 = (rho + 1.0) ** 2 + z * z
    eta = 0.5 * math.log(d1 / d_ring_sq)
    theta = math.atan2(2.0 * z, rho * rho + z * z - 1.0)
    psi = math.atan2(x[1], x[0])
    return ToroidalPoint(eta=eta, theta=theta, psi=psi)


def ansatz_map(cfg: AnsatzConfig, p: ToroidalPoint) -> SpherePoint:
    """Apply the torus ansatz: R = f(eta), Phi = a*theta + b*psi mod 2*pi."""
    R = float(cfg.profile.f(p.eta))
    Phi = (cfg.a * p.theta + cfg.b * p.psi) % TWO_PI
    return SpherePoint(R=R, Phi=Phi)


# ---------------------------------------------------------------------------
# profile equation and first symmetric polynomial
# ---------------------------------------------------------------------------

def _delta_sq(cfg: AnsatzConfig, eta: float, f: float, fp: float) -> float:
    s = math.sinh(eta)
    return (fp / f) ** 2 + cfg.a ** 2 + cfg.b ** 2 / (s * s)


def profile_residual(cfg: AnsatzConfig, eta: float) -> float:
    """Residual of the profile ODE at eta (zero iff f solves it there).

    The ansatz reduces the field equation to the Euler-Lagrange equation of
    the functional  int (f'^2 + A f^2)^{3/2} sinh(eta) / (1+f^2)^3 deta  with
    A = a^2 + b^2 sinh^-2(eta):

        [Delta sinh(eta) f f' / (1+f^2)^3]'
            = Delta sinh(eta) f^2 [A (1-f^2) - 2 f'^2] / (1+f^2)^4.

    Returned is LHS - RHS normalized by (1+f^2)^3 / (Delta sinh(eta) f^2),
    which is O(1) on the exact solution's scale. f = sinh solves the a=b=1
    case exactly.
    """
    if eta <= 0:
        raise ValueError(f"eta must be positive (sinh^-2 singular), got {eta}")
    prof = cfg.profile
    f = float(prof.f(eta))
    fp = float(prof.deriv(eta))
    fpp = float(prof.deriv2(eta))
    s, c = math.sinh(eta), math.cosh(eta)
    a2, b2 = cfg.a ** 2, cfg.b ** 2
    A = a2 + b2 / (s * s)
    d2 = (fp / f) ** 2 + A
    d = math.sqrt(d2)
    one = 1.0 + f * f

    # g = Delta * sinh * f * f' / (1+f^2)^3, differentiated by chain rule
    dd2 = 2 * (fp / f) * (fpp * f - fp * fp) / (f * f) - 2 * b2 * c / (s ** 3)
    dd = dd2 / (2 * d)
    core = s * f * fp / one ** 3
    dcore = (c * f * fp + s * fp * fp + s * f * fpp) / one ** 3 \
        - 6 * s * f * f * fp * fp / one ** 4
    gprime = dd * core + d * dcore

    lhs = one ** 3 / (d * s * f * f) * gprime
    rhs = (A * (1.0 - f * f) - 2.0 * fp * fp) / one
    return lhs - rhs


def sigma1(cfg: AnsatzConfig, p: ToroidalPoint) -> float:
    """First symmetric strain polynomial sigma_1 = 4 f^2 q^2 Delta^2 / (1+f^2)^2."""
    if p.eta <= 0:
        raise ValueError(f"eta must be positive, got {p.eta}")
    f = float(cfg.profile.f(p.eta))
    fp = float(cfg.profile.deriv(p.eta))
    q = math.cosh(p.eta) - math.cos(p.theta)
    d2 = _delta_sq(cfg, p.eta, f, fp)
    return 4.0 * f * f * q * q * d2 / (1.0 + f * f) ** 2


# ---------------------------------------------------------------------------
# pullback strain in Cartesian coordinates
# ---------------------------------------------------------------------------

def _chart_gradients(x: np.ndarray):
    """Gradients of (eta, theta, psi) w.r.t. Cartesian coordinates (analytic)."""
    rho = math.hypot(x[0], x[1])
    z = x[2]
    d1 = (rho + 1.0) ** 2 + z * z
    d2 = (rho - 1.0) ** 2 + z * z
    deta_drho = (rho + 1.0) / d1 - (rho - 1.0) / d2
    deta_dz = z * (1.0 / d1 - 1.0 / d2)
    u = rho * rho + z * z - 1.0
    den = u * u + 4.0 * z * z
    dth_drho = -4.0 * rho * z / den
    dth_dz = 2.0 * (u - 2.0 * z * z) / den
    drho = np.array([x[0] / rho, x[1] / rho, 0.0])
    grad_eta = deta_drho * drho + np.array([0.0, 0.0, deta_dz])
    grad_theta = dth_drho * drho + np.array([0.0, 0.0, dth_dz])
    grad_psi = np.array([-x[1], x[0], 0.0]) / (rho * rho)
    return grad_eta, grad_theta, grad_psi


def field_gradients(cfg: AnsatzConfig, x) -> tuple[np.ndarray, np.ndarray, float]:
    """Cartesian gradients of (R, Phi) and the value R at x (chain rule)."""
    x = np.asarray(x, dtype=float)
    p = cartesian_to_toroidal(x)
    grad_eta, grad_theta, grad_psi = _chart_gradients(x)
    R = float(cfg.profile.f(p.eta))
    fp = float(cfg.profile.deriv(p.eta))
    grad_R = fp * grad_eta
    grad_Phi = cfg.a * grad_theta + cfg.b * grad_psi
    return grad_R, grad_Phi, R


def strain(cfg: AnsatzConfig, x) -> StrainSample:
    """Spatial pullback strain L_ij = h_ab d_i phi^a d_j phi^b at a Cartesian point.

    Its flat-metric trace equals sigma1 at the same point; it is positive
    semidefinite of rank <= 2 (pullback of a 2-sphere metric).
    """
    grad_R, grad_Phi, R = field_gradients(cfg, x)
    w = 4.0 / (1.0 + R * R) ** 2
    L = w * (np.outer(grad_R, grad_R) + R * R * np.outer(grad_Phi, grad_Phi))
    return StrainSample(L=L)


# ---------------------------------------------------------------------------
# topological charge
# ---------------------------------------------------------------------------

def hopf_charge_whitehead(cfg: AnsatzConfig, eta_max: float = 12.0,
                          n_eta: int = 96, n_ang: int = 8,
                          err_threshold: float = 1e-6) -> float:
    """Topological charge by quadrature of the Whitehead integral.

    The charge density for the ansatz is F wedge C with F = dC and the
    chart-regular potential C = a c(eta) dtheta + b (c(eta) - c(0)) dpsi,
    c = -2/(1+f^2); regularity forces the integration constants (the dtheta
    part must vanish on the core ring, the dpsi part on the axis). The
    integrand decays like the profile's cosh^-4, so the eta range is
    truncated at `eta_max` with negligible tail.

    Tensor-product Gauss-Legendre nodes in (eta, theta, psi); the estimated
    error (halved-order comparison) is warned about if above threshold.
    """
    f0 = float(cfg.profile.f(0.0))
    c0 = -2.0 / (1.0 + f0 * f0)

    def integrate_1d(n):
        nodes, wts = leggauss(n)
        eta = 0.5 * eta_max * (nodes + 1.0)
        w_eta = 0.5 * eta_max * wts
        f = np.asarray([float(cfg.profile.f(e)) for e in eta])
        fp = np.asarray([float(cfg.profile.deriv(e)) for e in eta])
        c = -2.0 / (1.0 + f * f)
        cp = 4.0 * f * fp / (1.0 + f * f) ** 2
        # A' B - A B' with A = a c, B = b (c - c0)
        dens = cfg.a * cp * cfg.b * (c - c0) - cfg.a * c * cfg.b * cp
        # angular factors as explicit tensor-product quadrature
        nodes_a, wts_a = leggauss(n_ang)
        w_th = math.pi * wts_a  # maps [-1,1] -> [0, 2pi]
        ang_weight = np.sum(w_th) ** 2  # = (2 pi)^2, integrand is angle-free
        return float(np.sum(w_eta * dens) * ang_weight / (16.0 * math.pi ** 2))

    q_half = integrate_1d(n_eta // 2)
    q_full = integrate_1d(n_eta)
    err = abs(q_full - q_half)
    if err > err_threshold * max(1.0, abs(q_full)):
        warnings.warn(
            f"charge quadrature error estimate {err:.3e} above threshold",
            QuadratureWarning)
    return q_full


# ---------------------------------------------------------------------------
# preimage curves and linking number
# ---------------------------------------------------------------------------

def _profile_inverse(cfg: AnsatzConfig, R: float) -> float:
    """eta with f(eta) = R, by bracketing root-find (f monotone increasing)."""
    lo, hi = 1e-12, 1.0
    while float(cfg.profile.f(hi)) < R:
        hi *= 2.0
        if hi > 1e3:
            raise ValueError(f"profile never reaches R={R}")
    return brentq(lambda e: float(cfg.profile.f(e)) - R, lo, hi, xtol=1e-14)


def preimage_curve(cfg: AnsatzConfig, target: SpherePoint,
                   samples: int = 256) -> np.ndarray:
    """Closed preimage loop of a non-pole target point, as (samples+1, 3) polyline.

    The preimage lies on the torus eta = f^-1(R) along a*theta + b*psi = Phi;
    it is parametrized as theta = theta0 + b s, psi = psi0 - a s, s in [0, 2pi],
    so the first and last points coincide.
    """
    if samples < 8:
        raise ValueError("need at least 8 samples")
    if target.R <= 0.0 or not math.isfinite(target.R):
        raise ValueError("pole target: preimage degenerates to the axis/ring")
    eta0 = _profile_inverse(cfg, target.R)
    norm = cfg.a ** 2 + cfg.b ** 2
    if norm == 0:
        raise ValueError("degenerate ansatz a=b=0 has no preimage loops")
    theta0 = target.Phi * cfg.a / norm
    psi0 = target.Phi * cfg.b / norm
    s = np.linspace(0.0, TWO_PI, samples + 1)
    pts = np.empty((samples + 1, 3))
    for i, si in enumerate(s):
        pts[i] = toroidal_to_cartesian(
            ToroidalPoint(eta0, theta0 + cfg.b * si, psi0 - cfg.a * si))
    pts[-1] = pts[0]  # close exactly despite angle reduction
    return pts


def linking_number(c1: np.ndarray, c2: np.ndarray,
                   min_distance: float = 1e-3) -> float:
    """Gauss linking integral of two closed disjoint polylines (midpoint rule)."""
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    for c in (c1, c2):
        if c.shape[0] < 65:
            raise ValueError("each curve needs at least 64 segments")
        if np.max(np.abs(c[0] - c[-1])) > 1e-10:
            raise ValueError("curves must be closed (first == last point)")
    m1 = 0.5 * (c1[1:] + c1[:-1])
    m2 = 0.5 * (c2[1:] + c2[:-1])
    d1 = np.diff(c1, axis=0)
    d2 = np.diff(c2, axis=0)
    diff = m1[:, None, :] - m2[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    if dist.min() < min_distance:
        raise ValueError(
            f"curves closer than {min_distance}: linking integral inaccurate")
    cross = np.cross(d1[:, None, :], d2[None, :, :])
    integrand = np.einsum('ijk,ijk->ij', diff, cross) / dist ** 3
    return float(np.sum(integrand) / (4.0 * math.pi))


def linking_number_refined(cfg: AnsatzConfig, phi1: float = 0.0,
                           phi2: float = math.pi, R: float | None = None,
                           tol: float = 1e-3, start: int = 64,
                           max_samples: int = 2048) -> float:
    """Linking number of two preimage loops, segment count doubled until stable."""
    if R is None:
        R = float(cfg.profile.f(1.0))
    prev = None
    n = start
    while n <= max_samples:
        val = linking_number(
            preimage_curve(cfg, SpherePoint(R, phi1), n),
            preimage_curve(cfg, SpherePoint(R, phi2), n))
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        n *= 2
    return prev
