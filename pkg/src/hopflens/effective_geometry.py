"""Closed-form effective metric of the Q=1 soliton, curvature, principal symbol.

The reciprocal effective metric is m^-1 = g^-1 + L/sigma1 (the interaction
coefficient 2*Lag_11/Lag_1 evaluates to 1/sigma1 for a Lagrangian density
sigma1^{3/2}); for the unit-charge soliton this has a global closed form in
Cartesian coordinates, smooth and positive definite everywhere, with Ricci
scalar R = -(4x^2+4y^2-8z^2+2)/(1+r^2)^2.

All point functions accept arrays of shape (..., 3) and return matching
batched tensors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hopflens.hopf_map import (
    AnsatzConfig,
    ChartDomainError,
    ToroidalPoint,
    cartesian_to_toroidal,
    field_gradients,
    sigma1,
)


def inv_metric_cartesian(x) -> np.ndarray:
    """Reciprocal effective metric (m^-1)^{ij} at Cartesian points, shape (...,3,3)."""
    x = np.asarray(x, dtype=float)
    px, py, pz = x[..., 0], x[..., 1], x[..., 2]
    r2 = px * px + py * py + pz * pz
    D = (1.0 + r2) ** 2
    u = py - px * pz
    v = px + py * pz
    w = px * px + py * py - pz * pz - 1.0
    m = np.empty(x.shape[:-1] + (3, 3))
    m[..., 0, 0] = 1.5 - 2.0 * u * u / D
    m[..., 1, 1] = 1.5 - 2.0 * v * v / D
    m[..., 2, 2] = (px ** 4 + 2 * px * px * (py * py + 2 * pz * pz + 2)
                    + py ** 4 + 4 * py * py * (pz * pz + 1)
                    + (pz * pz + 1) ** 2) / D
    m[..., 0, 1] = m[..., 1, 0] = 2.0 * u * v / D
    m[..., 0, 2] = m[..., 2, 0] = -u * w / D
    m[..., 1, 2] = m[..., 2, 1] = v * w / D
    return m


def metric_cartesian(x) -> np.ndarray:
    """Effective metric m_ij at Cartesian points, shape (...,3,3).

    Exact inverse of inv_metric_cartesian (product deviates from identity
    only by roundoff).
    """
    x = np.asarray(x, dtype=float)
    px, py, pz = x[..., 0], x[..., 1], x[..., 2]
    r2 = px * px + py * py + pz * pz
    D3 = 3.0 * (1.0 + r2) ** 2
    u = py - px * pz
    v = px + py * pz
    w = px * px + py * py - pz * pz - 1.0
    m = np.empty(x.shape[:-1] + (3, 3))
    m[..., 0, 0] = 2.0 * (px ** 4 + 2 * px * px * (py * py + 2 * pz * pz + 1)
                          - 4 * px * py * pz + py ** 4
                          + 2 * py * py * (pz * pz + 2)
                          + (pz * pz + 1) ** 2) / D3
    m[..., 1, 1] = 2.0 * (px ** 4 + 2 * px * px * (py * py + pz * pz + 2)
                          + 4 * px * py * pz + py ** 4
                          + py * py * (4 * pz * pz + 2)
                          + (pz * pz + 1) ** 2) / D3
    m[..., 2, 2] = 1.0 - 4.0 * (pz * pz + 1) * (px * px + py * py) / D3
    m[..., 0, 1] = m[..., 1, 0] = -4.0 * u * v / D3
    m[..., 0, 2] = m[..., 2, 0] = 2.0 * u * w / D3
    m[..., 1, 2] = m[..., 2, 1] = -2.0 * v * w / D3
    return m


def inv_metric_toroidal(cfg: AnsatzConfig, p: ToroidalPoint) -> np.ndarray:
    """Reciprocal effective metric in the (eta, theta, psi) chart.

    Block form: flat reciprocal q^2 diag(1, 1, sinh^-2) plus the strain part
    q^2/Delta^2 with entries (f'/f)^2, a^2, ab sinh^-2, b^2 sinh^-4; the
    (eta,theta) and (eta,psi) off-diagonals vanish identically.
    """
    if p.eta <= 0:
        raise ChartDomainError(f"eta must be positive, got {p.eta}")
    f = float(cfg.profile.f(p.eta))
    fp = float(cfg.profile.deriv(p.eta))
    s = math.sinh(p.eta)
    q = math.cosh(p.eta) - math.cos(p.theta)
    d2 = (fp / f) ** 2 + cfg.a ** 2 + cfg.b ** 2 / (s * s)
    flat = np.diag([1.0, 1.0, 1.0 / (s * s)])
    strain_part = np.array([
        [(fp / f) ** 2, 0.0, 0.0],
        [0.0, cfg.a ** 2, cfg.a * cfg.b / (s * s)],
        [0.0, cfg.a * cfg.b / (s * s), cfg.b ** 2 / s ** 4],
    ]) / d2
    return q * q * (flat + strain_part)


def ricci_scalar(x) -> np.ndarray | float:
    """Closed-form Ricci scalar of the effective metric."""
    x = np.asarray(x, dtype=float)
    px, py, pz = x[..., 0], x[..., 1], x[..., 2]
    r2 = px * px + py * py + pz * pz
    out = -(4 * px * px + 4 * py * py - 8 * pz * pz + 2) / (1.0 + r2) ** 2
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# finite-difference curvature oracle
# ---------------------------------------------------------------------------

# 4th-order central difference: nodes and weights for f'
_FD_NODES = np.array([-2.0, -1.0, 1.0, 2.0])
_FD_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def _fd_step(x) -> np.ndarray:
    h = 1e-4 * (1.0 + np.abs(np.asarray(x, dtype=float)))
    if np.any(h < 1e-12):
        raise FloatingPointError("finite-difference step underflow")
    return h


def _metric_derivs(x) -> np.ndarray:
    """dm[..., k, i, j] = d m_ij / d x^k by 4th-order central differences."""
    x = np.asarray(x, dtype=float)
    h = _fd_step(x)
    dm = np.empty(x.shape[:-1] + (3, 3, 3))
    for k in range(3):
        pts = x[..., None, :] + np.zeros((4, 3))
        pts[..., :, k] += _FD_NODES * h[..., None, k]
        vals = metric_cartesian(pts)  # (..., 4, 3, 3)
        dm[..., k, :, :] = np.einsum(
            's,...sij->...ij', _FD_WEIGHTS, vals) / h[..., None, None, k]
    return dm


def christoffel_fd(x) -> np.ndarray:
    """Christoffel symbols Gamma^i_jk of the effective metric via FD, (...,3,3,3)."""
    dm = _metric_derivs(x)
    minv = inv_metric_cartesian(x)
    # Gamma^i_jk = 1/2 m^il (d_j m_lk + d_k m_lj - d_l m_jk)
    term = (np.einsum('...jlk->...ljk', dm) + np.einsum('...klj->...ljk', dm)
            - dm)
    return 0.5 * np.einsum('...il,...ljk->...ijk', minv, term)


def ricci_scalar_numeric(x) -> float:
    """Ricci scalar from the metric alone, by nested finite differences.

    Independent oracle for `ricci_scalar`: Gamma from 4th-order FD of the
    metric, then R_ij = d_k Gamma^k_ij - d_j Gamma^k_ik + Gamma Gamma terms,
    contracted with the inverse metric.
    """
    x = np.asarray(x, dtype=float)
    h = 10.0 * _fd_step(x)  # outer step; inner FD uses its own smaller step
    dGamma = np.empty((3, 3, 3, 3))  # [k, i, j, l] = d_k Gamma^i_jl
    for k in range(3):
        pts = x[None, :] + np.zeros((4, 3))
        pts[:, k] += _FD_NODES * h[k]
        vals = christoffel_fd(pts)  # (4, 3, 3, 3)
        dGamma[k] = np.einsum('s,sijl->ijl', _FD_WEIGHTS, vals) / h[k]
    G = christoffel_fd(x)
    ricci = (np.einsum('kkij->ij', dGamma)
             - np.einsum('jkik->ij', dGamma)
             + np.einsum('kkl,lij->ij', G, G)
             - np.einsum('kjl,lik->ij', G, G))
    return float(np.einsum('ij,ij->', inv_metric_cartesian(x), ricci))


# ---------------------------------------------------------------------------
# principal symbol and hyperbolicity
# ---------------------------------------------------------------------------

MINKOWSKI = np.diag([-1.0, 1.0, 1.0, 1.0])


@dataclass(frozen=True)
class PrincipalSymbol:
    """2x2 principal symbol M_ab(x, k) and its two characteristic quadrics."""

    M: np.ndarray
    P1: float
    P2: float
    h: np.ndarray

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of h^-1 M, sorted; they equal {P1, P2} up to ordering."""
        return np.sort(np.linalg.eigvals(np.linalg.solve(self.h, self.M)).real)


def sphere_metric(R: float) -> np.ndarray:
    """Stereographic round metric 4/(1+R^2)^2 diag(1, R^2) of the target sphere."""
    w = 4.0 / (1.0 + R * R) ** 2
    return np.array([[w, 0.0], [0.0, w * R * R]])


def principal_symbol(cfg: AnsatzConfig, x, k) -> PrincipalSymbol:
    """Principal symbol of the linearized system at a static background point.

    M_ab(x,k) = (g^{cd} k_c k_d) h_ab + xi (h V)_a (h V)_b with
    V^a = d^c phi^a k_c and xi = 1/sigma1; its h^-1-eigenvalues are the two
    quadrics P1 = g^{cd} k_c k_d and P2 = (m^-1)^{cd} k_c k_d, so
    det M = det(h) P1 P2.
    """
    x = np.asarray(x, dtype=float)
    k = np.asarray(k, dtype=float)
    if k.shape != (4,):
        raise ValueError("k must be a 4-covector (t, x, y, z)")
    grad_R, grad_Phi, R = field_gradients(cfg, x)
    if R <= 0.0:
        raise ChartDomainError("degenerate target chart at the pole R=0")
    h = sphere_metric(R)
    dphi = np.zeros((2, 4))  # static background: time derivatives vanish
    dphi[0, 1:] = grad_R
    dphi[1, 1:] = grad_Phi
    p = cartesian_to_toroidal(x)
    s1 = sigma1(cfg, p)
    xi = 1.0 / s1

    kup = MINKOWSKI @ k  # k with index raised by the flat background
    P1 = float(k @ kup)
    V = dphi @ kup  # V^a = d^c phi^a k_c
    hV = h @ V
    M = P1 * h + xi * np.outer(hV, hV)
    P2 = P1 + xi * float(V @ h @ V)
    return PrincipalSymbol(M=M, P1=P1, P2=P2, h=h)


@dataclass(frozen=True)
class LorentzianCheck:
    """Signature test of the reciprocal effective metric from strain eigenvalues."""

    lorentzian: bool
    degenerate: bool
    diag: np.ndarray | None


def lorentzian_check(eigenvalues) -> LorentzianCheck:
    """Check lam0^2 < (lam1^2 + lam2^2 + lam3^2)/2 on 4D strain eigenvalues.

    Also returns the diagonal of m^-1 in the strain-diagonalizing frame.
    The all-zero (vacuum) and boundary-equality cases are flagged as
    degenerate rather than Lorentzian.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.shape != (4,):
        raise ValueError("need four strain eigenvalues (lam0^2 .. lam3^2)")
    if np.any(lam < 0):
        raise ValueError("strain eigenvalues must be nonnegative")
    l0, rest = lam[0], lam[1:]
    total = float(rest.sum())
    if l0 == 0.0 and total == 0.0:
        return LorentzianCheck(lorentzian=False, degenerate=True, diag=None)
    numer0 = 2.0 * l0 - total
    if numer0 == 0.0:
        return LorentzianCheck(lorentzian=False, degenerate=True, diag=None)
    denom = -l0 + total
    diag = np.array([
        (2 * l0 - total) / denom,
        (-l0 + 2 * lam[1] + lam[2] + lam[3]) / denom,
        (-l0 + lam[1] + 2 * lam[2] + lam[3]) / denom,
        (-l0 + lam[1] + lam[2] + 2 * lam[3]) / denom,
    ])
    return LorentzianCheck(lorentzian=numer0 < 0.0, degenerate=False, diag=diag)
