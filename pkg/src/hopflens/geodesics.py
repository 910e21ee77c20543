"""Geodesic equations of the effective metric and adaptive RK4 integration.

Unit-speed geodesics of the spatial effective metric solve

    xdd^i + Gamma^i_jk xd^j xd^k = 0,     m_ij xd^i xd^j = 1,

where the constraint is preserved exactly by the flow and is monitored (never
projected) as an integration diagnostic. Two independent right-hand sides are
provided: the closed-form polynomial equations (`rhs_closed_form`, the
production path) and a finite-difference Christoffel route
(`rhs_christoffel`, for cross-validation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from hopflens.effective_geometry import (
    christoffel_fd,
    metric_cartesian,
)


def _closed_form_accel_mirror(x, y, z, vx, vy, vz):
    """Quadratic-in-velocity accelerations, written in the mirror frame.

    The polynomial form below is for the opposite-handed (z -> -z)
    configuration; `rhs_closed_form` conjugates by the mirror to match
    `metric_cartesian`'s orientation. Coefficients follow the grouped
    polynomial layout of the quadratic forms; the only deviation from that
    layout is the x-equation (vz)^2 prefactor, which must be -1/3 (the
    symmetric counterpart of the y-equation term) for consistency with the
    metric's Christoffel symbols.
    """
    x2, y2, z2 = x * x, y * y, z * z
    x4, y4, z4 = x2 * x2, y2 * y2, z2 * z2
    z3, z5, z6 = z2 * z, z4 * z, z4 * z2
    S = 1.0 + x2 + y2 + z2
    inv = 1.0 / S ** 4
    p = x * z + y   # (xz + y)
    q = x - y * z   # (x - yz)
    rr = x2 + y2

    # x equation: coefficients of the quadratic form on the left-hand side
    cx_xx = -4.0 / 3.0 * inv * (-p * (z3 * (x2 + 2 * y2 + 2)
             - 3 * x * y * (rr + 1)
             + z * (-2 * x4 - x2 * (y2 + 1) + y4 + 4 * y2 + 1)
             + x * y * z2 + z5))
    cx_xy = 4.0 / 3.0 * inv * (-p * (-2 * z2 * (x2 + 2 * y2 + 3)
             + 2 * x * y * z * (3 * rr + 5) - 3 * (x2 + 1) ** 2
             + 2 * x * y * z3 + 3 * y4 - 3 * z4))
    cx_xz = 4.0 / 3.0 * inv * (p * (-2 * x * z2 * (rr - 1)
             - 4 * y * z * (2 * rr + 1) + 3 * x * (rr + 1) ** 2
             - x * z4 - 4 * y * z3))
    cx_yy = 4.0 / 3.0 * inv * (x * z4 * (2 * x2 + y2 - 1)
             + 4 * y * z3 * (rr + 2) + 3 * x * (y2 - 1) * (rr + 1)
             + x * z2 * (x4 - (x2 + 5) * y2 + x2 - 2 * y4 - 5)
             + 2 * y * z * (2 * x4 + x2 * (y2 + 5) - y4 + y2 + 2)
             + x * z6 + 4 * y * z5)
    cx_yz = -2.0 / 3.0 * inv * (3 * x4 * x2 - 6 * x4 * x * y * z
             + x4 * (3 * y2 - z2 + 15) + 4 * x2 * x * y * z * (-3 * y2 + z2 - 7)
             + x2 * (-3 * y4 + 18 * y2 * (z2 + 1) + z4 + 10 * z2 + 9)
             - 2 * x * y * z * (3 * y4 - 2 * y2 * (z2 - 7) - z4 + 6 * z2 + 7)
             - 3 * y4 * y2 + y4 * (19 * z2 + 3)
             + y2 * (z2 + 1) * (11 * z2 + 3) - 3 * (z2 + 1) ** 3)
    cx_zz = -1.0 / 3.0 * inv * (-x * z4 * (7 * rr + 15)
             - 4 * y * z3 * (rr - 3)
             + 3 * x * (rr - 1) * (rr + 1) * (rr + 3)
             - x * z2 * (9 * x4 + 2 * x2 * (9 * y2 + 5) + 9 * y4 + 10 * y2 + 21)
             - 2 * y * z * (9 * x4 + 2 * x2 * (9 * y2 + 1) + 9 * y4 + 2 * y2 - 3)
             - 3 * x * z6 + 6 * y * z5)
    ax = -(cx_xx * vx * vx + cx_xy * vx * vy + cx_xz * vx * vz
           + cx_yy * vy * vy + cx_yz * vy * vz + cx_zz * vz * vz)

    # y equation
    cy_xx = 4.0 / 3.0 * inv * (y * z4 * (x2 + 2 * y2 - 1)
             - 4 * x * z3 * (rr + 2) + 3 * (x2 - 1) * y * (rr + 1)
             + y * z2 * (-2 * x4 - x2 * (y2 + 5) + y4 + y2 - 5)
             + 2 * x * z * (x4 - (x2 + 5) * y2 - x2 - 2 * y4 - 2)
             - 4 * x * z5 + y * z6)
    cy_xy = -4.0 / 3.0 * inv * (q * (3 * x4 - 2 * z2 * (2 * x2 + y2 + 3)
             - 2 * x * y * z * (3 * rr + 5) - 2 * x * y * z3
             - 3 * (y2 + 1) ** 2 - 3 * z4))
    cy_xz = -2.0 / 3.0 * inv * (3 * x4 * x2 - 6 * x4 * x * y * z
             + x4 * (3 * y2 - 19 * z2 - 3)
             + 4 * x2 * x * y * z * (-3 * y2 + z2 - 7)
             - x2 * (3 * y4 + 18 * y2 * (z2 + 1) + 11 * z4 + 14 * z2 + 3)
             - 2 * x * y * z * (3 * y4 - 2 * y2 * (z2 - 7) - z4 + 6 * z2 + 7)
             - 3 * y4 * y2 + y4 * (z2 - 15)
             - y2 * (z2 + 1) * (z2 + 9) + 3 * (z2 + 1) ** 3)
    cy_yy = -4.0 / 3.0 * inv * (q * (z3 * (2 * x2 + y2 + 2)
             + 3 * x * y * (rr + 1)
             + z * (x4 - (x2 + 1) * y2 + 4 * x2 - 2 * y4 + 1)
             - x * y * z2 + z5))
    cy_yz = -4.0 / 3.0 * inv * (q * (-2 * y * z2 * (rr - 1)
             + 4 * x * z * (2 * rr + 1) + 3 * y * (rr + 1) ** 2
             + 4 * x * z3 - y * z4))
    cy_zz = -1.0 / 3.0 * inv * (-y * z4 * (7 * rr + 15)
             + 4 * x * z3 * (rr - 3)
             + 3 * y * (rr - 1) * (rr + 1) * (rr + 3)
             - y * z2 * (9 * x4 + 2 * x2 * (9 * y2 + 5) + 9 * y4 + 10 * y2 + 21)
             + 2 * x * z * (9 * x4 + 2 * x2 * (9 * y2 + 1) + 9 * y4 + 2 * y2 - 3)
             - 6 * x * z5 - 3 * y * z6)
    ay = -(cy_xx * vx * vx + cy_xy * vx * vy + cy_xz * vx * vz
           + cy_yy * vy * vy + cy_yz * vy * vz + cy_zz * vz * vz)

    # z equation
    cz_xx = -2.0 / 3.0 * inv * (x4 * x2 * z + x4 * z * (3 * y2 + 9 * z2 + 13)
             + 4 * x2 * x * y * (z2 + 3)
             + x2 * z * (3 * y4 + 10 * y2 * (z2 + 1) + 3 * z4 + 14 * z2 + 11)
             + 4 * x * y * (y2 * (z2 + 3) - z4 + 2 * z2 + 3)
             + z * (y4 * y2 + y4 * (z2 - 3)
                    - y2 * (z2 + 1) * (z2 + 9) - (z2 + 1) ** 3))
    cz_xy = 8.0 / 3.0 * inv * (x4 * (z2 + 3) - 4 * x2 * x * y * z * (z2 + 2)
             + x2 * (-z4 + 2 * z2 + 3)
             - 2 * x * y * z * (2 * y2 * (z2 + 2) + z4 + 6 * z2 + 5)
             - y2 * (y2 * (z2 + 3) - z4 + 2 * z2 + 3))
    cz_xz = 4.0 / 3.0 * inv * ((rr - z2 - 1) * (x * z2 * (4 * rr + 5)
             + y * z * (rr - 1) + 3 * x * (rr + 1) + 2 * x * z4 - y * z3))
    cz_yy = -2.0 / 3.0 * inv * (x4 * x2 * z + x4 * z * (3 * y2 + z2 - 3)
             - 4 * x2 * x * y * (z2 + 3)
             - x2 * z * (-3 * y4 - 10 * y2 * (z2 + 1) + z4 + 10 * z2 + 9)
             - 4 * x * y * (y2 * (z2 + 3) - z4 + 2 * z2 + 3)
             + z * (y4 * y2 + y4 * (9 * z2 + 13)
                    + y2 * (z2 + 1) * (3 * z2 + 11) - (z2 + 1) ** 3))
    cz_yz = -4.0 / 3.0 * inv * ((rr - z2 - 1) * (-3 * y * (1 + rr)
             + x * (rr - 1) * z - y * (5 + 4 * rr) * z2 - x * z3 - 2 * y * z4))
    cz_zz = -2.0 / 3.0 * inv * (z * rr * (rr - z2 - 1) * (3 * rr + z2 + 1))
    az = -(cz_xx * vx * vx + cz_xy * vx * vy + cz_xz * vx * vz
           + cz_yy * vy * vy + cz_yz * vy * vz + cz_zz * vz * vz)

    return ax, ay, az


def rhs_closed_form(position, velocity) -> np.ndarray:
    """Geodesic acceleration of the effective metric, closed form, shape (...,3)."""
    position = np.asarray(position, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    ax, ay, az = _closed_form_accel_mirror(
        position[..., 0], position[..., 1], -position[..., 2],
        velocity[..., 0], velocity[..., 1], -velocity[..., 2])
    return np.stack([ax, ay, -az], axis=-1)


def rhs_christoffel(position, velocity) -> np.ndarray:
    """Geodesic acceleration via finite-difference Christoffel symbols.

    Validation-only route: agrees with `rhs_closed_form` to ~1e-6, limited by
    the FD truncation of the metric derivatives.
    """
    position = np.asarray(position, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    gam = christoffel_fd(position)
    return -np.einsum('...ijk,...j,...k->...i', gam, velocity, velocity)


def normalize_velocity(position, direction) -> np.ndarray:
    """Scale `direction` so the unit-speed constraint m_ij v^i v^j = 1 holds."""
    direction = np.asarray(direction, dtype=float)
    norm_sq = constraint_value(position, direction)
    if np.any(norm_sq <= 0) or not np.all(np.isfinite(norm_sq)):
        raise ValueError("direction must be nonzero")
    return direction / np.sqrt(norm_sq)[..., None] \
        if direction.ndim > 1 else direction / np.sqrt(norm_sq)


def constraint_value(position, velocity) -> np.ndarray | float:
    """m_ij v^i v^j at the given state (1 on unit-speed geodesics)."""
    m = metric_cartesian(position)
    val = np.einsum('...ij,...i,...j->...', m, velocity, velocity)
    return float(val) if val.ndim == 0 else val


@dataclass
class GeodesicState:
    """Position and velocity (d/dt, t the static time coordinate)."""

    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)


@dataclass(frozen=True)
class IntegratorSettings:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-8
    h_init: float = 1e-2
    h_min: float = 1e-8
    h_max: float = 0.1
    t_end: float = 8.0

    def __post_init__(self):
        if min(self.rel_tol, self.abs_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if not (0 < self.h_min <= self.h_init <= self.h_max):
            raise ValueError("need 0 < h_min <= h_init <= h_max")
        if self.t_end < 0:
            raise ValueError("t_end must be nonnegative")


@dataclass
class RayTrajectory:
    """Accepted integration samples of one ray plus constraint diagnostics."""

    t: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    drift: np.ndarray
    status: str = "completed"

    @property
    def completed(self) -> bool:
        return self.status == "completed"

    def state(self, index: int) -> GeodesicState:
        return GeodesicState(self.positions[index], self.velocities[index])

    def position_at(self, t: float) -> np.ndarray:
        """Linear interpolation of the position at parameter time t."""
        if not (self.t[0] <= t <= self.t[-1]):
            raise ValueError(f"t={t} outside sampled span [{self.t[0]}, {self.t[-1]}]")
        return np.array([np.interp(t, self.t, self.positions[:, i])
                         for i in range(3)])


# ---------------------------------------------------------------------------
# classical RK4 with step-doubling control
# ---------------------------------------------------------------------------

def _rk4_arrays(pos, vel, h, rhs):
    """One classical RK4 step (nodes 0, 1/2, 1/2, 1; weights 1/6, 1/3, 1/3, 1/6)."""
    k1p, k1v = vel, rhs(pos, vel)
    p2, v2 = pos + 0.5 * h * k1p, vel + 0.5 * h * k1v
    k2p, k2v = v2, rhs(p2, v2)
    p3, v3 = pos + 0.5 * h * k2p, vel + 0.5 * h * k2v
    k3p, k3v = v3, rhs(p3, v3)
    p4, v4 = pos + h * k3p, vel + h * k3v
    k4p, k4v = v4, rhs(p4, v4)
    new_pos = pos + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
    new_vel = vel + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return new_pos, new_vel


def rk4_step(state: GeodesicState, h: float, rhs=rhs_closed_form) -> GeodesicState:
    """One fixed RK4 step of the first-order (position, velocity) system."""
    if h <= 0:
        raise ValueError("step size must be positive")
    pos, vel = _rk4_arrays(state.position, state.velocity, h, rhs)
    return GeodesicState(pos, vel)


def integrate_fixed(state: GeodesicState, h: float, t_end: float,
                    rhs=rhs_closed_form) -> GeodesicState:
    """Fixed-step RK4 to t_end (for convergence studies); final partial step."""
    t, pos, vel = 0.0, state.position.copy(), state.velocity.copy()
    while t < t_end - 1e-15:
        step = min(h, t_end - t)
        pos, vel = _rk4_arrays(pos, vel, step, rhs)
        t += step
    return GeodesicState(pos, vel)


MAX_DRIFT = 1e-4  # constraint blowup threshold; aborts the ray


def integrate_batch(positions, velocities, cfg: IntegratorSettings,
                    rhs=rhs_closed_form):
    """Integrate a bundle of rays with shared step-doubling error control.

    Per step the error estimate is |two half steps - one full step| / 15,
    componentwise against abs_tol + rel_tol * |y|, and the step size follows
    the 1/5-power rule clamped to [h_min, h_max]; the controlling error is
    the worst over all active rays, so every ray shares one accepted time
    grid. Rays whose constraint drift exceeds MAX_DRIFT are aborted
    individually (frozen, excluded from control); if tolerance cannot be met
    at h_min all active rays abort with status 'aborted:step_underflow'.

    Returns (t_grid, positions, velocities, drift, statuses, n_samples):
    arrays of shape (N,), (N,n,3), (N,n,3), (N,n), a list of status strings,
    and per-ray sample counts (samples beyond a ray's abort index are frozen
    copies of its last accepted state).
    """
    pos = np.atleast_2d(np.asarray(positions, dtype=float)).copy()
    vel = np.atleast_2d(np.asarray(velocities, dtype=float)).copy()
    n = pos.shape[0]
    c0 = constraint_value(pos, vel)

    ts = [0.0]
    pos_hist = [pos.copy()]
    vel_hist = [vel.copy()]
    drift_hist = [np.abs(np.atleast_1d(c0) - 1.0)]
    status = np.array(["completed"] * n, dtype=object)
    active = np.ones(n, dtype=bool)
    n_samples = np.ones(n, dtype=int)

    t = 0.0
    h = cfg.h_init
    while t < cfg.t_end - 1e-14 and active.any():
        h = min(h, cfg.h_max, cfg.t_end - t)
        h = max(h, cfg.h_min)
        p1, v1 = _rk4_arrays(pos, vel, h, rhs)
        ph, vh = _rk4_arrays(pos, vel, 0.5 * h, rhs)
        p2, v2 = _rk4_arrays(ph, vh, 0.5 * h, rhs)
        err_p = np.abs(p2 - p1) / 15.0
        err_v = np.abs(v2 - v1) / 15.0
        scale_p = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(pos), np.abs(p2))
        scale_v = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(vel), np.abs(v2))
        ratios = np.maximum((err_p / scale_p).max(axis=-1),
                            (err_v / scale_v).max(axis=-1))
        ratio = ratios[active].max() if active.any() else 0.0
        if ratio <= 1.0:
            t += h
            pos[active] = p2[active]
            vel[active] = v2[active]
            drift = np.abs(np.atleast_1d(constraint_value(pos, vel)) - 1.0)
            blown = active & (drift > MAX_DRIFT)
            if blown.any():
                status[blown] = "aborted:constraint"
                active &= ~blown
            n_samples[active] += 1
            ts.append(t)
            pos_hist.append(pos.copy())
            vel_hist.append(vel.copy())
            drift_hist.append(drift)
        elif h <= cfg.h_min * (1 + 1e-12):
            status[active] = "aborted:step_underflow"
            active[:] = False
            break
        factor = 0.9 * ratio ** -0.2 if ratio > 0 else 5.0
        h = h * min(5.0, max(0.2, factor))

    return (np.asarray(ts), np.stack(pos_hist), np.stack(vel_hist),
            np.stack(drift_hist), list(status), n_samples)


def integrate(state: GeodesicState, cfg: IntegratorSettings,
              rhs=rhs_closed_form) -> RayTrajectory:
    """Integrate one ray with automatic step-size control.

    The initial velocity should satisfy the unit-speed constraint (use
    `normalize_velocity`); drift is recorded at every accepted step.
    """
    t, p, v, d, statuses, n_samp = integrate_batch(
        state.position[None, :], state.velocity[None, :], cfg, rhs=rhs)
    k = n_samp[0]
    return RayTrajectory(t=t[:k], positions=p[:k, 0], velocities=v[:k, 0],
                         drift=d[:k, 0], status=statuses[0])
