"""Declarative ray-bundle experiments, batch execution, and diagnostics.

A scenario is a JSON-serializable description of a source geometry (point,
segment, or ring of seeds), an initial-direction rule (planar fan, parallel,
or cone), a time span, and integrator settings. `run` integrates the whole
bundle on a shared adaptive time grid; diagnostics (focal points from RMS
cross-sectional spread, metric-weighted wavefront perimeters) are computed
from the completed rays only.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field, asdict

import numpy as np

from hopflens.effective_geometry import metric_cartesian
from hopflens.geodesics import (
    IntegratorSettings,
    RayTrajectory,
    integrate_batch,
    normalize_velocity,
)

SOURCE_TYPES = ("point", "segment", "ring")
DIRECTION_TYPES = ("planar_fan", "parallel", "cone")


@dataclass(frozen=True)
class SourceSpec:
    """Seed geometry: a point, a segment of n equally spaced seeds, or a ring."""

    type: str
    point: tuple[float, float, float] | None = None
    start: tuple[float, float, float] | None = None
    end: tuple[float, float, float] | None = None
    center: tuple[float, float, float] | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.type not in SOURCE_TYPES:
            raise ValueError(f"unknown source type {self.type!r}")
        if self.type == "point" and self.point is None:
            raise ValueError("point source requires 'point'")
        if self.type == "segment":
            if self.start is None or self.end is None:
                raise ValueError("segment source requires 'start' and 'end'")
            if np.allclose(self.start, self.end):
                raise ValueError("segment endpoints must be distinct")
        if self.type == "ring":
            if self.center is None or self.radius is None:
                raise ValueError("ring source requires 'center' and 'radius'")
            if self.radius <= 0:
                raise ValueError("ring radius must be positive")


@dataclass(frozen=True)
class DirectionSpec:
    """Initial-direction rule applied at each seed (velocities normalized later).

    planar_fan: n directions uniformly spaced in angle within the plane z=0
    (point source only). parallel: every seed gets the same axis. cone: n
    directions around `axis` at fixed `half_angle`, azimuthally uniform
    (point source only).
    """

    type: str
    n: int
    axis: tuple[float, float, float] | None = None
    half_angle: float | None = None

    def __post_init__(self):
        if self.type not in DIRECTION_TYPES:
            raise ValueError(f"unknown direction type {self.type!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.type == "parallel" and self.axis is None:
            raise ValueError("parallel directions require 'axis'")
        if self.type == "cone":
            if self.axis is None or self.half_angle is None:
                raise ValueError("cone directions require 'axis' and 'half_angle'")
            if not (0 < 2 * self.half_angle < math.pi):
                raise ValueError("cone apex angle must lie in (0, pi)")


@dataclass(frozen=True)
class OutputSpec:
    trajectories_csv: str | None = None
    diagnostics_json: str | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    source: SourceSpec
    directions: DirectionSpec
    t_end: float
    integrator: IntegratorSettings = IntegratorSettings()
    outputs: OutputSpec = OutputSpec()

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.directions.type in ("planar_fan", "cone") \
                and self.source.type != "point":
            raise ValueError(
                f"{self.directions.type} directions require a point source")

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "source": {k: v for k, v in asdict(self.source).items()
                       if v is not None},
            "directions": {k: v for k, v in asdict(self.directions).items()
                           if v is not None},
            "t_end": self.t_end,
            "integrator": asdict(self.integrator),
        }
        d["integrator"].pop("t_end", None)
        outs = {k: v for k, v in asdict(self.outputs).items() if v is not None}
        if outs:
            d["outputs"] = outs
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        def _sub(section, spec_cls, allowed):
            raw = data.get(section)
            if not isinstance(raw, dict):
                raise ValueError(f"config is missing object field {section!r}")
            bad = set(raw) - set(allowed)
            if bad:
                raise ValueError(f"unknown keys in {section!r}: {sorted(bad)}")
            conv = {k: tuple(v) if isinstance(v, list) else v
                    for k, v in raw.items()}
            return spec_cls(**conv)

        if "t_end" not in data:
            raise ValueError("config is missing 't_end'")
        integ = data.get("integrator", {})
        if not isinstance(integ, dict):
            raise ValueError("'integrator' must be an object")
        allowed_integ = {"rel_tol", "abs_tol", "h_init", "h_min", "h_max"}
        bad = set(integ) - allowed_integ
        if bad:
            raise ValueError(f"unknown keys in 'integrator': {sorted(bad)}")
        outs = data.get("outputs", {})
        return cls(
            name=str(data.get("name", "scenario")),
            source=_sub("source", SourceSpec,
                        ("type", "point", "start", "end", "center", "radius")),
            directions=_sub("directions", DirectionSpec,
                            ("type", "n", "axis", "half_angle")),
            t_end=float(data["t_end"]),
            integrator=IntegratorSettings(t_end=float(data["t_end"]), **integ),
            outputs=OutputSpec(**outs),
        )


def load_config(path: str | os.PathLike) -> ScenarioConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid JSON in {path}: {exc}") from exc
    return ScenarioConfig.from_dict(data)


def seed_states(cfg: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
    """Seed positions and unit-speed initial velocities, shape (n, 3) each."""
    n = cfg.directions.n
    src, dirs = cfg.source, cfg.directions

    if src.type == "point":
        positions = np.tile(np.asarray(src.point, float), (n, 1))
    elif src.type == "segment":
        positions = np.linspace(src.start, src.end, n)
    else:  # ring
        phi = 2 * np.pi * np.arange(n) / n
        center = np.asarray(src.center, float)
        positions = center + src.radius * np.stack(
            [np.cos(phi), np.sin(phi), np.zeros(n)], axis=-1)

    if dirs.type == "planar_fan":
        phi = 2 * np.pi * np.arange(n) / n
        raw = np.stack([np.cos(phi), np.sin(phi), np.zeros(n)], axis=-1)
    elif dirs.type == "parallel":
        raw = np.tile(np.asarray(dirs.axis, float), (positions.shape[0], 1))
    else:  # cone
        axis = np.asarray(dirs.axis, float)
        axis = axis / np.linalg.norm(axis)
        # orthonormal frame transverse to the cone axis
        helper = np.array([1.0, 0.0, 0.0])
        if abs(axis @ helper) > 0.9:
            helper = np.array([0.0, 1.0, 0.0])
        e1 = np.cross(axis, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(axis, e1)
        phi = 2 * np.pi * np.arange(n) / n
        raw = (math.cos(dirs.half_angle) * axis
               + math.sin(dirs.half_angle)
               * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2))

    return positions, normalize_velocity(positions, raw)


@dataclass
class BundleResult:
    """Shared-grid integration output for one scenario."""

    config: ScenarioConfig
    t: np.ndarray                # (N,)
    positions: np.ndarray        # (N, n, 3)
    velocities: np.ndarray       # (N, n, 3)
    drift: np.ndarray            # (N, n)
    statuses: list[str]
    n_samples: np.ndarray        # (n,) accepted samples per ray

    @property
    def n_rays(self) -> int:
        return self.positions.shape[1]

    @property
    def n_aborted(self) -> int:
        return sum(1 for s in self.statuses if s != "completed")

    @property
    def completed_mask(self) -> np.ndarray:
        return np.array([s == "completed" for s in self.statuses])

    @property
    def degraded(self) -> bool:
        return self.n_aborted > 0.1 * self.n_rays

    @property
    def trajectories(self) -> list[RayTrajectory]:
        out = []
        for i, status in enumerate(self.statuses):
            k = self.n_samples[i]
            out.append(RayTrajectory(
                t=self.t[:k], positions=self.positions[:k, i],
                velocities=self.velocities[:k, i], drift=self.drift[:k, i],
                status=status))
        return out

    def positions_at(self, t: float, completed_only: bool = True) -> np.ndarray:
        """Same-t ray positions via linear interpolation between accepted steps."""
        if not (self.t[0] <= t <= self.t[-1]):
            raise ValueError(
                f"t={t} outside integration span [{self.t[0]}, {self.t[-1]}]")
        idx = np.searchsorted(self.t, t)
        if idx == 0:
            pts = self.positions[0]
        else:
            t0, t1 = self.t[idx - 1], self.t[idx]
            w = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            pts = (1 - w) * self.positions[idx - 1] + w * self.positions[idx]
        return pts[self.completed_mask] if completed_only else pts


def run(cfg: ScenarioConfig) -> BundleResult:
    """Integrate all rays of the scenario on a shared adaptive grid."""
    positions, velocities = seed_states(cfg)
    integ = cfg.integrator
    if integ.t_end != cfg.t_end:
        integ = IntegratorSettings(
            rel_tol=integ.rel_tol, abs_tol=integ.abs_tol, h_init=integ.h_init,
            h_min=integ.h_min, h_max=integ.h_max, t_end=cfg.t_end)
    t, pos, vel, drift, statuses, n_samples = integrate_batch(
        positions, velocities, integ)
    return BundleResult(config=cfg, t=t, positions=pos, velocities=vel,
                        drift=drift, statuses=statuses, n_samples=n_samples)


@dataclass(frozen=True)
class FocalPoint:
    t: float
    point: tuple[float, float, float]
    spread: float


def bundle_spread(result: BundleResult) -> np.ndarray:
    """RMS cross-sectional radius about the bundle centroid at each time sample."""
    mask = result.completed_mask
    if mask.sum() < 3:
        raise ValueError("focal diagnostics need at least 3 completed rays")
    pts = result.positions[:, mask, :]
    centroid = pts.mean(axis=1, keepdims=True)
    return np.sqrt(((pts - centroid) ** 2).sum(axis=-1).mean(axis=1))


def focal_points(result: BundleResult) -> list[FocalPoint]:
    """Interior local minima of the bundle's RMS spread along the time grid."""
    spread = bundle_spread(result)
    mask = result.completed_mask
    centroids = result.positions[:, mask, :].mean(axis=1)
    out = []
    for i in range(1, len(spread) - 1):
        if spread[i] < spread[i - 1] and spread[i] <= spread[i + 1]:
            out.append(FocalPoint(t=float(result.t[i]),
                                  point=tuple(centroids[i]),
                                  spread=float(spread[i])))
    return out


def wavefront_measure(result: BundleResult, t: float) -> tuple[float, float]:
    """(effective, Euclidean) perimeter of the same-t wavefront polyline.

    Effective length weights each closed-polyline segment by the effective
    metric at its midpoint; compare the effective value against 2*pi*t, the
    flat geodesic-disk perimeter at radius t.
    """
    if result.config.directions.type != "planar_fan":
        raise ValueError("wavefront perimeter requires a planar_fan scenario")
    pts = result.positions_at(t)
    nxt = np.roll(pts, -1, axis=0)
    seg = nxt - pts
    mid = 0.5 * (pts + nxt)
    m = metric_cartesian(mid)
    eff = np.sqrt(np.einsum('...ij,...i,...j->...', m, seg, seg)).sum()
    euclid = np.linalg.norm(seg, axis=-1).sum()
    return float(eff), float(euclid)


# ---------------------------------------------------------------------------
# bundled scenario builders
# ---------------------------------------------------------------------------

def build_fig2(n: int = 314, t_end: float = 8.0) -> ScenarioConfig:
    """Planar fan of n rays from the point (3,0,0) in the plane z=0."""
    return ScenarioConfig(
        name="fig2",
        source=SourceSpec(type="point", point=(3.0, 0.0, 0.0)),
        directions=DirectionSpec(type="planar_fan", n=n),
        t_end=t_end, integrator=IntegratorSettings(t_end=t_end))


def build_fig3(n: int = 60, t_end: float = 15.0) -> ScenarioConfig:
    """Longer-time planar fan from (3,0,0) showing scattered ray envelopes."""
    return ScenarioConfig(
        name="fig3",
        source=SourceSpec(type="point", point=(3.0, 0.0, 0.0)),
        directions=DirectionSpec(type="planar_fan", n=n),
        t_end=t_end, integrator=IntegratorSettings(t_end=t_end))


def build_fig4(n: int = 200, t_end: float = 15.0) -> ScenarioConfig:
    """Parallel rays toward -x from the segment x=5, -5<y<5, z=0."""
    return ScenarioConfig(
        name="fig4",
        source=SourceSpec(type="segment", start=(5.0, -5.0, 0.0),
                          end=(5.0, 5.0, 0.0)),
        directions=DirectionSpec(type="parallel", n=n, axis=(-1.0, 0.0, 0.0)),
        t_end=t_end, integrator=IntegratorSettings(t_end=t_end))


def build_fig5(n: int = 200, t_end: float = 15.0) -> ScenarioConfig:
    """Parallel rays toward -x from the segment x=5, y=0, -5<z<5."""
    return ScenarioConfig(
        name="fig5",
        source=SourceSpec(type="segment", start=(5.0, 0.0, -5.0),
                          end=(5.0, 0.0, 5.0)),
        directions=DirectionSpec(type="parallel", n=n, axis=(-1.0, 0.0, 0.0)),
        t_end=t_end, integrator=IntegratorSettings(t_end=t_end))


def build_fig6(n: int = 12, t_end: float = 14.0,
               half_angle: float = 0.188) -> ScenarioConfig:
    """Cone of n rays from (0,0,5) about the -z axis, focused back onto the axis.

    The default half-angle 0.188 rad is the aperture whose bundle, after a
    first convergence at the origin, meets the axis again at (0,0,-5); wider
    apertures (e.g. pi/4) leave the near-axis focusing region and re-cross
    the axis only far beyond (around z = -80).
    """
    return ScenarioConfig(
        name="fig6",
        source=SourceSpec(type="point", point=(0.0, 0.0, 5.0)),
        directions=DirectionSpec(type="cone", n=n, axis=(0.0, 0.0, -1.0),
                                 half_angle=half_angle),
        t_end=t_end, integrator=IntegratorSettings(t_end=t_end))


def build_fig7(n: int = 12, t_end: float = 12.0,
               radius: float = 1.0) -> ScenarioConfig:
    """Parallel -z pencil of n rays seeded on a ring of given radius at z=5."""
    return ScenarioConfig(
        name="fig7",
        source=SourceSpec(type="ring", center=(0.0, 0.0, 5.0), radius=radius),
        directions=DirectionSpec(type="parallel", n=n, axis=(0.0, 0.0, -1.0)),
        t_end=t_end, integrator=IntegratorSettings(t_end=t_end))


BUILDERS = {
    "fig2": build_fig2, "fig3": build_fig3, "fig4": build_fig4,
    "fig5": build_fig5, "fig6": build_fig6, "fig7": build_fig7,
}


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

def _atomic_write(path: str | os.PathLike, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def export_trajectories_csv(result: BundleResult,
                            path: str | os.PathLike) -> None:
    """Concatenated per-ray samples: ray_id, t, x, y, z, vx, vy, vz, drift."""
    lines = ["ray_id,t,x,y,z,vx,vy,vz,drift"]
    for i in range(result.n_rays):
        k = result.n_samples[i]
        for j in range(k):
            p = result.positions[j, i]
            v = result.velocities[j, i]
            lines.append("%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g"
                         % (i, result.t[j], p[0], p[1], p[2],
                            v[0], v[1], v[2], result.drift[j, i]))
    _atomic_write(path, "\n".join(lines) + "\n")


def diagnostics_dict(result: BundleResult) -> dict:
    """Focal points, wavefront table (fan scenarios), and abort counts."""
    diag: dict = {
        "scenario": result.config.name,
        "n_rays": result.n_rays,
        "n_completed": result.n_rays - result.n_aborted,
        "n_aborted": result.n_aborted,
        "statuses": list(result.statuses),
        "t_end": float(result.t[-1]),
        "max_drift": float(result.drift[:, result.completed_mask].max())
        if result.completed_mask.any() else None,
        "focal_points": [],
        "wavefronts": [],
    }
    if result.completed_mask.sum() >= 3:
        diag["focal_points"] = [
            {"t": fp.t, "point": list(fp.point), "spread": fp.spread}
            for fp in focal_points(result)]
    if result.config.directions.type == "planar_fan":
        for t in np.arange(1.0, math.floor(result.t[-1]) + 0.5):
            eff, euc = wavefront_measure(result, float(t))
            diag["wavefronts"].append({
                "t": float(t), "effective_perimeter": eff,
                "euclidean_perimeter": euc, "flat_perimeter": 2 * math.pi * t})
    return diag


def export_diagnostics_json(result: BundleResult,
                            path: str | os.PathLike) -> None:
    _atomic_write(path, json.dumps(diagnostics_dict(result), indent=2) + "\n")
