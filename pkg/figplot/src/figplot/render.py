"""Rendering backend: one function per figure family, plus job validation."""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from mpl_toolkits.mplot3d.art3d import Poly3DCollection  # noqa: E402
from skimage.measure import marching_cubes  # noqa: E402

FIGURE_IDS = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7")

# input files expected inside the --in directory, per figure
REQUIRED_INPUTS = {
    "fig1": ("ricci_grid.csv",),
    "fig2": ("fig2_trajectories.csv",),
    "fig3": ("fig3_trajectories.csv",),
    "fig4": ("fig4_trajectories.csv",),
    "fig5": ("fig5_trajectories.csv",),
    "fig6": ("fig6_trajectories.csv", "fig6_diagnostics.json"),
    "fig7": ("fig7_trajectories.csv", "fig7_diagnostics.json"),
}

ISO_LEVELS = (-0.5, 0.0, 0.5)
ISO_COLORS = ("tab:blue", "tab:green", "tab:red")
WEDGE = (0.0, math.pi / 2)  # azimuthal cut revealing the interior
FOCAL_SPREAD_MAX = 0.15  # only well-converged minima get a marker
DPI = 150


class FigplotError(Exception):
    """Invalid job or unusable input; maps to a nonzero exit."""


@dataclass(frozen=True)
class PlotJob:
    """One figure request: figure id, input directory, output image path."""

    figure_id: str
    input_dir: str
    output_path: str

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise FigplotError(
                f"unknown figure id {self.figure_id!r}; "
                f"choose from {', '.join(FIGURE_IDS)}")
        if not os.path.isdir(self.input_dir):
            raise FigplotError(f"input directory not found: {self.input_dir}")
        missing = [name for name in REQUIRED_INPUTS[self.figure_id]
                   if not os.path.isfile(os.path.join(self.input_dir, name))]
        if missing:
            raise FigplotError(
                f"{self.figure_id} needs input file(s) {', '.join(missing)} "
                f"in {self.input_dir}")

    def input(self, name: str) -> str:
        return os.path.join(self.input_dir, name)


def _load_trajectories(path: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(ray_id, t, xyz) arrays from a hopflens trajectory CSV."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # empty-file notice
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise FigplotError(f"malformed trajectory CSV {path}: {exc}") from exc
    if data.size == 0:
        raise FigplotError(f"trajectory CSV {path} contains no samples")
    if data.shape[1] != 9:
        raise FigplotError(
            f"trajectory CSV {path} has {data.shape[1]} columns, expected 9 "
            "(ray_id,t,x,y,z,vx,vy,vz,drift)")
    return data[:, 0].astype(int), data[:, 1], data[:, 2:5]


def _load_focal_points(path: str) -> list[dict]:
    try:
        with open(path) as fh:
            diag = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FigplotError(f"malformed diagnostics JSON {path}: {exc}") from exc
    fps = diag.get("focal_points")
    if not isinstance(fps, list):
        raise FigplotError(f"diagnostics JSON {path} lacks 'focal_points'")
    return fps


def _save(fig, path: str) -> None:
    try:
        fig.savefig(path, dpi=DPI)
    finally:
        plt.close(fig)


def _render_fig1(job: PlotJob) -> dict:
    """Three Ricci level-set families with an azimuthal wedge removed."""
    path = job.input("ricci_grid.csv")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise FigplotError(f"malformed grid CSV {path}: {exc}") from exc
    if data.size == 0 or data.shape[1] != 4:
        raise FigplotError(f"grid CSV {path} must have rows of x,y,z,R")
    n = round(len(data) ** (1.0 / 3.0))
    if n < 2 or n ** 3 != len(data):
        raise FigplotError(
            f"grid CSV {path} has {len(data)} rows, not a cubic lattice")
    axis = np.unique(data[:, 0])
    if len(axis) != n:
        raise FigplotError(f"grid CSV {path} is not a regular cubic lattice")
    lo, spacing = axis[0], axis[1] - axis[0]
    volume = data[:, 3].reshape(n, n, n)

    fig = plt.figure(figsize=(7, 7))
    ax = fig.add_subplot(projection="3d")
    families = 0
    face_counts = []
    for level, color in zip(ISO_LEVELS, ISO_COLORS):
        verts, faces, _, _ = marching_cubes(
            volume, level=level, spacing=(spacing,) * 3)
        verts = verts + lo
        centroid = verts[faces].mean(axis=1)
        phi = np.mod(np.arctan2(centroid[:, 1], centroid[:, 0]), 2 * math.pi)
        keep = ~((phi > WEDGE[0]) & (phi < WEDGE[1]))
        faces = faces[keep]
        if len(faces) == 0:
            continue
        mesh = Poly3DCollection(verts[faces], alpha=0.55)
        mesh.set_facecolor(color)
        mesh.set_edgecolor("none")
        ax.add_collection3d(mesh)
        families += 1
        face_counts.append(len(faces))
    if families < len(ISO_LEVELS):
        raise FigplotError(
            f"grid range does not cross all levels {ISO_LEVELS}; "
            f"only {families} isosurface families found")
    span = (lo, lo + spacing * (n - 1))
    ax.set_xlim(*span); ax.set_ylim(*span); ax.set_zlim(*span)
    ax.set_xlabel("x"); ax.set_ylabel("y"); ax.set_zlabel("z")
    ax.set_title("Ricci scalar level sets R = -0.5, 0, 0.5 (wedge removed)")
    _save(fig, job.output_path)
    return {"isosurfaces": families, "levels": list(ISO_LEVELS),
            "faces": face_counts}


def _render_fig2(job: PlotJob) -> dict:
    """Geodesic disks from a planar fan, colored by the time parameter."""
    ray_id, t, xyz = _load_trajectories(job.input("fig2_trajectories.csv"))
    fig, ax = plt.subplots(figsize=(7, 6))
    sc = ax.scatter(xyz[:, 0], xyz[:, 1], c=t, cmap="viridis", s=1.5,
                    rasterized=True)
    fig.colorbar(sc, ax=ax, label="t")
    ax.plot(*_unit_ring(), color="black", lw=1.0, ls="--")
    ax.set_aspect("equal")
    ax.set_xlabel("x"); ax.set_ylabel("y")
    ax.set_title("Geodesic disks of a planar fan, colored by t")
    _save(fig, job.output_path)
    return {"colored_by": "t", "t_range": [float(t.min()), float(t.max())],
            "rays": int(ray_id.max()) + 1}


def _unit_ring(n: int = 200) -> tuple[np.ndarray, np.ndarray]:
    phi = np.linspace(0, 2 * np.pi, n)
    return np.cos(phi), np.sin(phi)


def _render_bundle_2d(job: PlotJob, csv_name: str, cols: tuple[int, int],
                      labels: tuple[str, str], title: str) -> dict:
    ray_id, _, xyz = _load_trajectories(job.input(csv_name))
    fig, ax = plt.subplots(figsize=(7, 6))
    for rid in np.unique(ray_id):
        sel = ray_id == rid
        ax.plot(xyz[sel, cols[0]], xyz[sel, cols[1]], lw=0.6,
                color="tab:blue", alpha=0.7)
    if cols == (0, 1):
        ax.plot(*_unit_ring(), color="black", lw=1.0, ls="--")
    else:
        ax.plot([-1, 1], [0, 0], color="black", lw=2.0)
    ax.set_aspect("equal")
    ax.set_xlabel(labels[0]); ax.set_ylabel(labels[1])
    ax.set_title(title)
    _save(fig, job.output_path)
    return {"rays": len(np.unique(ray_id))}


def _render_focusing_3d(job: PlotJob, csv_name: str, json_name: str,
                        title: str) -> dict:
    ray_id, _, xyz = _load_trajectories(job.input(csv_name))
    fps = _load_focal_points(job.input(json_name))
    marked = [fp for fp in fps if fp.get("spread", np.inf) < FOCAL_SPREAD_MAX]
    fig = plt.figure(figsize=(7, 7))
    ax = fig.add_subplot(projection="3d")
    for rid in np.unique(ray_id):
        sel = ray_id == rid
        ax.plot(xyz[sel, 0], xyz[sel, 1], xyz[sel, 2], lw=0.8,
                color="tab:blue", alpha=0.8)
    rx, ry = _unit_ring()
    ax.plot(rx, ry, np.zeros_like(rx), color="black", lw=1.5)
    for fp in marked:
        px, py, pz = fp["point"]
        ax.scatter([px], [py], [pz], color="red", s=60, marker="o",
                   depthshade=False)
        ax.text(px, py, pz, f"  t={fp['t']:.2f}", fontsize=8)
    ax.set_xlabel("x"); ax.set_ylabel("y"); ax.set_zlabel("z")
    ax.set_title(title)
    _save(fig, job.output_path)
    return {"rays": len(np.unique(ray_id)), "focal_markers": len(marked)}


def render(job: PlotJob) -> dict:
    """Render the job's figure to its output path; returns a summary dict."""
    if job.figure_id == "fig1":
        return _render_fig1(job)
    if job.figure_id == "fig2":
        return _render_fig2(job)
    if job.figure_id == "fig3":
        return _render_bundle_2d(
            job, "fig3_trajectories.csv", (0, 1), ("x", "y"),
            "Planar fan at long times: scattered ray bundle")
    if job.figure_id == "fig4":
        return _render_bundle_2d(
            job, "fig4_trajectories.csv", (0, 1), ("x", "y"),
            "Parallel in-plane rays deflected by the soliton ring")
    if job.figure_id == "fig5":
        return _render_bundle_2d(
            job, "fig5_trajectories.csv", (0, 2), ("x", "z"),
            "Parallel transverse rays deflected by the soliton ring")
    if job.figure_id == "fig6":
        return _render_focusing_3d(
            job, "fig6_trajectories.csv", "fig6_diagnostics.json",
            "Cone pencil from (0,0,5): on-axis refocusing")
    return _render_focusing_3d(
        job, "fig7_trajectories.csv", "fig7_diagnostics.json",
        "Parallel ring pencil from z=5: two focal points")
