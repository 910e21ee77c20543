"""Acceptance gate for the figure renderer.

Generates real exports with the hopflens CLI once per session, then checks
that every figure renders from them and that the advertised features are
present: three isosurface families in the level-set figure, time coloring
in the disk figure, and focal markers in the focusing figures.
"""

import os

import pytest

from figplot import FigplotError, PlotJob, render
from hopflens import cli as hopflens_cli


@pytest.fixture(scope="session")
def export_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("exports")
    assert hopflens_cli.main(
        ["ricci", "--grid=-4,4,41", "--out", str(d / "ricci_grid.csv")]) == 0
    for fig in ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7"):
        assert hopflens_cli.main(
            ["scenario", "--builtin", fig,
             "--trajectories-csv", str(d / f"{fig}_trajectories.csv"),
             "--diagnostics-json", str(d / f"{fig}_diagnostics.json")]) == 0
    return d


def _render(export_dir, tmp_path, figure_id):
    out = tmp_path / f"{figure_id}.png"
    info = render(PlotJob(figure_id=figure_id, input_dir=str(export_dir),
                          output_path=str(out)))
    assert out.exists() and out.stat().st_size > 0
    return info


def test_fig1_three_isosurface_families(export_dir, tmp_path):
    info = _render(export_dir, tmp_path, "fig1")
    assert info["isosurfaces"] == 3
    assert info["levels"] == [-0.5, 0.0, 0.5]
    assert all(count > 0 for count in info["faces"])


def test_fig2_colors_by_t(export_dir, tmp_path):
    info = _render(export_dir, tmp_path, "fig2")
    assert info["colored_by"] == "t"
    assert info["rays"] == 314
    t_lo, t_hi = info["t_range"]
    assert t_lo == 0.0 and t_hi == pytest.approx(8.0)


@pytest.mark.parametrize("figure_id,rays", [("fig3", 60), ("fig4", 200),
                                            ("fig5", 200)])
def test_bundle_figures_render(export_dir, tmp_path, figure_id, rays):
    info = _render(export_dir, tmp_path, figure_id)
    assert info["rays"] == rays


@pytest.mark.parametrize("figure_id", ["fig6", "fig7"])
def test_focusing_figures_mark_focal_points(export_dir, tmp_path, figure_id):
    info = _render(export_dir, tmp_path, figure_id)
    assert info["rays"] == 12
    assert info["focal_markers"] == 2


def test_cli_round_trip(export_dir, tmp_path):
    from figplot.cli import main
    out = tmp_path / "fig7.png"
    assert main(["fig7", "--in", str(export_dir), "--out", str(out)]) == 0
    assert out.exists()


def test_unknown_figure_id(export_dir, tmp_path):
    with pytest.raises(FigplotError):
        PlotJob(figure_id="fig99", input_dir=str(export_dir),
                output_path=str(tmp_path / "x.png"))


def test_missing_input_reported_before_rendering(tmp_path):
    empty = tmp_path / "empty-dir"
    empty.mkdir()
    with pytest.raises(FigplotError, match="fig2_trajectories.csv"):
        PlotJob(figure_id="fig2", input_dir=str(empty),
                output_path=str(tmp_path / "x.png"))


def test_empty_trajectory_file_errors_without_image(tmp_path):
    d = tmp_path / "exports"
    d.mkdir()
    (d / "fig2_trajectories.csv").write_text("ray_id,t,x,y,z,vx,vy,vz,drift\n")
    out = tmp_path / "fig2.png"
    with pytest.raises(FigplotError):
        render(PlotJob(figure_id="fig2", input_dir=str(d),
                       output_path=str(out)))
    assert not out.exists()


def test_cli_error_exit_code(tmp_path):
    from figplot.cli import main
    empty = tmp_path / "empty-dir"
    empty.mkdir()
    assert main(["fig2", "--in", str(empty),
                 "--out", str(tmp_path / "x.png")]) == 2


def test_rendering_is_read_only(export_dir, tmp_path):
    before = {name: (os.path.getsize(export_dir / name),
                     open(export_dir / name, "rb").read(64))
              for name in os.listdir(export_dir)}
    _render(export_dir, tmp_path, "fig6")
    after = {name: (os.path.getsize(export_dir / name),
                    open(export_dir / name, "rb").read(64))
             for name in os.listdir(export_dir)}
    assert before == after
