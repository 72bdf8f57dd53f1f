"""Renderer unit tests on small synthetic CSV files."""

import numpy as np
import pytest

from qtherm_figures.io import MissingColumnError, read_csv
from qtherm_figures.render import build_figure, render
from qtherm_figures.specs import FIGURE_IDS, resolve_inputs, spec_for, tag_of


def _write(path, header, rows):
    lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
    path.write_text("\n".join(lines) + "\n")


def _scaling_csv(path, value_col="indicator"):
    rows = []
    for gamma in (0.1, 0.2):
        for k in (20, 40, 80):
            rows.append((k, gamma, 10, 0.5 / np.sqrt(k) * (1 + gamma), 0.3))
    _write(path, ["K", "gamma[W]", "M", value_col, "bound"], rows)


# ---------------------------------------------------------------------------
# specs and io
# ---------------------------------------------------------------------------

def test_spec_catalogue():
    assert FIGURE_IDS == tuple(range(1, 13))
    assert spec_for(5).guide_slope == -0.5
    with pytest.raises(ValueError, match="figure id"):
        spec_for(13)
    assert tag_of("static_scatter__K40_g0.2_e0.2.csv") == "K40_g0.2_e0.2"
    assert tag_of("ipr_scan.csv") == ""


def test_resolve_inputs_missing(tmp_path):
    with pytest.raises(FileNotFoundError, match="ipr_scan.csv"):
        resolve_inputs(spec_for(2), tmp_path)


def test_read_csv_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError, match="empty"):
        read_csv(empty)
    headed = tmp_path / "h.csv"
    headed.write_text("a,b\n")
    with pytest.raises(ValueError, match="no data rows"):
        read_csv(headed)


def test_missing_column_is_named(tmp_path):
    _write(tmp_path / "ipr_scan.csv", ["K", "gamma[W]", "WRONG"],
           [(10, 0.1, 0.5)])
    with pytest.raises(MissingColumnError, match="ipr0"):
        build_figure(2, tmp_path)


def test_empty_data_no_partial_image(tmp_path):
    (tmp_path / "ipr_scan.csv").write_text("K,gamma[W],ipr0\n")
    out = tmp_path / "img"
    with pytest.raises(ValueError, match="no data rows"):
        render(2, tmp_path, out)
    assert not list(out.glob("*")) if out.exists() else True


# ---------------------------------------------------------------------------
# figure structure
# ---------------------------------------------------------------------------

def test_scaling_figure_has_guide_and_series(tmp_path):
    _scaling_csv(tmp_path / "static_indicator_scaling.csv")
    fig = build_figure(5, tmp_path)
    (ax,) = fig.axes
    assert ax.get_xscale() == "log" and ax.get_yscale() == "log"
    lines = ax.get_lines()
    guides = [ln for ln in lines if ln.get_gid() == "guide-slope"]
    assert len(guides) == 1
    assert len(lines) == 3  # two gamma curves + guide
    # the guide really has slope -1/2 in log-log coordinates
    gx, gy = guides[0].get_xdata(), guides[0].get_ydata()
    slope = np.polyfit(np.log(gx), np.log(gy), 1)[0]
    assert slope == pytest.approx(-0.5, abs=1e-12)


def test_band_validation(tmp_path):
    _write(tmp_path / "static_scatter__t.csv",
           ["i", "E[W]", "T[W]", "p0", "p0_gc", "k_bath", "p_bath", "p_bath_gc"],
           [(0, -1.0, 0.45, 0.4, 0.42, 3, 0.9, 0.5)])
    _write(tmp_path / "equilibrium_band__t.csv",
           ["k", "T_lo[W]", "T_hi[W]", "lo", "hi"],
           [(0, 0.4, 0.5, 0.48, 0.38), (3, 0.4, 0.5, 0.4, 0.6)])
    with pytest.raises(ValueError, match="lo=0.48"):
        build_figure(3, tmp_path)


def test_scatter_pairs_by_tag(tmp_path):
    for tag in ("K40_g0.2_e0.2", "K40_g0.2_e-0.2"):
        _write(tmp_path / f"static_scatter__{tag}.csv",
               ["i", "E[W]", "T[W]", "p0", "p0_gc", "k_bath", "p_bath", "p_bath_gc"],
               [(i, -1.0, 0.45, 0.4 + 0.01 * i, 0.42, 3, 0.5, 0.5) for i in range(5)])
        _write(tmp_path / f"equilibrium_band__{tag}.csv",
               ["k", "T_lo[W]", "T_hi[W]", "lo", "hi"],
               [(0, 0.4, 0.5, 0.38, 0.48), (3, 0.4, 0.5, 0.4, 0.6)])
    fig = build_figure(3, tmp_path)
    (ax,) = fig.axes
    assert len(ax.get_lines()) == 2  # one scatter series per tag
    assert len(ax.patches) == 2  # one shaded band per tag


def test_series_figure(tmp_path):
    rows = []
    for idx in (0, 1, 2):
        for t in np.linspace(0, 10, 7):
            rows.append((idx, t, 0.1 * idx + 0.02 * t))
    _write(tmp_path / "quench_series__x.csv", ["sample_index", "t[1/W]", "p0"], rows)
    _write(tmp_path / "quench_bands__x.csv", ["which", "lo", "hi"],
           [("initial", 0.35, 0.45), ("final", 0.55, 0.65)])
    fig = build_figure(6, tmp_path)
    (ax,) = fig.axes
    assert len(ax.get_lines()) == 3
    assert len(ax.patches) == 2


def test_render_writes_raster_and_vector(tmp_path):
    _scaling_csv(tmp_path / "static_indicator_scaling.csv")
    png, pdf = render(5, tmp_path, tmp_path / "img")
    assert png.exists() and png.suffix == ".png"
    assert pdf.exists() and pdf.suffix == ".pdf"


def test_render_deterministic(tmp_path):
    _scaling_csv(tmp_path / "static_indicator_scaling.csv")
    png1, pdf1 = render(5, tmp_path, tmp_path / "a")
    png2, pdf2 = render(5, tmp_path, tmp_path / "b")
    assert png1.read_bytes() == png2.read_bytes()
    assert pdf1.read_bytes() == pdf2.read_bytes()


def test_cli_errors(tmp_path):
    from qtherm_figures.cli import main

    assert main(["render", "--fig", "nope", "--in", str(tmp_path),
                 "--out", str(tmp_path)]) == 2
    assert main(["render", "--fig", "2", "--in", str(tmp_path / "missing"),
                 "--out", str(tmp_path)]) == 2
    assert main(["render", "--fig", "2", "--in", str(tmp_path),
                 "--out", str(tmp_path)]) == 1  # no ipr_scan.csv present
