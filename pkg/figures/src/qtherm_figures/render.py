"""Build and save the twelve standard figures from runner CSV output.

Rendering is pure over the input files: fixed styles, fixed sizes, no
timestamps, so re-rendering the same CSVs reproduces the images byte for
byte.  Every scaling plot carries a slope -1/2 guide line tagged with
gid 'guide-slope'.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import columns, read_csv  # noqa: E402
from .specs import FigureSpec, resolve_inputs, spec_for, tag_of  # noqa: E402

_FIGSIZE = (6.0, 4.0)
_COLORS = plt.rcParams["axes.prop_cycle"].by_key()["color"]


def _color_for(value, ordered_values):
    return _COLORS[sorted(ordered_values).index(value) % len(_COLORS)]


def _add_guide(ax, x, y, slope, gid="guide-slope"):
    """Power-law guide anchored to the first data point."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    anchor = 1.3 * y[0] / x[0] ** slope
    ax.plot(x, anchor * x ** slope, "k--", linewidth=1.0,
            label=f"slope {slope:g}", gid=gid)


def _check_band(lo, hi, path):
    if lo > hi:
        raise ValueError(f"band in {path} has lo={lo} > hi={hi}")


def _pair_by_tag(data_paths, band_paths, what):
    bands = {tag_of(p): p for p in band_paths}
    pairs = []
    for dp in data_paths:
        tag = tag_of(dp)
        if tag not in bands:
            raise FileNotFoundError(f"no {what} band file for tag '{tag}'")
        pairs.append((dp, bands[tag]))
    return pairs


def _scaling_axes(ax, table, path, value_col, spec):
    ks, gammas, values = columns(table, path, "K", "gamma[W]", value_col)
    for gamma in sorted(set(gammas)):
        sel = gammas == gamma
        ax.plot(ks[sel], values[sel], "o-", color=_color_for(gamma, set(gammas)),
                label=f"gamma = {gamma:g}W")
    if spec.guide_slope is not None:
        first = gammas == sorted(set(gammas))[0]
        _add_guide(ax, ks[first], values[first], spec.guide_slope)
    ax.set_xscale(spec.xscale)
    ax.set_yscale(spec.yscale)
    ax.set_xlabel("K")
    ax.legend(fontsize=8)


def _fig_overlaps(spec, files):
    table = read_csv(files["overlaps__*.csv"][0])
    path = files["overlaps__*.csv"][0]
    k_col, omega, overlap = columns(table, path, "k", "omega[W]", "overlap_sq")
    levels = sorted(set(int(v) for v in k_col))
    fig, axes = plt.subplots(len(levels), 1, figsize=(6.0, 3.0 * len(levels)),
                             squeeze=False)
    for ax, level in zip(axes[:, 0], levels):
        sel = k_col == level
        ax.plot(omega[sel], overlap[sel], "o-", markersize=3,
                label=f"level k = {level}")
        ax.set_xlabel("mode energy (W)")
        ax.set_ylabel("overlap")
        ax.legend(fontsize=8)
    fig.suptitle(spec.title)
    return fig


def _fig_ipr_like(spec, files, pattern, value_col, time_col=None):
    path = files[pattern][0]
    table = read_csv(path)
    ks, gammas, values = columns(table, path, "K", "gamma[W]", value_col)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for k in sorted(set(ks)):
        sel = ks == k
        ax.plot(gammas[sel], values[sel], "o-", color=_color_for(k, set(ks)),
                markersize=3, label=f"K = {int(k)}")
    ax.set_xscale(spec.xscale)
    ax.set_yscale(spec.yscale)
    ax.set_xlabel("coupling strength (W)")
    ax.set_ylabel(value_col)
    ax.set_title(spec.title)
    ax.legend(fontsize=8)
    return fig


def _fig_scatter(spec, files, value_cols, band_selector):
    pairs = _pair_by_tag(files["static_scatter__*.csv"],
                         files["equilibrium_band__*.csv"], "equilibrium")
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for idx, (data_path, band_path) in enumerate(pairs):
        table = read_csv(data_path)
        i, p = columns(table, data_path, "i", value_cols)
        color = _COLORS[idx % len(_COLORS)]
        ax.plot(i, p, "o", markersize=4, color=color, label=tag_of(data_path))
        band = read_csv(band_path)
        k_col, lo_col, hi_col = columns(band, band_path, "k", "lo", "hi")
        row = band_selector(table, data_path, k_col)
        lo, hi = float(lo_col[row]), float(hi_col[row])
        _check_band(lo, hi, band_path)
        ax.axhspan(lo, hi, color=color, alpha=0.25, linewidth=0)
    ax.set_xlabel("sample")
    ax.set_ylabel("occupancy")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(spec.title)
    ax.legend(fontsize=7)
    return fig


def _fig_static_scatter(spec, files):
    return _fig_scatter(spec, files, "p0", lambda table, path, k_col: int(
        np.nonzero(k_col == 0)[0][0]))


def _fig_bath_level_scatter(spec, files):
    def selector(table, path, k_col):
        (k_bath,) = columns(table, path, "k_bath")
        return int(np.nonzero(k_col == k_bath[0])[0][0])

    return _fig_scatter(spec, files, "p_bath", selector)


def _fig_series(spec, files, series_pattern, band_pattern=None, band_reader=None):
    path = files[series_pattern][0]
    table = read_csv(path)
    idx, t, p0 = columns(table, path, "sample_index", "t[1/W]", "p0")
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for sample in sorted(set(idx)):
        sel = idx == sample
        ax.plot(t[sel], p0[sel], color="0.4", linewidth=0.9)
    if band_pattern is not None:
        band_reader(ax, files[band_pattern][0])
    ax.set_xlabel("time (1/W)")
    ax.set_ylabel("system occupancy")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(spec.title)
    return fig


def _quench_bands(ax, band_path):
    band = read_csv(band_path)
    which, lo_col, hi_col = columns(band, band_path, "which", "lo", "hi")
    shades = {"initial": "tab:blue", "final": "tab:red"}
    for row, name in enumerate(which):
        lo, hi = float(lo_col[row]), float(hi_col[row])
        _check_band(lo, hi, band_path)
        ax.axhspan(lo, hi, color=shades.get(name, "0.7"), alpha=0.25,
                   linewidth=0, label=f"{name} equilibrium")
    ax.legend(fontsize=8)


def _bath_band(ax, band_path):
    band = read_csv(band_path)
    lo_col, hi_col = columns(band, band_path, "lo", "hi")
    lo, hi = float(lo_col[0]), float(hi_col[0])
    _check_band(lo, hi, band_path)
    ax.axhspan(lo, hi, color="tab:red", alpha=0.25, linewidth=0,
               label="equilibrium")
    ax.legend(fontsize=8)


def _fig_time_average(spec, files):
    path = files["time_average_scaling.csv"][0]
    table = read_csv(path)
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
    for ax, col, label in zip(axes, ("indicator_inf", "sigma_av"),
                              ("infinite-time indicator", "temporal fluctuations")):
        _scaling_axes(ax, table, path, col, spec)
        ax.set_ylabel(label)
    fig.suptitle(spec.title)
    return fig


def _fig_scaling_single(spec, files, pattern, value_col, ylabel):
    path = files[pattern][0]
    table = read_csv(path)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    _scaling_axes(ax, table, path, value_col, spec)
    ax.set_ylabel(ylabel)
    ax.set_title(spec.title)
    return fig


def _fig_bath_single(spec, files):
    path = files["bath_single__*.csv"][0]
    table = read_csv(path)
    t, eig, ref, eq = columns(table, path, "t[1/W]", "p0_eigenstate",
                              "p0_reference", "p0_equilibrium")
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(t, eig, "k-", linewidth=1.2, label="bath eigenstate")
    ax.plot(t, ref, "r-", linewidth=1.0, label="reference thermal bath")
    ax.plot(t, eq, "b:", linewidth=1.2, label="equilibrium")
    ax.set_xlabel("time (1/W)")
    ax.set_ylabel("system occupancy")
    ax.set_title(spec.title)
    ax.legend(fontsize=8)
    return fig


def build_figure(fig_id: int, input_dir) -> "plt.Figure":
    """Assemble the figure in memory (used by render and by tests)."""
    spec = spec_for(fig_id)
    files = resolve_inputs(spec, input_dir)
    if fig_id == 1:
        return _fig_overlaps(spec, files)
    if fig_id == 2:
        return _fig_ipr_like(spec, files, "ipr_scan.csv", "ipr0")
    if fig_id == 3:
        return _fig_static_scatter(spec, files)
    if fig_id == 4:
        return _fig_bath_level_scatter(spec, files)
    if fig_id == 5:
        return _fig_scaling_single(spec, files, "static_indicator_scaling.csv",
                                   "indicator", "thermalization indicator")
    if fig_id == 6:
        return _fig_series(spec, files, "quench_series__*.csv",
                           "quench_bands__*.csv", _quench_bands)
    if fig_id == 7:
        return _fig_ipr_like(spec, files, "quench_ipr_scan.csv", "ipr0_t")
    if fig_id == 8:
        return _fig_scaling_single(spec, files, "quench_indicator_scaling.csv",
                                   "indicator", "post-quench indicator")
    if fig_id == 9:
        return _fig_time_average(spec, files)
    if fig_id == 10:
        return _fig_ipr_like(spec, files, "bath_loc_coefficient.csv", "D")
    if fig_id == 11:
        return _fig_series(spec, files, "bath_series__*.csv",
                           "bath_band__*.csv", _bath_band)
    return _fig_bath_single(spec, files)


def render(fig_id: int, input_dir, output_dir) -> tuple[Path, Path]:
    """Write raster and vector images; returns (png_path, pdf_path)."""
    spec = spec_for(fig_id)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    fig = build_figure(fig_id, input_dir)
    base = output_dir / f"fig{fig_id:02d}_{spec.slug}"
    png, pdf = base.with_suffix(".png"), base.with_suffix(".pdf")
    try:
        fig.savefig(png, dpi=150)
        # a pinned CreationDate keeps the vector output reproducible
        fig.savefig(pdf, metadata={"CreationDate": None})
    finally:
        plt.close(fig)
    return png, pdf
