"""Figure catalogue: which CSV files feed each of the twelve figures.

Input entries are glob patterns relative to the runner's output directory.
Scatter/series figures pair each data file with its band file through the
shared parameter tag (the part of the name between '__' and '.csv').
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class FigureSpec:
    fig_id: int
    slug: str
    title: str
    inputs: tuple[str, ...]
    xscale: str = "linear"
    yscale: str = "linear"
    guide_slope: float | None = None


_SPECS = {
    1: FigureSpec(1, "overlaps", "Mode overlaps of the system and a bath level",
                  ("overlaps__*.csv",)),
    2: FigureSpec(2, "ipr_scan", "IPR of the system level vs coupling strength",
                  ("ipr_scan.csv",), yscale="log"),
    3: FigureSpec(3, "static_scatter", "Eigenstate system occupancies vs equilibrium band",
                  ("static_scatter__*.csv", "equilibrium_band__*.csv")),
    4: FigureSpec(4, "bath_level_scatter", "Eigenstate bath-level occupancies",
                  ("static_scatter__*.csv", "equilibrium_band__*.csv")),
    5: FigureSpec(5, "static_indicator", "Thermalization indicator vs system size",
                  ("static_indicator_scaling.csv",), xscale="log", yscale="log",
                  guide_slope=-0.5),
    6: FigureSpec(6, "quench_series", "System occupancy after the quench",
                  ("quench_series__*.csv", "quench_bands__*.csv")),
    7: FigureSpec(7, "quench_ipr_scan", "Post-quench IPR vs coupling strength",
                  ("quench_ipr_scan.csv",), yscale="log"),
    8: FigureSpec(8, "quench_indicator", "Post-quench indicator vs system size",
                  ("quench_indicator_scaling.csv",), xscale="log", yscale="log",
                  guide_slope=-0.5),
    9: FigureSpec(9, "time_average", "Infinite-time indicator and temporal fluctuations",
                  ("time_average_scaling.csv",), xscale="log", yscale="log",
                  guide_slope=-0.5),
    10: FigureSpec(10, "loc_coefficient", "Localization coefficient vs coupling strength",
                   ("bath_loc_coefficient.csv",), yscale="log"),
    11: FigureSpec(11, "bath_series", "System occupancy for initial bath eigenstates",
                   ("bath_series__*.csv", "bath_band__*.csv")),
    12: FigureSpec(12, "bath_single", "Single bath eigenstate vs reference evolution",
                   ("bath_single__*.csv",)),
}

FIGURE_IDS = tuple(sorted(_SPECS))


def spec_for(fig_id: int) -> FigureSpec:
    if fig_id not in _SPECS:
        raise ValueError(f"figure id must be one of {FIGURE_IDS}, got {fig_id}")
    return _SPECS[fig_id]


def resolve_inputs(spec: FigureSpec, input_dir) -> dict[str, list[Path]]:
    """Match each input pattern; every pattern must hit at least one file."""
    input_dir = Path(input_dir)
    found = {}
    for pattern in spec.inputs:
        matches = sorted(input_dir.glob(pattern))
        if not matches:
            raise FileNotFoundError(
                f"figure {spec.fig_id} needs '{pattern}' in {input_dir}")
        found[pattern] = matches
    return found


def tag_of(path) -> str:
    """Parameter tag of a stamped file name (empty for unstamped files)."""
    stem = Path(path).stem
    return stem.split("__", 1)[1] if "__" in stem else ""
