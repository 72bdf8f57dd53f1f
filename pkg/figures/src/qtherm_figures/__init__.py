"""qtherm-figures: turn qtherm CSV output into the standard figure set."""

__version__ = "0.1.0"

from .render import build_figure, render  # noqa: F401
from .specs import FIGURE_IDS, FigureSpec, spec_for  # noqa: F401
