"""Figure rendering for chiralfiber CSV/JSON artifacts."""

from .render import FIGURE_IDS, FigureJob, SchemaMismatch, render

__all__ = ["FIGURE_IDS", "FigureJob", "SchemaMismatch", "render"]
__version__ = "0.1.0"
