"""Figure generation for winding-wavemap run directories."""

__version__ = "0.1.0"

from .figures import FIGURE_KINDS, FigureSpec, MissingColumnError, RenderResult, render

__all__ = ["FIGURE_KINDS", "FigureSpec", "MissingColumnError", "RenderResult", "render"]
