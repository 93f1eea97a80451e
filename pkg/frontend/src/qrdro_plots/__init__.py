"""Figure panels for quick-response experiment CSV output."""

from .figures import FigureSpec, build_figure, load_rows, render

__all__ = ["FigureSpec", "build_figure", "load_rows", "render"]
