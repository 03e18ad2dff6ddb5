"""Render figures from rashomon-al plot-data CSVs."""

__version__ = "0.1.0"

from .figures import FigureSpec, load_spec_file, render

__all__ = ["FigureSpec", "render", "load_spec_file"]
