"""Figure rendering for simulator CSV output."""

__version__ = "0.1.0"

from vcash_figures.loader import FigureInputError
from vcash_figures.render import FigureSpec, render

__all__ = ["FigureInputError", "FigureSpec", "render", "__version__"]
