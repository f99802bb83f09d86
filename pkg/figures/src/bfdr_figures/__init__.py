"""Figure rendering for boundary-fdr experiment CSV files."""

__version__ = "0.1.0"

from .render import PROCEDURE_COLORS, FigureSpec, build_figure, render
from .schemas import KINDS, EmptyInputError, SchemaMismatchError, load_rows

__all__ = [
    "FigureSpec",
    "KINDS",
    "PROCEDURE_COLORS",
    "EmptyInputError",
    "SchemaMismatchError",
    "build_figure",
    "load_rows",
    "render",
]
