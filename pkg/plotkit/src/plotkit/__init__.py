"""Figure renderer for the phase-estimation benchmark CSV files."""

from .figures import (
    KINDS,
    SCHEMAS,
    FigureSpec,
    SchemaMismatchError,
    build_figure,
    read_rows,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "KINDS",
    "SCHEMAS",
    "FigureSpec",
    "SchemaMismatchError",
    "build_figure",
    "read_rows",
    "render",
    "__version__",
]
