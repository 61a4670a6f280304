"""Figure rendering for penalty-sweep and field-snapshot artifacts."""

from .render import FigureSpec, SchemaError, refit_slope, render

__all__ = ["FigureSpec", "SchemaError", "refit_slope", "render"]
