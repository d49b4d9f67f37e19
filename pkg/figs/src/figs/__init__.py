"""Static figures from simulation CSV and snapshot outputs."""

from .readers import Table, read_table
from .render import RenderInfo, creep_overlay_data, render
from .spec import FigureError, FigureKind, FigureSpec

__all__ = [
    "FigureError",
    "FigureKind",
    "FigureSpec",
    "RenderInfo",
    "Table",
    "creep_overlay_data",
    "read_table",
    "render",
]
