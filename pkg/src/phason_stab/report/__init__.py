"""Contours, SVG figures, tables and CSV/JSON output."""

from .contours import ContourSet, default_levels, extract_contours
from .io import cloud_from_dict, grid_from_dict, read_json, to_dict, write_csv, write_json
from .svg import PALETTE, AxesConfig, AxesTransform, make_transform, render_svg
from .tables import format_eigenvalue, format_table

__all__ = [
    "ContourSet",
    "default_levels",
    "extract_contours",
    "render_svg",
    "AxesConfig",
    "AxesTransform",
    "make_transform",
    "PALETTE",
    "write_csv",
    "write_json",
    "read_json",
    "to_dict",
    "grid_from_dict",
    "cloud_from_dict",
    "format_table",
    "format_eigenvalue",
]
