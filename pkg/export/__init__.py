"""
Result writers for mce: CSV/JSON tables, saved profiles and SVG plots.
"""

from .file_output import FileOutput, load_profile, save_profile
from .formatting import VERSION, format_number, provenance_header, read_profile_csv, to_json
from .output_interface import OutputInterface
from .plotting import plot_curve

__all__ = [
    "FileOutput",
    "OutputInterface",
    "VERSION",
    "format_number",
    "load_profile",
    "plot_curve",
    "provenance_header",
    "read_profile_csv",
    "save_profile",
    "to_json",
]
