"""
File Output Module for mce.

Writes result tables as CSV or JSON to a file or stdout. Every CSV starts
with a provenance comment carrying the program version, the subcommand and
the hash of the resolved run configuration.
"""

import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from geom.chart import AmbientPoint
from radial.profile import RadialProfile

from .formatting import (
    PROFILE_COLUMNS,
    VERSION,
    csv_text,
    profile_metadata_line,
    provenance_header,
    read_profile_csv,
    to_json,
)
from .output_interface import OutputInterface

logger = logging.getLogger(__name__)


class FileOutput(OutputInterface):
    """CSV/JSON writer bound to one destination (None means stdout)."""

    def __init__(self, path: Optional[str], command: str, config_hash: str, fmt: str = "csv"):
        if fmt not in ("csv", "json"):
            raise ValueError(f"Unknown output format '{fmt}'")
        self.path = path
        self.command = command
        self.config_hash = config_hash
        self.fmt = fmt

    @property
    def provenance(self) -> Dict[str, str]:
        return {"version": VERSION, "command": self.command, "config_hash": self.config_hash}

    def _emit(self, text: str) -> str:
        if self.path is None or self.path == "-":
            sys.stdout.write(text)
            sys.stdout.flush()
        else:
            directory = os.path.dirname(os.path.abspath(self.path))
            os.makedirs(directory, exist_ok=True)
            with open(self.path, "w", newline="\n") as f:
                f.write(text)
            logger.info(f"Wrote {self.command} results to {self.path}")
        return text

    def write_table(self, columns: Sequence[str], rows: List[Sequence[float]], summary: Optional[Dict[str, Any]] = None) -> str:
        if self.fmt == "json":
            document: Dict[str, Any] = {
                "provenance": self.provenance,
                "columns": list(columns),
                "rows": [dict(zip(columns, row)) for row in rows],
            }
            if summary is not None:
                document["summary"] = summary
            return self._emit(to_json(document) + "\n")
        trailer = [f"# {self.command} {to_json(summary, indent=None)}"] if summary is not None else []
        return self._emit(csv_text(provenance_header(self.command, self.config_hash), columns, rows, trailer))

    def write_document(self, document: Dict[str, Any]) -> str:
        """JSON regardless of the table format; provenance is added as the last key."""
        payload = dict(document)
        payload["provenance"] = self.provenance
        return self._emit(to_json(payload) + "\n")


def save_profile(path: str, profile: RadialProfile, config_hash: str) -> None:
    """Write a profile as CSV r,volume,bound with a metadata comment for reloading."""
    meta = profile_metadata_line(profile.n, profile.center.coords, profile.label, profile.eps, profile.converged)
    rows = [(r, v, b) for r, v, b in zip(profile.radii, profile.values, profile.bounds)]
    header = provenance_header("profile", config_hash) + "\n" + meta
    FileOutput(path, "profile", config_hash)._emit(csv_text(header, PROFILE_COLUMNS, rows))


def load_profile(path: str, n: Optional[int] = None, center: Optional[AmbientPoint] = None, label: Optional[str] = None) -> RadialProfile:
    """Rebuild a RadialProfile from a saved CSV.

    Args:
        n: Dimension when the file has no metadata; must agree with it otherwise.
        center: Overrides the stored center.

    Raises:
        ValueError: Unreadable file or dimension missing or inconsistent.
    """
    radii, values, bounds, meta = read_profile_csv(path)
    stored_n = meta.get("n")
    if stored_n is None and n is None:
        raise ValueError(f"{path}: profile has no dimension metadata; pass the surface it was built from")
    if stored_n is not None and n is not None and int(stored_n) != n:
        raise ValueError(f"{path}: profile dimension {stored_n} does not match surface dimension {n}")
    dim = int(stored_n if stored_n is not None else n)
    if center is None:
        coords = meta.get("center")
        center = AmbientPoint(tuple(coords)) if coords else AmbientPoint.origin(dim + 1)
    return RadialProfile(
        center=center,
        radii=np.asarray(radii),
        values=np.asarray(values),
        bounds=np.asarray(bounds),
        n=dim,
        label=label or meta.get("label", os.path.basename(path)),
        eps=float(meta.get("eps", 1e-9)),
        converged=bool(meta.get("converged", True)),
    )
