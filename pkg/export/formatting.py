"""
Text formats shared by every writer: full-precision numbers, the provenance
header, CSV bodies, canonical JSON and the saved-profile CSV.
"""

import json
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

VERSION = "1.0.0"
PROFILE_COLUMNS = ("r", "volume", "bound")


def format_number(value: Any) -> str:
    """17 significant digits; inf and nan spelled out."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return "%.17g" % value


def provenance_header(command: str, config_hash: str) -> str:
    return f"# mce {VERSION} {command} {config_hash}"


def json_safe(value: Any) -> Any:
    """Replace non-finite floats with None and numpy scalars/arrays with Python values."""
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.ndarray):
        return [json_safe(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def to_json(document: Dict[str, Any], indent: Optional[int] = 2) -> str:
    return json.dumps(json_safe(document), indent=indent, sort_keys=False, ensure_ascii=False, allow_nan=False)


def csv_text(header: str, columns: Sequence[str], rows: List[Sequence[Any]], trailer: Sequence[str] = ()) -> str:
    lines = [header, ",".join(columns)]
    lines.extend(",".join(format_number(v) for v in row) for row in rows)
    lines.extend(trailer)
    return "\n".join(lines) + "\n"


def profile_metadata_line(n: int, center: Sequence[float], label: str, eps: float, converged: bool) -> str:
    meta = {"n": n, "center": list(center), "label": label, "eps": eps, "converged": converged}
    return "# profile " + to_json(meta, indent=None)


def read_profile_csv(path: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray, Dict[str, Any]]:
    """Read a saved profile CSV (r,volume,bound) and its metadata comment.

    Returns:
        (radii, volumes, bounds, metadata); metadata is empty when the file has none.

    Raises:
        ValueError: Missing header or malformed rows.
    """
    radii: List[float] = []
    volumes: List[float] = []
    bounds: List[float] = []
    metadata: Dict[str, Any] = {}
    header_seen = False
    with open(path, "r") as f:
        for number, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("# profile "):
                metadata = json.loads(line[len("# profile "):])
                continue
            if line.startswith("#"):
                continue
            if not header_seen:
                if tuple(part.strip() for part in line.split(",")) != PROFILE_COLUMNS:
                    raise ValueError(f"{path}:{number}: expected header {','.join(PROFILE_COLUMNS)}")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"{path}:{number}: expected 3 columns, got {len(parts)}")
            try:
                r, volume, bound = (float(p) for p in parts)
            except ValueError:
                raise ValueError(f"{path}:{number}: non-numeric value in '{line}'")
            radii.append(r)
            volumes.append(volume)
            bounds.append(bound)
    if not header_seen or not radii:
        raise ValueError(f"{path}: no profile rows found")
    logger.info(f"Read {len(radii)} profile rows from {path}")
    return np.array(radii), np.array(volumes), np.array(bounds), metadata
