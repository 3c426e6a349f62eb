"""Path conventions for datasets, diagrams and experiment outputs."""

import os
import re
from typing import List, Optional, Tuple

from ..exceptions import DiagramFormatError

DIAGRAM_SUFFIX_RE = re.compile(r"^(?P<stem>.*)_h(?P<dim>\d+)\.csv$")
MANIFEST_NAME = "manifest.json"
POINTS_NAME = "points.csv"
SERIES_NAME = "series.csv"
ITEM_DIAGRAM_PREFIX = "pd"


def normalize_path(path: str) -> str:
    """Normalize a path to use forward slashes and resolve dot components.

    Args:
        path: The path to normalize

    Returns:
        str: The normalized path
    """
    if not path:
        return ""
    normalized = os.path.normpath(path.replace("\\", "/")).replace(os.sep, "/")
    return normalized


def diagram_path(prefix: str, dimension: int) -> str:
    """Return ``{prefix}_h{dimension}.csv``."""
    if dimension < 0:
        raise DiagramFormatError(f"Negative homology dimension {dimension}")
    return f"{prefix}_h{dimension}.csv"


def parse_diagram_path(path: str) -> Tuple[str, int]:
    """Split a diagram file path into its prefix and homology dimension.

    Raises:
        DiagramFormatError: If the name does not end in ``_h<dim>.csv``
    """
    match = DIAGRAM_SUFFIX_RE.match(normalize_path(path))
    if not match:
        raise DiagramFormatError(f"Diagram file name must end in _h<dim>.csv: {path}")
    return match.group("stem"), int(match.group("dim"))


def item_id(index: int, width: int = 5) -> str:
    return f"{index:0{width}d}"


def item_dir(dataset_dir: str, identifier: str) -> str:
    return normalize_path(os.path.join(dataset_dir, identifier))


def find_diagram_files(paths: List[str], prefix: Optional[str] = None) -> List[Tuple[int, str]]:
    """Pick the diagram files out of a listing, sorted by dimension."""
    found = []
    for path in paths:
        match = DIAGRAM_SUFFIX_RE.match(normalize_path(path))
        if not match:
            continue
        if prefix is not None and os.path.basename(match.group("stem")) != prefix:
            continue
        found.append((int(match.group("dim")), path))
    return sorted(found)
