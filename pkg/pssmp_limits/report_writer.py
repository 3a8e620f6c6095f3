"""
Report Writer

JSON and CSV emission for experiment reports, sample tables, path dumps and
fragment snapshots. Files are written to a temporary sibling and moved into place
only after the full content has been produced, so a failing command never leaves
partial output behind.
"""
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from typing import Any, Dict, List, Optional

import numpy as np

from pssmp_limits.path_engine import GridPath, JumpDriftPath, SubordinatorPath

logger = logging.getLogger(__name__)


class CustomJsonEncoder(json.JSONEncoder):
    """Encode numpy scalars and arrays; non-finite floats become strings."""

    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return _finite_or_text(float(obj))
        if isinstance(obj, np.ndarray):
            return [self.default(x) if isinstance(x, np.generic) else x for x in obj.tolist()]
        if isinstance(obj, np.bool_):
            return bool(obj)
        return super(CustomJsonEncoder, self).default(obj)


def _finite_or_text(value: float):
    if math.isfinite(value):
        return value
    return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")


def _sanitize(obj: Any) -> Any:
    # json.dumps emits NaN/Infinity for Python floats, which is not valid JSON
    if isinstance(obj, float):
        return _finite_or_text(obj)
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return _sanitize(obj.item())
    return obj


def render_json(report: Dict[str, Any]) -> str:
    return json.dumps(_sanitize(report), cls=CustomJsonEncoder, indent=2, sort_keys=True) + "\n"


def render_csv(rows: List[Dict[str, Any]], header: Optional[List[str]] = None) -> str:
    if not rows and not header:
        return ""
    columns = header or list(rows[0].keys())
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _format_cell(row.get(k)) for k in columns})
    return buffer.getvalue()


def _format_cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_text(content: str, out_path: Optional[str]) -> None:
    """Write atomically to out_path, or to stdout when out_path is None or '-'."""
    if out_path in (None, "-"):
        sys.stdout.write(content)
        return
    directory = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(out_path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(content)
        os.replace(tmp_path, out_path)
    except Exception:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.info(f"Wrote {len(content)} bytes to {out_path}")


def path_rows(path: SubordinatorPath) -> List[Dict[str, float]]:
    """Grid paths as (t, xi); jump-drift paths as (time, size) with drift and horizon columns."""
    if isinstance(path, GridPath):
        return [{"t": float(t), "xi": float(v)} for t, v in zip(path.times, path.values)]
    if isinstance(path, JumpDriftPath):
        return [
            {"time": float(t), "size": float(s), "drift": path.drift, "horizon": path.horizon}
            for t, s in zip(path.jump_times, path.jump_sizes)
        ]
    raise TypeError(f"Unknown path type {type(path).__name__}")
