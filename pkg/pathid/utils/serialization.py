"""
CSV / JSON writers with fixed float precision
"""
import csv
import io
import json
import math
import sys
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

SCAN_COLUMNS = ("phase_a", "phase_c", "rate_hz", "counts", "sigma")


def format_float(value: float, digits: int = 12) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{float(value):.{digits}g}"


def to_plain(value: Any, digits: int = 12) -> Any:
    """Recursively turn results into JSON-ready values rounded to ``digits`` significant digits"""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.{digits}g}") + 0.0
    if isinstance(value, complex):
        return {"re": to_plain(value.real, digits), "im": to_plain(value.imag, digits)}
    if isinstance(value, np.ndarray):
        return [to_plain(v, digits) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): to_plain(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v, digits) for v in value]
    return value


def dumps_json(document: Dict[str, Any], digits: int = 12) -> str:
    return json.dumps(to_plain(document, digits), indent=2, ensure_ascii=False) + "\n"


def _cell(value: Any, digits: int) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value, digits)
    return str(value)


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], digits: int = 12) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value, digits) for value in row])
    return buffer.getvalue()


def dumps_scan_csv(rows: Iterable[Sequence[Any]], digits: int = 12) -> str:
    """Scan table with the fixed column contract; unused columns stay empty"""
    return dumps_csv(SCAN_COLUMNS, rows, digits)


def dumps_record_csv(record: Dict[str, Any], digits: int = 12) -> str:
    """Flat key/value table for non-scan results; nested values are JSON-encoded"""
    rows = []
    for key, value in record.items():
        if isinstance(value, (dict, list, tuple, np.ndarray)):
            value = json.dumps(to_plain(value, digits), separators=(",", ":"))
        rows.append((key, value))
    return dumps_csv(("key", "value"), rows, digits)


def write_text(text: str, path: Optional[str]) -> None:
    """Write to ``path`` or standard output"""
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def read_scan_csv(path) -> List[Dict[str, Optional[float]]]:
    """Parse a scan CSV back into rows; empty cells become None"""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != SCAN_COLUMNS:
            raise ValueError(f"unexpected scan columns {reader.fieldnames}")
        rows = []
        for row in reader:
            rows.append({
                key: (None if row[key] == "" else (int(row[key]) if key == "counts" else float(row[key])))
                for key in SCAN_COLUMNS
            })
        return rows
