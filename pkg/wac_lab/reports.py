"""JSON report, CSV side-table and matrix file persistence."""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from .codec import decode_matrix, encode_matrix
from .exceptions import CodecException, ReportIOException

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"
SCHEMA_VERSION = 1

PathLike = Union[str, Path]


def to_jsonable(value: Any) -> Any:
    """
    Convert report values to plain JSON types.

    Non-finite floats become None and complex numbers become {"re", "im"}.
    """
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": to_jsonable(value.real), "im": to_jsonable(value.imag)}
    return value


def dumps(data: Dict[str, Any]) -> str:
    return json.dumps(to_jsonable(data), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: PathLike, data: Dict[str, Any]) -> Path:
    """
    Write a JSON document with sorted keys.

    Raises:
        ReportIOException: If the file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(data), encoding="utf-8")
    except OSError as e:
        raise ReportIOException("Cannot write report", {"path": str(path)}) from e
    logger.debug("wrote %s", path)
    return path


def read_json(path: PathLike) -> Dict[str, Any]:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ReportIOException("Cannot read file", {"path": str(path)}) from e
    except json.JSONDecodeError as e:
        raise ReportIOException("File is not valid JSON", {"path": str(path)}) from e


def write_csv(path: PathLike, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    """
    Write a CSV side-table with a header row. Empty cells stand for missing values.

    Raises:
        ReportIOException: If the file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(columns)
            for row in rows:
                writer.writerow(["" if cell is None else to_jsonable(cell) for cell in row])
    except OSError as e:
        raise ReportIOException("Cannot write table", {"path": str(path)}) from e
    logger.debug("wrote %d rows to %s", len(rows), path)
    return path


def save_matrix(path: PathLike, value: Any) -> Path:
    """Write a matrix or operator as a matrix JSON object."""
    return write_json(path, encode_matrix(value))


def load_matrix(path: PathLike) -> np.ndarray:
    """
    Read a matrix JSON object.

    Raises:
        ReportIOException: If the file cannot be read or does not hold a matrix
    """
    data = read_json(path)
    try:
        return decode_matrix(data)
    except CodecException as e:
        raise ReportIOException("File does not hold a matrix", {"path": str(path)}) from e


def write_report(out: PathLike, report: Dict[str, Any]) -> Path:
    """Write report.json and one CSV per entry of report["tables"]."""
    out = Path(out)
    for name, table in report.get("tables", {}).items():
        write_csv(out / f"{name}.csv", table["columns"], table["rows"])
    return write_json(out / REPORT_FILE, report)


def summarize_report(out: PathLike) -> List[str]:
    """
    One line per suite of an existing report directory.

    Raises:
        ReportIOException: If report.json is missing or has an unknown schema
    """
    report = read_json(Path(out) / REPORT_FILE)
    if report.get("schema") != SCHEMA_VERSION:
        raise ReportIOException(
            "Unsupported report schema", {"schema": report.get("schema"), "path": str(out)}
        )
    lines = [
        f"seed={report.get('seed')} suites={len(report.get('suites', {}))} "
        f"passed={report.get('passed')}"
    ]
    for name, suite in sorted(report.get("suites", {}).items()):
        mark = "✓" if suite.get("passed") else "✗"
        failures = suite.get("failures", [])
        detail = f" ({len(failures)} failed checks)" if failures else ""
        lines.append(f"  {mark} {name}: {len(suite.get('instances', []))} instances{detail}")
    tables = sorted(path.name for path in Path(out).glob("*.csv"))
    if tables:
        lines.append(f"  tables: {', '.join(tables)}")
    return lines
