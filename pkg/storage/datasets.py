"""CSV and JSON persistence of run datasets, tables and fit reports.

Every file starts with provenance: CSV files carry "# key=value" comment
lines before the header, JSON reports a "provenance" object. Nothing in a
file depends on wall-clock time, so identical inputs give identical bytes.
"""

import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from core.exceptions import DomainError
from models.outcomes import RunRecord, SettingResult
from models.reports import FitReport

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

RUN_COLUMNS = ["setting_id", "setting_value", "setting_unit", "run_index", "jumped", "n_c", "atom_present"]
PROVENANCE_PREFIX = "# "


def format_value(value: Any) -> str:
    """Return the CSV text of a value: shortest round-trip text for reals, true/false for booleans."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def _parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise DomainError(f"expected true or false, got {text!r}")


def _provenance_lines(provenance: Mapping[str, Any]) -> List[str]:
    return [f"{PROVENANCE_PREFIX}{key}={format_value(value)}" for key, value in provenance.items()]


def write_table(path: PathLike, columns: Sequence[str], rows: Iterable[Sequence[Any]], provenance: Mapping[str, Any]) -> Path:
    """Write a CSV table with provenance comment lines.

    Args:
        path: Output file
        columns: Header, in fixed order
        rows: Row values in column order
        provenance: Key/value pairs written as comments before the header

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buffer = io.StringIO()
    for line in _provenance_lines(provenance):
        buffer.write(line + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise DomainError(f"row has {len(row)} values, expected {len(columns)}")
        writer.writerow([format_value(v) for v in row])
    path.write_text(buffer.getvalue(), encoding="utf-8")
    logger.debug("wrote %s", path)
    return path


def read_table(path: PathLike) -> Tuple[List[Dict[str, str]], Dict[str, str]]:
    """Read a CSV table written by write_table.

    Returns:
        Tuple of (rows as dictionaries of text, provenance)
    """
    provenance: Dict[str, str] = {}
    body: List[str] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith(PROVENANCE_PREFIX) and not body:
            key, _, value = line[len(PROVENANCE_PREFIX) :].partition("=")
            provenance[key] = value
        else:
            body.append(line)
    reader = csv.DictReader(body)
    return list(reader), provenance


def write_runs(results: Sequence[SettingResult], path: PathLike, provenance: Mapping[str, Any]) -> Path:
    """Write every run of a campaign, settings in order and runs in run-index order.

    Args:
        results: Campaign settings
        path: Output CSV
        provenance: Schema version, config hash, master seed and campaign notes

    Returns:
        Path written
    """
    records = [record for result in results for record in result.to_records()]
    return write_records(records, path, provenance)


def write_records(records: Sequence[RunRecord], path: PathLike, provenance: Mapping[str, Any]) -> Path:
    """Write run records, rejecting duplicate (setting_id, run_index) pairs."""
    keys = [(r.setting_id, r.run_index) for r in records]
    if len(set(keys)) != len(keys):
        raise DomainError("(setting_id, run_index) must be unique within a dataset")
    rows = [(r.setting_id, r.setting_value, r.setting_unit, r.run_index, r.jumped, r.n_c, r.atom_present) for r in records]
    return write_table(path, RUN_COLUMNS, rows, provenance)


def read_runs(path: PathLike) -> Tuple[List[RunRecord], Dict[str, str]]:
    """Read a run dataset written by write_runs.

    Returns:
        Tuple of (records in file order, provenance)

    Raises:
        DomainError: If the columns differ from the run schema or keys repeat
    """
    rows, provenance = read_table(path)
    records = []
    for row in rows:
        if list(row) != RUN_COLUMNS:
            raise DomainError(f"run file columns {list(row)} differ from {RUN_COLUMNS}")
        records.append(
            RunRecord(
                setting_id=int(row["setting_id"]),
                setting_value=float(row["setting_value"]),
                setting_unit=row["setting_unit"],
                run_index=int(row["run_index"]),
                jumped=_parse_bool(row["jumped"]),
                n_c=int(row["n_c"]),
                atom_present=_parse_bool(row["atom_present"]),
            )
        )
    keys = {(r.setting_id, r.run_index) for r in records}
    if len(keys) != len(records):
        raise DomainError("(setting_id, run_index) must be unique within a dataset")
    return records, provenance


def _json_ready(value: Any) -> Any:
    """Convert numpy scalars, tuples and non-finite floats to JSON-ready values."""
    if isinstance(value, FitReport):
        return _json_ready(value.to_record())
    if isinstance(value, Mapping):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_json_ready(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    return value


def write_report(reports: Mapping[str, Any], path: PathLike, provenance: Mapping[str, Any]) -> Path:
    """Write fit reports and summary values as one JSON document.

    Args:
        reports: Named FitReports or plain values
        path: Output file
        provenance: Schema version, config hash and master seed

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"provenance": _json_ready(provenance), "reports": _json_ready(reports)}
    path.write_text(json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + "\n", encoding="utf-8")
    logger.debug("wrote %s", path)
    return path


def read_report(path: PathLike) -> Dict[str, Any]:
    """Read a JSON report written by write_report."""
    return json.loads(Path(path).read_text(encoding="utf-8"))
