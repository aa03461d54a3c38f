"""
Standard output helpers.

Provides consistent result formatting for tables (CSV or JSON) and
error envelopes. Every table carries a metadata block: tool, version,
schema version, seed and command line, plus a timestamp unless the run
is deterministic.

Example:
    from common.utils import run_metadata, write_table

    meta = run_metadata("distill", seed=7, argv=["distill", "--n", "4"])
    write_table(
        rows=[{"n": 4, "scp": 0.875}],
        columns=["n", "scp"],
        metadata=meta,
        path="out.csv",
    )
"""

import csv
import io
import json
import os
import shlex
import sys
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, List, Optional, Sequence

from common.utils.exceptions import OutputPathError


TOOL_NAME = "entperc"


def success_response(
    data: Any = None,
    message: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Create a standard success envelope.

    Args:
        data: The payload (dict, list or any JSON-serializable value)
        message: Optional success message

    Returns:
        Dictionary with success=True and optional data/message
    """
    response: Dict[str, Any] = {"success": True}

    if data is not None:
        response["data"] = data

    if message:
        response["message"] = message

    return response


def error_response(
    message: str,
    code: Optional[str] = None,
    details: Optional[Any] = None,
    errors: Optional[list] = None,
) -> Dict[str, Any]:
    """
    Create a standard error envelope.

    Args:
        message: Human-readable error message
        code: Machine-readable error code (e.g., "PARAMETER_OUT_OF_RANGE")
        details: Additional error details
        errors: List of specific errors (for validation errors)

    Returns:
        Dictionary with success=False and error info
    """
    error: Dict[str, Any] = {"message": message}

    if code:
        error["code"] = code

    if details is not None:
        error["details"] = details

    if errors:
        error["errors"] = errors

    return {"success": False, "error": error}


def run_metadata(
    command: str,
    seed: int,
    argv: Sequence[str],
    version: str = "0.1.0",
    schema: int = 1,
    deterministic: bool = False,
    extra: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """
    Build the metadata block echoed into every output file.

    Args:
        command: Subcommand name
        seed: Master seed of the run
        argv: Command line (without the program name)
        version: Tool version
        schema: Output schema version
        deterministic: Suppress the timestamp field
        extra: Additional key/value pairs (e.g. located window endpoints)

    Returns:
        Ordered metadata dictionary
    """
    meta: Dict[str, Any] = {
        "tool": TOOL_NAME,
        "version": version,
        "schema": schema,
        "seed": seed,
        "command": command,
        "argv": shlex.join(list(argv)),
    }
    if not deterministic:
        meta["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    if extra:
        meta.update(extra)
    return meta


def _format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def _metadata_line(metadata: Dict[str, Any]) -> str:
    parts = []
    for key, value in metadata.items():
        text = _format_cell(value)
        if any(ch.isspace() for ch in text) or text == "":
            text = json.dumps(text)
        parts.append(f"{key}={text}")
    return "# " + " ".join(parts)


def render_csv(
    rows: Iterable[Dict[str, Any]],
    columns: List[str],
    metadata: Dict[str, Any],
) -> str:
    """Render rows as CSV text with the metadata comment line and header."""
    buffer = io.StringIO()
    buffer.write(_metadata_line(metadata) + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row.get(column)) for column in columns])
    return buffer.getvalue()


def render_json(
    rows: Iterable[Dict[str, Any]],
    columns: List[str],
    metadata: Dict[str, Any],
) -> str:
    """Render rows as a JSON document."""
    payload = success_response(
        data={
            "metadata": metadata,
            "columns": columns,
            "rows": [{column: row.get(column) for column in columns} for row in rows],
        }
    )
    return json.dumps(payload, indent=2) + "\n"


def write_table(
    rows: Iterable[Dict[str, Any]],
    columns: List[str],
    metadata: Dict[str, Any],
    path: Optional[str] = None,
    fmt: str = "csv",
) -> str:
    """
    Write a result table to a file or stdout.

    Args:
        rows: One dict per grid point
        columns: Column order
        metadata: Block from run_metadata()
        path: Output file; None or "-" writes to stdout
        fmt: "csv" or "json"

    Returns:
        The rendered text

    Raises:
        OutputPathError: If the file cannot be written
    """
    rows = list(rows)
    text = render_json(rows, columns, metadata) if fmt == "json" else render_csv(
        rows, columns, metadata
    )

    if path is None or path == "-":
        sys.stdout.write(text)
        return text

    tmp_path = f"{path}.tmp"
    try:
        with open(tmp_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except OSError as exc:
        raise OutputPathError(
            f"Cannot write output to {path}: {exc.strerror or exc}",
            details={"path": path},
        ) from exc

    return text
