"""CSV/JSON tables with embedded run metadata, and tiling files."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import sys
from collections.abc import Mapping, Sequence
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any

from double_aztec import __version__
from double_aztec.errors import ConfigError, InvalidTiling
from double_aztec.geometry import Domino, Region, Tiling, build_region, single_aztec_region
from double_aztec.types import ModelShape

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
METADATA_PREFIX = "# "
TILING_COLUMNS = ("i0", "j0", "i1", "j1")


def _jsonable(value: Any) -> Any:
    if is_dataclass(value) and not isinstance(value, type):
        return _jsonable(asdict(value))
    if isinstance(value, Mapping):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, complex):
        return {"real": value.real, "imag": value.imag}
    if hasattr(value, "item"):
        return value.item()
    return value


def run_metadata(command: str, parameters: Mapping[str, Any]) -> dict[str, Any]:
    """Return the metadata block written into every output file."""
    return {"command": command, "tool": "double-aztec", "version": __version__, "parameters": _jsonable(parameters)}


def _fieldnames(rows: Sequence[Mapping[str, Any]]) -> list[str]:
    names: list[str] = []
    for row in rows:
        for key in row:
            if key not in names:
                names.append(key)
    return names


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    return str(value)


def format_table(rows: Sequence[Mapping[str, Any]], fmt: str, metadata: Mapping[str, Any]) -> str:
    """Serialize rows; CSV carries the metadata as a leading comment line."""
    if fmt == "json":
        return json.dumps({"metadata": _jsonable(metadata), "rows": _jsonable(list(rows))}, indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ConfigError(f"Unknown format '{fmt}'. Available: {', '.join(FORMATS)}")
    buffer = io.StringIO()
    buffer.write(METADATA_PREFIX + json.dumps(_jsonable(metadata), sort_keys=True) + "\n")
    fieldnames: list[str] = _fieldnames(rows)
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(row.get(key, "")) for key in fieldnames})
    return buffer.getvalue()


def write_table(
    path: Path | None,
    rows: Sequence[Mapping[str, Any]],
    fmt: str,
    metadata: Mapping[str, Any],
) -> None:
    """Write a table to a file, or to stdout when path is None."""
    text: str = format_table(rows, fmt, metadata)
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp: Path = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)
    logger.info("Wrote %d rows to %s", len(rows), path)


def read_table(path: Path) -> tuple[dict[str, Any], list[dict[str, str]]]:
    """Read back a table written by write_table; CSV values stay strings."""
    text: str = path.read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        payload: dict[str, Any] = json.loads(text)
        return payload["metadata"], payload["rows"]
    lines: list[str] = text.splitlines()
    metadata: dict[str, Any] = {}
    if lines and lines[0].startswith(METADATA_PREFIX):
        metadata = json.loads(lines[0][len(METADATA_PREFIX) :])
        lines = lines[1:]
    return metadata, list(csv.DictReader(lines))


def tiling_header(tiling: Tiling) -> dict[str, Any]:
    """Return the region description needed to rebuild a tiling."""
    region: Region = tiling.region
    if region.shape is None:
        return {"kind": "single", "n": region.order}
    return {"kind": "double", "n": region.shape.n, "m": region.shape.m, "a": region.shape.a}


def _region_from_header(header: Mapping[str, Any]) -> Region:
    try:
        kind: str = header["kind"]
        n: int = int(header["n"])
        if kind == "single":
            return single_aztec_region(n)
        if kind == "double":
            return build_region(ModelShape(a=float(header.get("a", 0.5)), n=n, m=int(header["m"])))
    except (KeyError, TypeError, ValueError) as error:
        raise InvalidTiling(f"tiling header is incomplete: {error}") from error
    raise InvalidTiling(f"Unknown region kind '{kind}'. Available: single, double")


def format_tiling(tiling: Tiling, fmt: str, metadata: Mapping[str, Any]) -> str:
    """Serialize a tiling as a table of dominoes under a region header."""
    rows: list[dict[str, int]] = [dict(zip(TILING_COLUMNS, (*domino.first, *domino.second))) for domino in tiling.dominoes]
    return format_table(rows, fmt, {**metadata, "region": tiling_header(tiling)})


def write_tiling(path: Path, tiling: Tiling, fmt: str, metadata: Mapping[str, Any]) -> Path:
    """Write a tiling file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_tiling(tiling, fmt, metadata), encoding="utf-8")
    logger.info("Wrote tiling with %d dominoes to %s", len(tiling.dominoes), path)
    return path


def read_tiling(path: Path) -> Tiling:
    """Read and validate a tiling file; malformed content raises InvalidTiling."""
    try:
        metadata, rows = read_table(path)
    except (OSError, json.JSONDecodeError, KeyError) as error:
        raise InvalidTiling(f"Cannot read tiling file {path}: {error}") from error
    header: Any = metadata.get("region")
    if not isinstance(header, Mapping):
        raise InvalidTiling(f"{path} carries no region header")
    region: Region = _region_from_header(header)
    try:
        dominoes: list[Domino] = [
            Domino((int(row["i0"]), int(row["j0"])), (int(row["i1"]), int(row["j1"]))) for row in rows
        ]
    except (KeyError, TypeError, ValueError) as error:
        raise InvalidTiling(f"{path}: malformed domino row: {error}") from error
    return Tiling.from_dominoes(region, dominoes)
