from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from double_aztec.errors import ConfigError, InvalidTiling
from double_aztec.export import (
    format_table,
    read_table,
    read_tiling,
    run_metadata,
    write_table,
    write_tiling,
)
from double_aztec.geometry import all_horizontal_tiling, build_region
from double_aztec.sampler import shuffle_single_aztec
from double_aztec.types import ModelShape

ROWS = [{"x": 0, "value": 0.25}, {"x": 1, "value": float("nan")}]


def test_csv_carries_metadata() -> None:
    text = format_table(ROWS, "csv", run_metadata("kernel", {"n": 4, "windows": ((0, 1),)}))
    first, header, *body = text.splitlines()
    assert first.startswith("# ")
    assert json.loads(first[2:]) == {
        "command": "kernel",
        "parameters": {"n": 4, "windows": [[0, 1]]},
        "tool": "double-aztec",
        "version": "0.1.0",
    }
    assert header == "x,value"
    assert body == ["0,0.25", "1,nan"]


def test_json_envelope() -> None:
    payload = json.loads(format_table(ROWS[:1], "json", run_metadata("gap", {"seed": np.int64(3)})))
    assert payload["metadata"]["parameters"] == {"seed": 3}
    assert payload["rows"] == [{"x": 0, "value": 0.25}]


def test_unknown_format() -> None:
    with pytest.raises(ConfigError):
        format_table(ROWS, "xml", {})


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_table_files(tmp_path: Path, fmt: str) -> None:
    path = tmp_path / "out" / f"table.{fmt}"
    metadata = run_metadata("gap", {"n": 2})
    write_table(path, ROWS[:1], fmt, metadata)
    read_metadata, rows = read_table(path)
    assert read_metadata == metadata
    assert [float(row["value"]) for row in rows] == [0.25]
    assert not path.with_suffix(path.suffix + ".tmp").exists()


def test_table_to_stdout(capsys: pytest.CaptureFixture[str]) -> None:
    write_table(None, ROWS[:1], "csv", {})
    assert capsys.readouterr().out.splitlines()[1:] == ["x,value", "0,0.25"]


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_tiling_files(tmp_path: Path, fmt: str) -> None:
    single = shuffle_single_aztec(3, 0.5, np.random.default_rng(1))
    double = all_horizontal_tiling(build_region(ModelShape(a=0.3, n=4, m=1)))
    for name, tiling in (("single", single), ("double", double)):
        path = write_tiling(tmp_path / f"{name}.{fmt}", tiling, fmt, run_metadata("sample", {}))
        restored = read_tiling(path)
        assert restored.dominoes == tiling.dominoes
        assert restored.region.shape == tiling.region.shape


def test_tiling_without_header(tmp_path: Path) -> None:
    path = tmp_path / "rows.csv"
    write_table(path, [{"i0": 0, "j0": 0, "i1": 1, "j1": 0}], "csv", {})
    with pytest.raises(InvalidTiling):
        read_tiling(path)


def test_tiling_with_missing_domino(tmp_path: Path) -> None:
    tiling = all_horizontal_tiling(build_region(ModelShape(a=0.5, n=2, m=0)))
    path = write_tiling(tmp_path / "tiling.csv", tiling, "csv", {})
    lines = path.read_text(encoding="utf-8").splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")
    with pytest.raises(InvalidTiling):
        read_tiling(path)


@pytest.mark.parametrize("content", ["{}", "# {\"region\": {\"kind\": \"triple\", \"n\": 2}}\ni0,j0,i1,j1\n"])
def test_malformed_tiling_files(tmp_path: Path, content: str) -> None:
    path = tmp_path / "bad.csv"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(InvalidTiling):
        read_tiling(path)
