from __future__ import annotations

import json
from pathlib import Path

import pytest

from double_aztec.cli import HANDLERS, build_parser, main


@pytest.fixture(autouse=True)
def _isolated(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    monkeypatch.chdir(tmp_path)
    for name in ("A", "N", "M", "SIGMA", "REP", "FORM", "FORMAT", "TOL", "DELTA"):
        monkeypatch.delenv(f"DOUBLE_AZTEC_{name}", raising=False)


def _rows(path: Path) -> list[dict]:
    return json.loads(path.read_text(encoding="utf-8"))["rows"]


def test_parser_requires_subcommand() -> None:
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_every_subcommand_has_handler() -> None:
    assert set(HANDLERS) == {"selftest", "kernel", "gap", "sample", "render", "tacnode", "converge"}


def test_kernel_json(tmp_path: Path) -> None:
    out = tmp_path / "kernel.json"
    code = main(["kernel", "--n", "4", "--m", "1", "--rep", "em,k1,k2", "--points", "2:0:2:1,1:-2:3:0", "--format", "json", "--out", str(out)])
    assert code == 0
    rows = _rows(out)
    assert len(rows) == 2
    assert {"value_em", "value_k1", "value_k2", "err_est"} <= set(rows[0])
    assert all(row["err_est"] < 1e-8 for row in rows)


def test_kernel_csv_metadata(tmp_path: Path) -> None:
    out = tmp_path / "kernel.csv"
    assert main(["kernel", "--n", "2", "--m", "0", "--points", "1:0:1:0", "--out", str(out)]) == 0
    first, header = out.read_text(encoding="utf-8").splitlines()[:2]
    metadata = json.loads(first.removeprefix("# "))
    assert metadata["command"] == "kernel"
    assert header.split(",")[:4] == ["r", "x", "s", "y"]


def test_gap_exact(tmp_path: Path) -> None:
    out = tmp_path / "gap.json"
    code = main(["gap", "--n", "4", "--m", "1", "--lines", "4", "--windows", "0:0", "--exact", "--format", "json", "--out", str(out)])
    assert code == 0
    (row,) = _rows(out)
    assert row["abs_error"] < 1e-8
    assert -1e-9 <= row["probability"] <= 1.0 + 1e-9


def test_bad_window_is_usage_error(tmp_path: Path) -> None:
    assert main(["gap", "--n", "4", "--m", "1", "--lines", "4", "--windows", "3:1", "--out", str(tmp_path / "x.csv")]) == 2


def test_odd_order_is_usage_error(tmp_path: Path) -> None:
    assert main(["kernel", "--n", "3", "--m", "0", "--out", str(tmp_path / "x.csv")]) == 2


def test_unknown_representation(tmp_path: Path) -> None:
    assert main(["kernel", "--n", "2", "--m", "0", "--rep", "nope", "--out", str(tmp_path / "x.csv")]) == 2


def test_tacnode_forms_agree(tmp_path: Path) -> None:
    out = tmp_path / "tacnode.json"
    code = main(["tacnode", "--sigma", "1", "--form", "i,ii", "--points", "-0.2:0.3:0.1:-0.4", "--format", "json", "--out", str(out)])
    assert code == 0
    (row,) = _rows(out)
    assert {"form_i", "form_ii"} <= set(row)
    assert row["err_est"] < 1e-6


def test_sample_single_writes_tiling(tmp_path: Path) -> None:
    out = tmp_path / "sample.json"
    tiling = tmp_path / "tiling.json"
    code = main(
        ["sample", "--single", "--n", "4", "--samples", "20", "--seed", "3", "--format", "json", "--out", str(out), "--tiling", str(tiling)]
    )
    assert code == 0
    (row,) = _rows(out)
    assert row["observable"] == "vertical_fraction"
    assert row["samples"] == 20
    assert tiling.exists()


def test_render_bad_tiling_file(tmp_path: Path) -> None:
    broken = tmp_path / "broken.json"
    broken.write_text("{}", encoding="utf-8")
    assert main(["render", "--tiling", str(broken), "--out", str(tmp_path / "x.svg")]) == 2


def test_render_single(tmp_path: Path) -> None:
    pytest.importorskip("cairocffi")
    out = tmp_path / "tiling.svg"
    assert main(["render", "--single", "--n", "4", "--seed", "1", "--out", str(out)]) == 0
    assert out.read_bytes().startswith(b"<?xml")
