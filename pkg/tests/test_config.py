from __future__ import annotations

import argparse
from pathlib import Path

import pytest

from double_aztec.config import (
    ChainConfig,
    QuadratureConfig,
    RenderSpec,
    RunConfig,
    _parse_real_point,
    _parse_window,
    read_config_file,
)
from double_aztec.errors import ConfigError


def test_parse_window() -> None:
    assert _parse_window("-2:5") == (-2, 5)
    with pytest.raises(ConfigError):
        _parse_window("5:2")
    with pytest.raises(ConfigError):
        _parse_window("a:b")
    with pytest.raises(ConfigError):
        _parse_window("3")


def test_parse_real_point() -> None:
    assert _parse_real_point("-0.2:0.3:0.1:-0.4") == (-0.2, 0.3, 0.1, -0.4)
    with pytest.raises(ConfigError):
        _parse_real_point("1:2:3")


def test_read_config_file(tmp_path: Path) -> None:
    path = tmp_path / "run.conf"
    path.write_text("# shape\na = 0.3  # weight\n\nn = 6\nwindows = 0:1, 2:3\n", encoding="utf-8")
    assert read_config_file(path) == {"a": "0.3", "n": "6", "windows": "0:1, 2:3"}


@pytest.mark.parametrize("text", ["n 6\n", "colour = red\n"])
def test_read_config_file_rejects_bad_lines(tmp_path: Path, text: str) -> None:
    path = tmp_path / "bad.conf"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError):
        read_config_file(path)


def test_missing_config_file(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        read_config_file(tmp_path / "absent.conf")


def test_with_entries() -> None:
    config = RunConfig().with_entries({"t": "16,24", "windows": "0:1,2:3", "lines": "2,4", "seed": "7", "tol": "1e-9"})
    assert config.t_list == (16, 24)
    assert config.windows == ((0, 1), (2, 3))
    assert config.lines == (2, 4)
    assert config.chain.seed == 7
    assert config.quadrature.tolerance == 1e-9
    assert config.kernel.quadrature.tolerance == 1e-9


@pytest.mark.parametrize("entries", [{"format": "xml"}, {"n": "six"}, {"samples": "0"}])
def test_with_entries_rejects(entries: dict[str, str]) -> None:
    with pytest.raises(ConfigError):
        RunConfig().with_entries(entries)


def test_env_overrides_defaults(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("DOUBLE_AZTEC_N", "10")
    monkeypatch.setenv("DOUBLE_AZTEC_SIGMA", "2.5")
    config = RunConfig.from_env()
    assert config.n == 10
    assert config.sigma == 2.5


def test_source_precedence(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    monkeypatch.setenv("DOUBLE_AZTEC_N", "10")
    monkeypatch.setenv("DOUBLE_AZTEC_M", "3")
    path = tmp_path / "run.conf"
    path.write_text("n = 6\n", encoding="utf-8")
    from_file = RunConfig.from_sources(argparse.Namespace(config=path))
    assert (from_file.n, from_file.m) == (6, 3)
    from_cli = RunConfig.from_sources(argparse.Namespace(config=path, n="4"))
    assert (from_cli.n, from_cli.m) == (4, 3)


def test_chain_config() -> None:
    assert ChainConfig().burn_in_for(4) == 20 * 64
    assert ChainConfig(burn_in=5).burn_in_for(4) == 5
    with pytest.raises(ConfigError):
        ChainConfig(samples=0)
    with pytest.raises(ConfigError):
        ChainConfig(burn_in=-1)


def test_quadrature_config_validation() -> None:
    with pytest.raises(ConfigError):
        QuadratureConfig(initial_nodes=16)
    with pytest.raises(ConfigError):
        QuadratureConfig(tolerance=0.0)


def test_render_colors_from_env(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("DOUBLE_AZTEC_RENDER_COLORS", "#111111,#222222,#333333,#444444")
    assert RenderSpec.from_env().colors == {"N": "#111111", "S": "#222222", "E": "#333333", "W": "#444444"}
    monkeypatch.setenv("DOUBLE_AZTEC_RENDER_COLORS", "#111111,#222222,#333333")
    with pytest.raises(ConfigError):
        RenderSpec.from_env()
