"""Environment-driven configuration models and the run-config layering."""

from __future__ import annotations

import argparse
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from double_aztec.errors import ConfigError

ENV_PREFIX = "DOUBLE_AZTEC_"

DEFAULT_COMPASS_COLORS: dict[str, str] = {
    "N": "#d62728",
    "S": "#1f77b4",
    "E": "#2ca02c",
    "W": "#ffbf00",
}


def _get_env(name: str, default: str | None = None) -> str | None:
    """Return a prefixed environment variable or the provided default value."""
    value: str | None = os.getenv(ENV_PREFIX + name)
    if value is None:
        return default
    stripped: str = value.strip()
    return stripped if stripped else default


def _get_env_float(name: str, default: float) -> float:
    """Return an environment variable parsed as float."""
    value: str | None = _get_env(name)
    if value is None:
        return default
    return float(value)


def _get_env_int(name: str, default: int) -> int:
    """Return an environment variable parsed as int."""
    value: str | None = _get_env(name)
    if value is None:
        return default
    return int(value)


def _get_env_bool(name: str, default: bool) -> bool:
    """Return an environment variable parsed as bool."""
    value: str | None = _get_env(name)
    if value is None:
        return default
    return value.lower() in {"1", "true", "yes", "y", "on"}


def _split_csv(value: str) -> tuple[str, ...]:
    """Split a comma-separated string into a tuple of non-empty values."""
    return tuple(item.strip() for item in value.split(",") if item.strip())


@dataclass(slots=True, frozen=True)
class QuadratureConfig:
    """Trapezoid and Gauss-Legendre refinement settings."""

    initial_nodes: int = 64
    tolerance: float = 1e-12
    max_doublings: int = 10

    def __post_init__(self) -> None:
        if self.initial_nodes < 32:
            raise ConfigError("initial_nodes must be at least 32")
        if self.tolerance <= 0.0:
            raise ConfigError("tolerance must be positive")
        if self.max_doublings < 0:
            raise ConfigError("max_doublings must be non-negative")

    @classmethod
    def from_env(cls) -> "QuadratureConfig":
        """Load quadrature settings from environment variables."""
        return cls(
            initial_nodes=_get_env_int("QUAD_NODES", 64),
            tolerance=_get_env_float("QUAD_TOL", 1e-12),
            max_doublings=_get_env_int("QUAD_MAX_DOUBLINGS", 10),
        )


@dataclass(slots=True, frozen=True)
class KernelSettings:
    """Finite-size kernel numerics: truncation, tolerances and size caps."""

    series_tolerance: float = 1e-16
    imaginary_tolerance: float = 1e-8
    max_condition: float = 1e12
    n_cap: int = 64
    check_truncation: bool = True
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)

    @classmethod
    def from_env(cls) -> "KernelSettings":
        """Load kernel settings from environment variables."""
        return cls(
            series_tolerance=_get_env_float("SERIES_TOL", 1e-16),
            imaginary_tolerance=_get_env_float("IMAG_TOL", 1e-8),
            max_condition=_get_env_float("MAX_CONDITION", 1e12),
            n_cap=_get_env_int("N_CAP", 64),
            check_truncation=_get_env_bool("CHECK_TRUNCATION", True),
            quadrature=QuadratureConfig.from_env(),
        )


@dataclass(slots=True, frozen=True)
class ChainConfig:
    """Metropolis chain settings; burn_in None means 20·n³ proposals."""

    seed: int = 20240601
    burn_in: int | None = None
    samples: int = 1000
    thinning: int = 10
    chains: int = 1

    def __post_init__(self) -> None:
        if self.samples <= 0 or self.thinning <= 0 or self.chains <= 0:
            raise ConfigError("samples, thinning and chains must be positive")
        if self.burn_in is not None and self.burn_in < 0:
            raise ConfigError("burn_in must be non-negative")

    @classmethod
    def from_env(cls) -> "ChainConfig":
        """Load chain settings from environment variables."""
        burn_in: str | None = _get_env("BURN_IN")
        return cls(
            seed=_get_env_int("SEED", 20240601),
            burn_in=int(burn_in) if burn_in is not None else None,
            samples=_get_env_int("SAMPLES", 1000),
            thinning=_get_env_int("THINNING", 10),
            chains=_get_env_int("CHAINS", 1),
        )

    def burn_in_for(self, n: int) -> int:
        """Return the burn-in length in proposed flips for diamond order n."""
        return self.burn_in if self.burn_in is not None else 20 * n**3


@dataclass(slots=True, frozen=True)
class AiryConfig:
    """Discretization of [σ̃, σ̃+L] and of the vertical-line contours."""

    length: float = 14.0
    nodes: int = 96
    fine_nodes: int = 400
    ray_nodes: int = 128
    delta: float = 0.5
    vertical_step: float = 0.1
    tail_exponent: float = 40.0
    tolerance: float = 1e-10
    max_halvings: int = 6

    @classmethod
    def from_env(cls) -> "AiryConfig":
        """Load Airy and tacnode settings from environment variables."""
        return cls(
            length=_get_env_float("AIRY_LENGTH", 14.0),
            nodes=_get_env_int("AIRY_NODES", 96),
            fine_nodes=_get_env_int("AIRY_FINE_NODES", 400),
            ray_nodes=_get_env_int("AIRY_RAY_NODES", 128),
            delta=_get_env_float("TACNODE_DELTA", 0.5),
            vertical_step=_get_env_float("TACNODE_STEP", 0.1),
            tail_exponent=_get_env_float("TACNODE_TAIL", 40.0),
            tolerance=_get_env_float("AIRY_TOL", 1e-10),
            max_halvings=_get_env_int("TACNODE_MAX_HALVINGS", 6),
        )


@dataclass(slots=True, frozen=True)
class RenderSpec:
    """SVG rendering options."""

    cell_px: int = 12
    colors: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_COMPASS_COLORS))
    show_heights: bool = False
    show_level_lines: bool = False
    show_ellipses: bool = True

    @classmethod
    def from_env(cls) -> "RenderSpec":
        """Load render settings from environment variables."""
        colors: dict[str, str] = dict(DEFAULT_COMPASS_COLORS)
        raw: str | None = _get_env("RENDER_COLORS")
        if raw is not None:
            values: tuple[str, ...] = _split_csv(raw)
            if len(values) != 4:
                raise ConfigError("RENDER_COLORS needs four colors in N,S,E,W order")
            colors = dict(zip("NSEW", values))
        return cls(
            cell_px=_get_env_int("CELL_PX", 12),
            colors=colors,
            show_heights=_get_env_bool("SHOW_HEIGHTS", False),
            show_level_lines=_get_env_bool("SHOW_LEVEL_LINES", False),
            show_ellipses=_get_env_bool("SHOW_ELLIPSES", True),
        )


def _parse_window(text: str) -> tuple[int, int]:
    """Parse a `lo:hi` window."""
    parts: list[str] = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"Malformed window '{text}', expected lo:hi")
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError as error:
        raise ConfigError(f"Malformed window '{text}', expected integers") from error
    if lo > hi:
        raise ConfigError(f"Malformed window '{text}', lo exceeds hi")
    return lo, hi


def _parse_int_point(text: str) -> tuple[int, int, int, int]:
    """Parse an `r:x:s:y` kernel query point."""
    parts: list[str] = text.split(":")
    if len(parts) != 4:
        raise ConfigError(f"Malformed point '{text}', expected r:x:s:y")
    try:
        r, x, s, y = (int(part) for part in parts)
    except ValueError as error:
        raise ConfigError(f"Malformed point '{text}', expected integers") from error
    return r, x, s, y


def _parse_real_point(text: str) -> tuple[float, float, float, float]:
    """Parse a `τ1:ξ1:τ2:ξ2` tacnode query point."""
    parts: list[str] = text.split(":")
    if len(parts) != 4:
        raise ConfigError(f"Malformed point '{text}', expected t1:x1:t2:x2")
    try:
        t1, x1, t2, x2 = (float(part) for part in parts)
    except ValueError as error:
        raise ConfigError(f"Malformed point '{text}', expected reals") from error
    return t1, x1, t2, x2


def read_config_file(path: Path) -> dict[str, str]:
    """Read flat `key = value` lines; `#` starts a comment."""
    try:
        text: str = path.read_text(encoding="utf-8")
    except OSError as error:
        raise ConfigError(f"Cannot read config file {path}: {error}") from error
    entries: dict[str, str] = {}
    for number, raw_line in enumerate(text.splitlines(), start=1):
        line: str = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in RUN_KEYS:
            raise ConfigError(f"{path}:{number}: unknown key '{key}'")
        entries[key] = value
    return entries


@dataclass(slots=True, frozen=True)
class RunConfig:
    """Everything one CLI invocation needs, after layering all sources."""

    a: float = 0.5
    n: int = 8
    m: int = 2
    sigma: float = 1.0
    t_list: tuple[int, ...] = (16, 24, 32)
    lines: tuple[int, ...] = ()
    windows: tuple[tuple[int, int], ...] = ()
    points: tuple[tuple[int, int, int, int], ...] = ()
    tacnode_points: tuple[tuple[float, float, float, float], ...] = ()
    representation: str = "k1"
    form: str = "i"
    fmt: str = "csv"
    out: Path | None = None
    tiling: Path | None = None
    single: bool = False
    log_level: str = "INFO"
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    kernel: KernelSettings = field(default_factory=KernelSettings)
    chain: ChainConfig = field(default_factory=ChainConfig)
    airy: AiryConfig = field(default_factory=AiryConfig)
    render: RenderSpec = field(default_factory=RenderSpec)

    @classmethod
    def from_env(cls) -> "RunConfig":
        """Load run settings from environment variables."""
        return cls(
            a=_get_env_float("A", 0.5),
            n=_get_env_int("N", 8),
            m=_get_env_int("M", 2),
            sigma=_get_env_float("SIGMA", 1.0),
            representation=_get_env("REP", "k1") or "k1",
            form=_get_env("FORM", "i") or "i",
            fmt=_get_env("FORMAT", "csv") or "csv",
            log_level=_get_env("LOG_LEVEL", "INFO") or "INFO",
            quadrature=QuadratureConfig.from_env(),
            kernel=KernelSettings.from_env(),
            chain=ChainConfig.from_env(),
            airy=AiryConfig.from_env(),
            render=RenderSpec.from_env(),
        )

    @classmethod
    def from_sources(cls, args: argparse.Namespace) -> "RunConfig":
        """Layer CLI flags over the config file over the environment over defaults."""
        config: RunConfig = cls.from_env()
        config_path: Path | None = getattr(args, "config", None)
        if config_path is not None:
            config = config.with_entries(read_config_file(Path(config_path)))
        cli_entries: dict[str, str] = {
            key: str(value)
            for key, value in (
                (key, getattr(args, attribute, None)) for key, attribute in _CLI_ATTRIBUTES.items()
            )
            if value is not None and value is not False
        }
        return config.with_entries(cli_entries)

    def with_entries(self, entries: dict[str, str]) -> "RunConfig":
        """Return a copy with string-valued entries applied."""
        try:
            return _apply_entries(self, entries)
        except ValueError as error:
            raise ConfigError(str(error)) from error


def _apply_entries(config: RunConfig, entries: dict[str, str]) -> RunConfig:
    """Apply parsed `key = value` entries onto a run config."""
    updates: dict[str, object] = {}
    chain_updates: dict[str, object] = {}
    airy_updates: dict[str, object] = {}
    tolerance: float | None = None
    for key, value in entries.items():
        if key == "a":
            updates["a"] = float(value)
        elif key in {"n", "m"}:
            updates[key] = int(value)
        elif key == "sigma":
            updates["sigma"] = float(value)
        elif key == "t":
            updates["t_list"] = tuple(int(item) for item in _split_csv(value))
        elif key == "lines":
            updates["lines"] = tuple(int(item) for item in _split_csv(value))
        elif key == "windows":
            updates["windows"] = tuple(_parse_window(item) for item in _split_csv(value))
        elif key == "points":
            updates["points"] = tuple(_parse_int_point(item) for item in _split_csv(value))
        elif key == "tacnode_points":
            updates["tacnode_points"] = tuple(_parse_real_point(item) for item in _split_csv(value))
        elif key == "rep":
            updates["representation"] = value
        elif key == "form":
            updates["form"] = value
        elif key == "format":
            if value not in {"csv", "json"}:
                raise ConfigError(f"Unknown format '{value}'. Available: csv, json")
            updates["fmt"] = value
        elif key == "out":
            updates["out"] = Path(value)
        elif key == "tiling":
            updates["tiling"] = Path(value)
        elif key == "single":
            updates["single"] = value.lower() in {"1", "true", "yes", "y", "on"}
        elif key == "log_level":
            updates["log_level"] = value
        elif key == "tol":
            tolerance = float(value)
        elif key == "seed":
            chain_updates["seed"] = int(value)
        elif key in {"samples", "thinning", "chains", "burn_in"}:
            chain_updates[key] = int(value)
        elif key == "delta":
            airy_updates["delta"] = float(value)
        elif key == "cell_px":
            updates["render"] = replace(config.render, cell_px=int(value))
    if tolerance is not None:
        quadrature = replace(config.quadrature, tolerance=tolerance)
        updates["quadrature"] = quadrature
        updates["kernel"] = replace(config.kernel, quadrature=quadrature)
    if chain_updates:
        updates["chain"] = replace(config.chain, **chain_updates)
    if airy_updates:
        updates["airy"] = replace(config.airy, **airy_updates)
    return replace(config, **updates)


_CLI_ATTRIBUTES: dict[str, str] = {
    "a": "a",
    "n": "n",
    "m": "m",
    "sigma": "sigma",
    "t": "t",
    "lines": "lines",
    "windows": "windows",
    "points": "points",
    "tacnode_points": "tacnode_points",
    "rep": "rep",
    "form": "form",
    "format": "format",
    "out": "out",
    "tiling": "tiling",
    "single": "single",
    "log_level": "log_level",
    "tol": "tol",
    "seed": "seed",
    "samples": "samples",
    "thinning": "thinning",
    "chains": "chains",
    "burn_in": "burn_in",
    "delta": "delta",
    "cell_px": "cell_px",
}

RUN_KEYS: frozenset[str] = frozenset(_CLI_ATTRIBUTES)

