"""Command-line interface for the double Aztec diamond lab."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from dotenv import load_dotenv

from double_aztec.airy import AiryContext
from double_aztec.config import RunConfig, _split_csv
from double_aztec.errors import ConfigError, DoubleAztecError
from double_aztec.export import read_tiling, run_metadata, write_table, write_tiling
from double_aztec.extended import build_default_representation_registry, gap_probability, kernel_grid
from double_aztec.geometry import Region, Tiling, TransferCounter, all_horizontal_tiling, build_region
from double_aztec.sampler import (
    FlipChain,
    TilingSampler,
    estimate,
    observe_gap,
    observe_vertical_fraction,
    shuffle_single_aztec,
)
from double_aztec.scaling import ConvergenceStudy, g_limit_diagnostic, trend_fraction
from double_aztec.selftest import CONVERGENCE_POINTS, SelfTest, format_report
from double_aztec.symbols import KernelContext, build_context
from double_aztec.tacnode import build_default_form_registry, tacnode_grid
from double_aztec.types import ModelShape, TacnodePoint

logger = logging.getLogger(__name__)

DEFAULT_TACNODE_POINTS = ((-0.2, 0.3, 0.1, -0.4), (0.0, 0.5, 0.0, -0.5), (0.1, 0.0, 0.3, 0.2))
DEFAULT_LAMBDAS = (-1.0, 0.0, 1.0, 3.0)


def _common_parser() -> argparse.ArgumentParser:
    """Build the flags shared by every subcommand; values are layered by RunConfig."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="Flat key = value config file.")
    common.add_argument("--a", type=str, default=None, help="Vertical domino weight, 0 < a < 1.")
    common.add_argument("--n", type=str, default=None, help="Diamond order (even).")
    common.add_argument("--m", type=str, default=None, help="Inlier parameter; 2m+1 inlier paths.")
    common.add_argument("--sigma", type=str, default=None, help="Pressure parameter σ.")
    common.add_argument("--t", type=str, default=None, help="Comma-separated t values for scaling runs.")
    common.add_argument("--seed", type=str, default=None, help="Master random seed.")
    common.add_argument("--tol", type=str, default=None, help="Quadrature tolerance.")
    common.add_argument("--out", type=str, default=None, help="Output path (default: stdout).")
    common.add_argument("--format", type=str, default=None, choices=("csv", "json"), help="Table format.")
    common.add_argument("--rep", type=str, default=None, help="Kernel representations: em,k1,k2,saddle or all.")
    common.add_argument("--form", type=str, default=None, help="Tacnode forms: i,ii,iii,brownian or all.")
    common.add_argument("--log-level", dest="log_level", type=str, default=None, help="Logging level.")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Build CLI argument parser."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="double-aztec",
        description="Double Aztec diamond tilings, finite kernels and the tacnode limit.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    selftest = commands.add_parser("selftest", parents=[common], help="Run the deterministic check suite.")
    selftest.add_argument("--full", action="store_true", help="Include the convergence-trend check.")

    kernel = commands.add_parser("kernel", parents=[common], help="Evaluate the extended kernel.")
    kernel.add_argument("--points", type=str, default=None, help="Comma-separated r:x:s:y points.")

    gap = commands.add_parser("gap", parents=[common], help="Gap probabilities on even lines.")
    gap.add_argument("--lines", type=str, default=None, help="Comma-separated even line numbers.")
    gap.add_argument("--windows", type=str, default=None, help="Comma-separated lo:hi windows, one per line.")
    gap.add_argument("--exact", action="store_true", help="Add a transfer-matrix column for small shapes.")

    sample = commands.add_parser("sample", parents=[common], help="Sample tilings and estimate observables.")
    sample.add_argument("--single", action="store_true", help="Exact shuffling on the single diamond.")
    sample.add_argument("--samples", type=str, default=None, help="Recorded samples per chain.")
    sample.add_argument("--thinning", type=str, default=None, help="Flips between recorded samples.")
    sample.add_argument("--chains", type=str, default=None, help="Independent chains.")
    sample.add_argument("--burn-in", dest="burn_in", type=str, default=None, help="Flips before recording.")
    sample.add_argument("--lines", type=str, default=None, help="Even lines of a gap observable.")
    sample.add_argument("--windows", type=str, default=None, help="Windows of a gap observable.")
    sample.add_argument("--tiling", type=str, default=None, help="Write the last sampled tiling here.")

    render = commands.add_parser("render", parents=[common], help="Render a tiling file as SVG.")
    render.add_argument("--tiling", type=str, default=None, help="Tiling file to render.")
    render.add_argument("--single", action="store_true", help="Sample a single diamond when no file is given.")
    render.add_argument("--cell-px", dest="cell_px", type=str, default=None, help="Pixels per lattice square.")

    tacnode = commands.add_parser("tacnode", parents=[common], help="Evaluate the tacnode kernel.")
    tacnode.add_argument("--points", dest="tacnode_points", type=str, default=None, help="t1:x1:t2:x2 points.")
    tacnode.add_argument("--delta", type=str, default=None, help="Contour offset for the double-integral form.")

    converge = commands.add_parser("converge", parents=[common], help="Finite-size convergence tables.")
    converge.add_argument("--points", dest="tacnode_points", type=str, default=None, help="t1:x1:t2:x2 points.")
    converge.add_argument(
        "--diagnostic",
        choices=("kernel", "g"),
        default="kernel",
        help="Compare kernels, or the rescaled g functions against -Ai.",
    )
    converge.add_argument("--lambdas", type=str, default=None, help="Comma-separated λ values for --diagnostic g.")
    return parser


def configure_logging(level: str) -> None:
    """Configure process logging."""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    )


def _names(value: str) -> list[str]:
    names: list[str] = list(_split_csv(value))
    if not names:
        raise ConfigError("an empty name list was given")
    return names


def _out(config: RunConfig) -> Path | None:
    return Path(config.out) if config.out is not None else None


def cmd_selftest(args: argparse.Namespace, config: RunConfig) -> int:
    """Run the self-test and print its report."""
    suite = SelfTest(
        a=config.a,
        seed=config.chain.seed,
        full=args.full,
        settings=config.kernel,
        airy_config=config.airy,
        logger=logging.getLogger("double_aztec.selftest"),
    )
    results = suite.run()
    report: str = format_report(results, config.chain.seed)
    out: Path | None = _out(config)
    if out is None:
        sys.stdout.write(report)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(report, encoding="utf-8")
    return 0 if all(result.passed for result in results) else 1


def cmd_kernel(args: argparse.Namespace, config: RunConfig) -> int:
    """Evaluate K̃ in the selected representations; err_est is their largest spread."""
    ctx: KernelContext = build_context(config.a, config.n, config.m, config.kernel)
    reps = build_default_representation_registry().create_many(_names(config.representation), ctx)
    half: int = config.n // 2
    points = list(config.points) or [(half, x, half, 0) for x in range(-2, 3)]
    values = kernel_grid(ctx, reps, points)
    rows: list[dict[str, Any]] = []
    for index, point in enumerate(points):
        chunk = values[index * len(reps) : (index + 1) * len(reps)]
        row: dict[str, Any] = dict(zip(("r", "x", "s", "y"), point))
        row.update({f"value_{value.representation}": float(np.real(value.value)) for value in chunk})
        numbers: list[float] = [float(np.real(value.value)) for value in chunk]
        row["err_est"] = max(numbers) - min(numbers)
        rows.append(row)
    write_table(_out(config), rows, config.fmt, run_metadata("kernel", config))
    return 0


def cmd_gap(args: argparse.Namespace, config: RunConfig) -> int:
    """Compute det(1 - χK̃χ) for the requested lines and windows."""
    ctx: KernelContext = build_context(config.a, config.n, config.m, config.kernel)
    name: str = _names(config.representation)[0]
    rep = build_default_representation_registry().create("em" if name == "all" else name, ctx)
    lines: list[int] = list(config.lines) or [config.n]
    windows: list[tuple[int, int]] = list(config.windows) or [(0, 0)] * len(lines)
    row: dict[str, Any] = {
        "lines": " ".join(str(line) for line in lines),
        "windows": " ".join(f"{lo}:{hi}" for lo, hi in windows),
        "probability": gap_probability(ctx, lines, windows, rep),
    }
    if args.exact:
        counter = TransferCounter(build_region(ctx.shape), config.a)
        wanted: dict[int, list[int]] = {}
        for line, (lo, hi) in zip(lines, windows):
            wanted.setdefault(line, []).extend(range(lo, hi + 1))
        row["exact"] = counter.gap_probability(wanted)
        row["abs_error"] = abs(row["probability"] - row["exact"])
    write_table(_out(config), [row], config.fmt, run_metadata("gap", config))
    return 0


def _draw_single(config: RunConfig) -> tuple[list[Tiling], np.ndarray]:
    rng: np.random.Generator = np.random.default_rng(config.chain.seed)
    tilings: list[Tiling] = [shuffle_single_aztec(config.n, config.a, rng) for _ in range(config.chain.samples)]
    return tilings, np.array([observe_vertical_fraction(tiling) for tiling in tilings])


def cmd_sample(args: argparse.Namespace, config: RunConfig) -> int:
    """Sample tilings; writes batch-means estimates and optionally the last tiling."""
    rows: list[dict[str, Any]] = []
    last: list[Tiling] = []
    if config.single:
        tilings, fractions = _draw_single(config)
        last.append(tilings[-1])
        summary = estimate(fractions)
        rows.append({"observable": "vertical_fraction", "mean": summary.mean, "stderr": summary.stderr, "samples": summary.samples})
    else:
        region: Region = build_region(ModelShape(a=config.a, n=config.n, m=config.m))
        observables: list[tuple[str, Callable[[Tiling], float]]] = [("vertical_fraction", observe_vertical_fraction)]
        if config.lines:
            windows: dict[int, list[int]] = {}
            for line, (lo, hi) in zip(config.lines, config.windows):
                windows.setdefault(line, []).extend(range(lo, hi + 1))
            observables.append(("gap", observe_gap(windows)))
        sampler = TilingSampler(
            start=all_horizontal_tiling(region),
            a=config.a,
            config=config.chain,
            progress=True,
            logger=logging.getLogger("double_aztec.sampler"),
        )
        def keep_last(_: int, tiling: Tiling) -> None:
            last[:] = [tiling]

        streams = sampler.run([observable for _, observable in observables], on_sample=keep_last)
        combined: np.ndarray = np.concatenate(streams, axis=0)
        for column, (label, _) in enumerate(observables):
            summary = estimate(combined[:, column])
            rows.append({"observable": label, "mean": summary.mean, "stderr": summary.stderr, "samples": summary.samples})
    metadata: dict[str, Any] = run_metadata("sample", config)
    write_table(_out(config), rows, config.fmt, metadata)
    if config.tiling is not None and last:
        write_tiling(Path(config.tiling), last[-1], config.fmt, metadata)
    return 0


def cmd_render(args: argparse.Namespace, config: RunConfig) -> int:
    """Render a tiling file, or a freshly sampled tiling, as SVG."""
    if config.tiling is not None:
        tiling: Tiling = read_tiling(Path(config.tiling))
    elif config.single:
        tiling = shuffle_single_aztec(config.n, config.a, np.random.default_rng(config.chain.seed))
    else:
        region: Region = build_region(ModelShape(a=config.a, n=config.n, m=config.m))
        chain = FlipChain.start(all_horizontal_tiling(region), config.a, np.random.default_rng(config.chain.seed))
        chain.advance(config.chain.burn_in_for(config.n))
        tiling = chain.tiling()
    from double_aztec.render import render_svg

    document: bytes = render_svg(tiling, config.render, config.a)
    out: Path | None = _out(config)
    if out is None:
        sys.stdout.buffer.write(document)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(document)
        logger.info("Wrote %s", out)
    return 0


def cmd_tacnode(args: argparse.Namespace, config: RunConfig) -> int:
    """Evaluate the tacnode kernel in the selected forms."""
    ctx = AiryContext(config.sigma, config.airy)
    forms = build_default_form_registry().create_many(_names(config.form), ctx)
    raw = config.tacnode_points or DEFAULT_TACNODE_POINTS
    points: list[TacnodePoint] = [TacnodePoint(*point, delta=config.airy.delta) for point in raw]
    write_table(_out(config), tacnode_grid(ctx, forms, points), config.fmt, run_metadata("tacnode", config))
    return 0


def cmd_converge(args: argparse.Namespace, config: RunConfig) -> int:
    """Tabulate finite-size against limiting values over config.t_list."""
    if args.diagnostic == "g":
        lambdas = tuple(float(item) for item in _split_csv(args.lambdas)) if args.lambdas else DEFAULT_LAMBDAS
        rows = g_limit_diagnostic(config.a, lambdas, config.t_list, config.kernel)
    else:
        name: str = _names(config.representation)[0]
        study = ConvergenceStudy(
            a=config.a,
            sigma=config.sigma,
            representation="k1" if name == "all" else name,
            form="i" if config.form == "all" else _names(config.form)[0],
            settings=config.kernel,
            airy_config=config.airy,
            logger=logging.getLogger("double_aztec.scaling"),
        )
        rows = study.table(config.tacnode_points or CONVERGENCE_POINTS, config.t_list)
        logger.info("Error decreased from smallest to largest t at %.0f%% of points.", 100.0 * trend_fraction(rows))
    write_table(_out(config), rows, config.fmt, run_metadata("converge", config))
    return 0


HANDLERS: dict[str, Callable[[argparse.Namespace, RunConfig], int]] = {
    "selftest": cmd_selftest,
    "kernel": cmd_kernel,
    "gap": cmd_gap,
    "sample": cmd_sample,
    "render": cmd_render,
    "tacnode": cmd_tacnode,
    "converge": cmd_converge,
}


def run(args: argparse.Namespace) -> int:
    """Run one subcommand and return its exit code."""
    load_dotenv()
    try:
        config: RunConfig = RunConfig.from_sources(args)
        configure_logging(config.log_level)
        return HANDLERS[args.command](args, config)
    except DoubleAztecError as error:
        logger.error("%s: %s", type(error).__name__, error)
        return error.exit_code
    except ValueError as error:
        logger.error("%s", error)
        return 2
    except KeyboardInterrupt:
        logger.info("Stopped by user.")
        return 130


def main(argv: Sequence[str] | None = None) -> int:
    """CLI entrypoint."""
    parser = build_parser()
    args = parser.parse_args(argv)
    return run(args)
