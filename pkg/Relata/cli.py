# Relata/cli.py

import argparse
import json
import math
import sys
from typing import List, Optional

from loguru import logger
from rich.console import Console
from rich.table import Table

from Relata import __version__
from Relata.exceptions import RelataError, UsageError
from Relata.experiment import Model, SimulationConfig
from Relata.export import (
    ExportToExcel,
    build_manifest,
    export_records,
    export_scan,
    export_sweep,
    load_config_or_manifest,
    write_manifest,
)
from Relata.physics.feasibility import SWEEP_AXES, FeasibilityQuery, fiber_scenarios, sweep, tilt_angle
from Relata.physics.relativity import (
    ImpactClass,
    build_impact_contexts,
    classify_experiment,
    is_spacelike,
    threshold_velocity,
    time_difference_in_frame,
)
from Relata.simulation.scan import AngleGrid, run_scan
from Relata.simulation.trial_runner import TrialRunner

LOG_FORMAT = "<level>{level: <8}</level> | {name}:{function} - {message}"


class RelataArgumentParser(argparse.ArgumentParser):
    """argparse 的錯誤改為拋出 UsageError，由 main 統一轉成 exit code 1。"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def configure_logger(verbosity: int = 0) -> None:
    """
    設定 loguru 輸出到 stderr。

    Args:
        verbosity (int): >0 為 DEBUG，0 為 WARNING，<0 為 ERROR
    """
    level = "DEBUG" if verbosity > 0 else "WARNING" if verbosity == 0 else "ERROR"
    logger.remove()
    logger.add(sys.stderr, level=level, format=LOG_FORMAT)


def _show_progress(args) -> bool:
    return not args.no_progress and sys.stderr.isatty()


def _load_config(args) -> SimulationConfig:
    config = load_config_or_manifest(args.config)
    changes = {}
    if getattr(args, "model", None) is not None:
        changes["model"] = Model(args.model)
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.seed is not None:
        changes["seed"] = args.seed
    if changes:
        logger.debug("command-line overrides: {}", changes)
        config = config.replace(**changes)
    return config


def cmd_simulate(args, console: Console) -> int:
    config = _load_config(args)
    runner = TrialRunner(config, workers=args.workers, progress=_show_progress(args))
    result = runner.run(collect_records=args.records is not None)
    if args.records is not None:
        export_records(result.records, args.records)
    manifest = build_manifest(result, canonical=args.canonical)
    write_manifest(manifest, args.out if args.out is not None else sys.stdout)
    return 0


def cmd_classify(args, console: Console) -> int:
    config = load_config_or_manifest(args.config)
    geometry = config.geometry
    first, second = build_impact_contexts(geometry, (0.0, 0.0), config.distinguishability)
    experiment_class = classify_experiment(first, second, config.tie_tolerance)

    console.print(str(experiment_class), highlight=False)
    table = Table(show_header=False, box=None)
    local1 = time_difference_in_frame(first.event, second.event, first.frame)
    local2 = time_difference_in_frame(second.event, first.event, second.frame)
    table.add_row("t'1 - t'2 in BS1 frame", f"{local1:.6g} s")
    table.add_row("t'2 - t'1 in BS2 frame", f"{local2:.6g} s")
    threshold = threshold_velocity(second.event.t - first.event.t, second.event.x - first.event.x)
    table.add_row("threshold velocity", f"{threshold:.6g} m/s")
    table.add_row("tilt angle", f"{math.degrees(tilt_angle(geometry.V)):.6g} deg")
    table.add_row("spacelike", str(is_spacelike(first.event, second.event)).lower())
    console.print(table, highlight=False)

    if experiment_class == (ImpactClass.NON_BEFORE, ImpactClass.NON_BEFORE):
        logger.warning("{} has no alternative-description prediction; AD is unspecified here", experiment_class)
    return 0


def _parse_sweep(text: str):
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"Invalid sweep {text!r}; expected axis:start:stop:step.")
    axis = parts[0]
    if axis not in SWEEP_AXES:
        raise UsageError(f"Unknown sweep axis {axis!r}; use one of {', '.join(SWEEP_AXES)}.")
    try:
        start, stop, step = (float(p) for p in parts[1:])
    except ValueError:
        raise UsageError(f"Invalid sweep {text!r}; start, stop and step must be numbers.")
    return axis, start, stop, step


def cmd_feasibility(args, console: Console) -> int:
    if args.scenarios:
        velocity = 100.0 if args.V is None else args.V
        table = Table(title=f"fiber scenarios at V = {velocity:g} m/s")
        for column in ("scenario", "L (m)", "printed (s)", "computed (s)", "deviation"):
            table.add_column(column)
        for row in fiber_scenarios(velocity).itertuples(index=False):
            table.add_row(row.scenario, f"{row.L:g}", f"{row.printed:.4g}", f"{row.computed:.4g}",
                          f"{row.deviation:+.2%}")
        console.print(table, highlight=False)
        return 0

    if args.sweep is not None:
        axis, start, stop, step = _parse_sweep(args.sweep)
        result = sweep(axis, start=start, stop=stop, step=step, V=args.V, L=args.L,
                       tau=args.tau, delta_t=args.delta_t)
        export_sweep(result, args.out if args.out is not None else sys.stdout)
        return 0

    if args.L is None:
        raise UsageError("feasibility needs --L (or --sweep / --scenarios).")
    name, value = FeasibilityQuery(L=args.L, V=args.V, tau=args.tau, delta_t=args.delta_t).solve()
    if name == "delta_t_max":
        console.print(f"delta_t_max = {value:.4g} s", highlight=False)
    else:
        console.print(f"V_min ≈ {value:.4g} m/s", highlight=False)
        console.print(f"tilt angle = {math.degrees(tilt_angle(value)):.4g} deg", highlight=False)
    return 0


def cmd_scan(args, console: Console) -> int:
    config = _load_config(args)
    grid = AngleGrid.parse(args.angle_grid)
    table = run_scan(config, grid, workers=args.workers, progress=_show_progress(args))
    export_scan(table, args.out if args.out is not None else sys.stdout)
    if args.xlsx is not None:
        ExportToExcel(table).export(args.xlsx)
    return 0


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"must satisfy 0 <= seed < 2**64, got {value}")
    return value


def build_parser() -> RelataArgumentParser:
    parser = RelataArgumentParser(
        prog="relata",
        description="Moving beam-splitter experiment: Monte Carlo simulation and feasibility planning.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_const", const=1, dest="verbosity", default=0,
                           help="log at DEBUG level")
    verbosity.add_argument("-q", "--quiet", action="store_const", const=-1, dest="verbosity",
                           help="log errors only")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True
    common = dict(formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    simulate = commands.add_parser("simulate", help="run trials and print a run manifest", **common)
    simulate.add_argument("config", help="YAML config or a previous run manifest")
    simulate.add_argument("--model", choices=[m.value for m in Model], default=None,
                          help="override the config model (config default: qm)")
    simulate.add_argument("--trials", type=_positive_int, default=None, help="override the trial count")
    simulate.add_argument("--seed", type=_seed, default=None, help="override the RNG seed")
    simulate.add_argument("--workers", type=_positive_int, default=1, help="worker threads")
    simulate.add_argument("--records", default=None, metavar="PATH", help="write per-trial CSV records")
    simulate.add_argument("--out", default=None, metavar="PATH", help="manifest path (default: stdout)")
    simulate.add_argument("--canonical", action="store_true", help="omit the timestamp from the manifest")
    simulate.add_argument("--no-progress", action="store_true", help="hide the progress bar")
    simulate.set_defaults(handler=cmd_simulate)

    classify = commands.add_parser("classify", help="classify the zero-jitter impacts", **common)
    classify.add_argument("config", help="YAML config or a previous run manifest")
    classify.add_argument("--seed", type=_seed, default=None,
                          help="accepted for symmetry with simulate; classification draws no random numbers")
    classify.set_defaults(handler=cmd_classify)

    feasibility = commands.add_parser("feasibility", help="solve or sweep the timing constraint", **common)
    feasibility.add_argument("--V", type=float, default=None, help="BS2 velocity, m/s")
    feasibility.add_argument("--L", type=float, default=None, help="total distance L1 + L2, m")
    feasibility.add_argument("--delta-t", dest="delta_t", type=float, default=None, help="path delay, s")
    feasibility.add_argument("--tau", type=float, default=0.0, help="emission delay, s")
    feasibility.add_argument("--sweep", default=None, metavar="AXIS:START:STOP:STEP",
                             help=f"sweep one of {', '.join(SWEEP_AXES)} (stop inclusive)")
    feasibility.add_argument("--out", default=None, metavar="PATH", help="sweep CSV path (default: stdout)")
    feasibility.add_argument("--scenarios", action="store_true", help="print the three fiber-length scenarios")
    feasibility.add_argument("--seed", type=_seed, default=None,
                             help="accepted for symmetry with simulate; feasibility draws no random numbers")
    feasibility.set_defaults(handler=cmd_feasibility)

    scan = commands.add_parser("scan", help="run both models over an angle grid", **common)
    scan.add_argument("config", help="YAML config or a previous run manifest")
    scan.add_argument("--angle-grid", dest="angle_grid", required=True, metavar="SPEC",
                      help="ALPHA,BETA in degrees; ALPHA is START[:STOP:STEP], BETA a range, alpha or -alpha")
    scan.add_argument("--trials", type=_positive_int, default=None, help="override trials per grid point")
    scan.add_argument("--seed", type=_seed, default=None, help="override the RNG seed")
    scan.add_argument("--workers", type=_positive_int, default=1, help="worker threads")
    scan.add_argument("--out", default=None, metavar="PATH", help="scan CSV path (default: stdout)")
    scan.add_argument("--xlsx", default=None, metavar="PATH", help="also write an Excel workbook")
    scan.add_argument("--no-progress", action="store_true", help="hide the progress bar")
    scan.set_defaults(handler=cmd_scan)
    return parser


def _report(error: RelataError) -> int:
    line = {"error": type(error).__name__, "message": str(error), "exit_code": error.exit_code}
    sys.stderr.write(json.dumps(line) + "\n")
    return error.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    """
    命令列進入點。

    Returns:
        int: 0 成功，1 使用或設定錯誤，2 物理上不可行，3 不支援的設定
    """
    try:
        args = build_parser().parse_args(argv)
    except RelataError as e:
        return _report(e)
    configure_logger(args.verbosity)
    console = Console(highlight=False, soft_wrap=True)
    try:
        return args.handler(args, console)
    except RelataError as e:
        logger.debug("{} failed: {!r}", args.command, e)
        return _report(e)
