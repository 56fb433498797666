"""Command-line entry point: ``qopt-bench {gen-instances,run,report,strategy}``.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime failure.
Settings resolve as defaults < ``--config`` file < ``QOPT_BENCH_SEED`` < flags.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .config import (
    BenchmarkConfig,
    ConfigError,
    expand_shorthand,
    load_config_file,
    parse_int_range,
)

log = logging.getLogger("qopt_bench")

SEED_ENV = "QOPT_BENCH_SEED"
PLOT_FAMILIES = ("area", "optgap", "cutsize", "volumetric")
FORMATS = ("svg", "json", "csv")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _setup_logging(verbosity: int) -> None:
    level = logging.INFO - 10 * verbosity
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("ts=%(asctime)s level=%(levelname)s logger=%(name)s msg=%(message)r"))
    root = logging.getLogger("qopt_bench")
    root.handlers[:] = [handler]
    root.setLevel(max(level, logging.DEBUG))
    root.propagate = False


def _csv_list(text: str, allowed) -> List[str]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in items if s not in allowed]
    if bad:
        raise ConfigError(f"unknown choice(s) {bad}; allowed: {', '.join(allowed)}")
    return items


# flag name -> config shorthand key understood by expand_shorthand
_RUN_FLAGS = {
    "solver": "solver", "method": "method", "sizes": "sizes", "restarts": "restarts",
    "shots": "shots", "rounds": "rounds", "max_iters": "max_iters", "objective": "objective",
    "angles": "angles", "angle_table": "angle_table", "minimizer": "minimizer", "anneal": "anneal",
    "profile": "profile", "noise": "noise", "seed": "seed", "instance_seed": "instance_seed",
    "alpha": "alpha", "eta": "eta", "jobs": "jobs", "out": "out", "time_scale": "time_scale",
    "proxy_sweeps": "proxy_sweeps_per_us", "exhaustion_limit": "exhaustion_limit",
}


def _log_flags(p, top=False):
    # accepted before or after the subcommand; the subcommand copies default to
    # SUPPRESS so they never clobber the top-level values
    default = {} if top else {"default": argparse.SUPPRESS}
    p.add_argument("-v", "--verbose", action="count", help="debug logging", **(default or {"default": 0}))
    p.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only", **default)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qopt-bench", description="Max-Cut benchmark harness for QAOA and quantum annealing.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _log_flags(p, top=True)
    sub = p.add_subparsers(dest="command", metavar="{gen-instances,run,report,strategy}", parser_class=_Parser)

    g = sub.add_parser("gen-instances", help="generate and solve 3-regular Max-Cut instances")
    _log_flags(g)
    g.add_argument("--sizes", default="4..16:2", help="MIN..MAX[:STEP] (default 4..16:2)")
    g.add_argument("--seed", type=int, default=None, help="master seed (default 0 or $QOPT_BENCH_SEED)")
    g.add_argument("--exhaustion-limit", type=int, default=24, help="largest size solved exactly")
    g.add_argument("--out", default="instances", help="output directory")

    S = argparse.SUPPRESS
    r = sub.add_parser("run", help="execute a benchmark and write a run directory", argument_default=S)
    _log_flags(r)
    r.add_argument("--config", help="JSON config file (flags override it)")
    r.add_argument("--solver", choices=("qaoa", "qa"))
    r.add_argument("--method", type=int, choices=(1, 2), help="1: single execution, 2: full benchmark")
    r.add_argument("--sizes", help="problem sizes MIN..MAX[:STEP] (default 4..12:2)")
    r.add_argument("--restarts", type=int, help="restarts per size (default 1)")
    r.add_argument("--shots", help="shots or reads; comma list allowed for method 1 (default 1000)")
    r.add_argument("--rounds", help="QAOA rounds p; comma list or range allowed for method 1 (default 2)")
    r.add_argument("--max-iters", type=int, help="minimizer evaluation cap (default 30)")
    r.add_argument("--objective", choices=("ar", "cvar", "gibbs", "best"))
    r.add_argument("--angles", choices=("default", "random", "fixed"), help="initial angle mode")
    r.add_argument("--angle-table", help="JSON table of fixed angles per p")
    r.add_argument("--minimizer", choices=("nelder-mead", "cobyla"))
    r.add_argument("--anneal", help="anneal times in us, MIN..MAXxFACTOR (default 1..256x2)")
    r.add_argument("--profile", help="device profile preset or JSON file")
    r.add_argument("--noise", help="noise preset: noiseless or typical")
    r.add_argument("--seed", type=int, help="master seed")
    r.add_argument("--instance-seed", type=int, help="seed for instance generation (default: --seed)")
    r.add_argument("--alpha", type=float, help="CVaR tail fraction (default 0.1)")
    r.add_argument("--eta", type=float, help="Gibbs inverse temperature (default 0.5)")
    r.add_argument("--time-scale", type=float, help="annealer energy scale per us (default 10)")
    r.add_argument("--proxy-sweeps", type=float, help="classical proxy sweeps per us (default 1)")
    r.add_argument("--exhaustion-limit", type=int, help="largest size solved exactly (default 24)")
    r.add_argument("--jobs", type=int, help="worker processes, one size per task (default 1)")
    r.add_argument("--instances", help="directory of stored instances to reuse")
    r.add_argument("--out", help="run directory (default runs/latest)")

    rp = sub.add_parser("report", help="render plots from a run directory")
    _log_flags(rp)
    rp.add_argument("--run", required=True, help="run directory")
    rp.add_argument("--plots", default=",".join(PLOT_FAMILIES), help="comma list of " + ",".join(PLOT_FAMILIES))
    rp.add_argument("--format", default="svg,json", help="comma list of svg,json,csv")
    rp.add_argument("--ratio", default="ar", choices=("ar", "cvar", "gibbs", "best"), help="area-plot color")
    rp.add_argument("--time", default="quantum", choices=("quantum", "elapsed", "classical"), help="area-plot axis")
    rp.add_argument("--qv", type=int, default=32, help="quantum-volume backdrop (0 disables)")
    rp.add_argument("--out", help="output directory (default RUN/report)")

    st = sub.add_parser("strategy", help="parameter-strategy analysis over QAOA runs")
    _log_flags(st)
    st.add_argument("--runs", nargs="+", required=True, help="run directories")
    st.add_argument("--split", type=float, default=0.8, help="training fraction of instances")
    st.add_argument("--grid", default="log:1:1e6:25", help="resource grid KIND:MIN:MAX:COUNT")
    st.add_argument("--ratio", default="ar", choices=("ar", "cvar", "gibbs", "best"))
    st.add_argument("--statistic", default="mean", choices=("mean", "median"))
    st.add_argument("--seed", type=int, default=None, help="split seed (default 0 or $QOPT_BENCH_SEED)")
    st.add_argument("--format", default="svg,json", help="comma list of svg,json")
    st.add_argument("--out", default="strategy", help="output directory")
    return p


def _env_seed() -> Optional[int]:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def resolve_config(args: argparse.Namespace) -> BenchmarkConfig:
    """Layer defaults, config file, environment seed and explicit flags."""
    merged = {}
    if getattr(args, "config", None):
        merged.update(load_config_file(args.config))
    env = _env_seed()
    if env is not None:
        merged["seed"] = env
    flags = {key: getattr(args, attr) for attr, key in _RUN_FLAGS.items() if hasattr(args, attr)}
    # shorthand expansion sets list and scalar together, so a flag replaces both
    merged.update(expand_shorthand(flags))
    return BenchmarkConfig.from_dict(merged).validate()


def _cmd_gen(args) -> int:
    from .graphs import generate_instances

    lo, hi, step = parse_int_range(args.sizes)
    seed = args.seed if args.seed is not None else (_env_seed() or 0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for path in generate_instances(range(lo, hi + 1, step), seed, out, args.exhaustion_limit):
        log.info("wrote %s", path)
    print(out)
    return 0


def _cmd_run(args) -> int:
    from .runner import run_benchmark

    cfg = resolve_config(args)
    instances = Path(args.instances) if getattr(args, "instances", None) else None
    if instances is not None and not instances.is_dir():
        raise ConfigError(f"instances directory {instances} does not exist")
    log.info("run solver=%s method=%d sizes=%s out=%s", cfg.solver, cfg.method, cfg.sizes, cfg.out)
    out = run_benchmark(cfg, instances)
    print(out)
    return 0


def report_run(run_dir, out_dir=None, plots=PLOT_FAMILIES, formats=("svg", "json"),
               ratio="ar", time_field="quantum", qv: Optional[int] = 32) -> List[Path]:
    """Write the requested plot families for one run; returns the files written."""
    from . import report
    from .runner import load_run

    run = load_run(run_dir)
    out = Path(out_dir) if out_dir else Path(run_dir) / "report"
    out.mkdir(parents=True, exist_ok=True)
    recs = run.records
    written: List[Path] = []

    def emit(data, stem):
        for fmt in formats:
            written.append(report.render(data, fmt, out / f"{stem}.{fmt}"))

    kinds = {r.get("type") for r in recs}
    if "area" in plots:
        if "iteration" not in kinds:
            log.warning("no iteration records: area plot is empty")
        emit(report.area_plot_data(recs, time_field, ratio), "area")
    if "optgap" in plots:
        if not kinds & {"group", "fidelity"}:
            log.warning("no final records: optimality-gap plot is empty")
        emit(report.optgap_summary_data(recs), "optgap")
    if "cutsize" in plots:
        finals = {r["size"]: r for r in report._final_records(recs)}
        if not finals:
            log.warning("no final records: no cut-size plots written")
        for n, rec in sorted(finals.items()):
            emit(report.cutsize_distribution_data(rec, run.instance(n)), f"cutsize_n{n:03d}")
    if "volumetric" in plots:
        if "fidelity" not in kinds:
            log.warning("no method-1 fidelity records: volumetric plot is empty")
        emit(report.volumetric_data(recs, qv or None), "volumetric")
    return written


def _cmd_report(args) -> int:
    plots = _csv_list(args.plots, PLOT_FAMILIES)
    formats = _csv_list(args.format, FORMATS)
    if not (Path(args.run) / "records.jsonl").exists():
        raise ConfigError(f"{args.run} is not a run directory (records.jsonl missing)")
    for path in report_run(args.run, args.out, plots, formats, args.ratio, args.time, args.qv):
        log.info("wrote %s", path)
    print(args.out or Path(args.run) / "report")
    return 0


def _cmd_strategy(args) -> int:
    from .strategy import analyze, parse_grid

    formats = _csv_list(args.format, ("svg", "json"))
    parse_grid(args.grid)
    for d in args.runs:
        if not (Path(d) / "records.jsonl").exists():
            raise ConfigError(f"{d} is not a run directory (records.jsonl missing)")
    seed = args.seed if args.seed is not None else (_env_seed() or 0)
    rec = analyze(args.runs, args.out, args.split, args.grid, seed, args.ratio, args.statistic, formats)
    log.info("train=%d test=%d instances", len(rec.train_instances), len(rec.test_instances))
    print(args.out)
    return 0


COMMANDS = {"gen-instances": _cmd_gen, "run": _cmd_run, "report": _cmd_report, "strategy": _cmd_strategy}


def main(argv: Optional[List[str]] = None) -> int:
    from .strategy import StrategyError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return 1
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    _setup_logging(-1 if args.quiet else args.verbose)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, StrategyError) as exc:
        log.error("configuration error: %s", exc)
        return 1
    except Exception as exc:
        log.error("runtime error: %s: %s", type(exc).__name__, exc)
        log.debug("traceback", exc_info=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
