"""Single entry point: serve, simulate, report, and oracle subcommands.

Configuration precedence is defaults < --config file (SessionConfig field
names, JSON) < explicit command-line flags, and every run echoes its
effective configuration to stderr so there are no hidden defaults.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

from . import metrics
from .engine import EngineError, SessionConfig
from .oracle import Unsolvable, load_or_build, optimal_distance
from .sim import default_plan, run_experiment


class CliParser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _board_arg(text: str) -> tuple[int, ...]:
    try:
        cells = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("board must be 9 comma-separated integers")
    if sorted(cells) != list(range(9)):
        raise argparse.ArgumentTypeError("board must be a permutation of 0..8")
    return cells


def _latency_arg(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split("..")
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError("latency must look like 2..20")


def _skills_arg(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("skills must be comma-separated floats")


def _onoff(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on|off")
    return text == "on"


def build_parser() -> CliParser:
    parser = CliParser(prog="tilevote", description=__doc__)
    parser.add_argument("--config", type=Path, help="JSON config file (SessionConfig fields)")
    parser.add_argument("--cache", type=Path, help="distance-table cache file")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    def add_session_flags(p):
        p.add_argument("--round-seconds", type=float, dest="round_seconds")
        p.add_argument("--session-minutes", type=float, dest="session_minutes")
        p.add_argument("--delay-seconds", type=float, dest="inter_puzzle_delay")
        p.add_argument("--start-difficulty", type=int, dest="start_difficulty")
        p.add_argument("--feedback", type=_onoff, dest="feedback_enabled", metavar="on|off")
        p.add_argument("--quorum", choices=["all", "majority"])
        p.add_argument("--tie-break", choices=["lowest", "random"], dest="tie_break")
        p.add_argument("--seed", type=int, dest="rng_seed")

    serve_p = sub.add_parser("serve", help="run the game server")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8750)
    serve_p.add_argument("--ws-port", type=int, dest="ws_port")
    serve_p.add_argument("--tick-ms", type=int, dest="tick_ms", default=100)
    serve_p.add_argument("--grace", type=float, default=0.0, help="rejoin grace seconds")
    serve_p.add_argument("--mode", choices=["solo", "group"])
    serve_p.add_argument("--log", type=Path, default=Path("logs"), help="event log directory")
    add_session_flags(serve_p)

    sim_p = sub.add_parser("simulate", help="run the synthetic-agent experiment")
    sim_p.add_argument("--agents", type=int, help="agent count (defaults to len(skills))")
    sim_p.add_argument("--skills", type=_skills_arg, default=[0.55, 0.65, 0.75, 0.85, 0.95])
    sim_p.add_argument("--latency", type=_latency_arg, default=(2.0, 20.0), metavar="LO..HI")
    sim_p.add_argument("--persistence", type=float, default=0.0)
    sim_p.add_argument("--trials", type=int, default=30)
    sim_p.add_argument("--out", type=Path, help="output directory for logs and summaries")
    add_session_flags(sim_p)

    report_p = sub.add_parser("report", help="aggregate event logs into the comparison report")
    report_p.add_argument("--log", type=Path, required=True, help="log file or directory")
    report_p.add_argument("--ttest", choices=["welch", "student"], default="welch")
    report_p.add_argument("--format", choices=["text", "csv"], default="text")
    report_p.add_argument("--member", choices=["per-puzzle", "total"], default="per-puzzle")
    report_p.add_argument("--figures", type=Path, help="also render figures into this directory")

    oracle_p = sub.add_parser("oracle", help="build/cache the distance table; query a board")
    oracle_p.add_argument("--board", type=_board_arg, help="9 comma-separated cells, 0 = blank")
    oracle_p.add_argument("--rebuild", action="store_true", help="ignore any existing cache")
    return parser


def effective_session_config(args: argparse.Namespace) -> SessionConfig:
    base = SessionConfig().to_dict()
    if args.config:
        base.update(json.loads(Path(args.config).read_text()))
    for name in base:
        value = getattr(args, name, None)
        if value is not None:
            base[name] = value
    if getattr(args, "mode", None):
        base["mode"] = args.mode
    return SessionConfig.from_dict(base)


def _echo_config(command: str, payload: dict) -> None:
    print(f"tilevote {command} config: {json.dumps(payload, sort_keys=True)}", file=sys.stderr)


def cmd_serve(args) -> int:
    from .server import ServerConfig, serve

    table = load_or_build(args.cache)
    session_defaults = effective_session_config(args)
    config = ServerConfig(
        host=args.host,
        port=args.port,
        ws_port=args.ws_port,
        tick_ms=args.tick_ms,
        grace_seconds=args.grace,
        log_dir=args.log,
        defaults=session_defaults,
    )
    _echo_config(
        "serve",
        {
            "host": config.host,
            "port": config.port,
            "ws_port": config.resolved_ws_port(),
            "tick_ms": config.tick_ms,
            "grace_seconds": config.grace_seconds,
            "log_dir": str(config.log_dir),
            "session": session_defaults.to_dict(),
        },
    )
    try:
        asyncio.run(serve(table, config))
    except KeyboardInterrupt:
        pass
    return 0


def cmd_simulate(args) -> int:
    table = load_or_build(args.cache)
    skills = list(args.skills)
    if args.agents is not None and args.agents != len(skills):
        print(
            f"tilevote simulate: error: --agents {args.agents} does not match "
            f"{len(skills)} skills",
            file=sys.stderr,
        )
        return 1
    config = effective_session_config(args)
    plan = default_plan(
        skills,
        latency=args.latency,
        trials=args.trials,
        master_seed=config.rng_seed,
        persistence=args.persistence,
        config=config,
    )
    _echo_config(
        "simulate",
        {
            "skills": skills,
            "latency": list(args.latency),
            "persistence": args.persistence,
            "trials": args.trials,
            "session": config.to_dict(),
            "out": str(args.out) if args.out else None,
        },
    )
    result = run_experiment(plan, table, out_dir=args.out)
    text = metrics.render_text(result.report)
    text += "\nper-trial comparisons (group vs solo, Welch over trial means)\n"
    for band in result.report.bands:
        for measure in ("quality_vs_average", "quality_vs_best", "time_vs_solo"):
            g, s, res = result.trial_comparison(band, measure)
            if res is None:
                line = f"  {band:8s} {measure:20s} insufficient data"
            else:
                sig = "significant" if res.significant_at_05 else "not significant"
                line = (
                    f"  {band:8s} {measure:20s} group={g:10.3f} solo={s:10.3f} "
                    f"t={res.t:8.3f} p={res.p_value:.2e} ({sig})"
                )
            text += line + "\n"
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.txt").write_text(text)
        (out / "summary.csv").write_text(metrics.render_csv(result.report))
        from .figures import render_figures

        render_figures(result.report, out / "figures")
    return 0


def cmd_report(args) -> int:
    table = load_or_build(args.cache)
    report = metrics.build_report_from_logs(
        args.log,
        table,
        ttest_variant=args.ttest,
        per_puzzle_members=args.member == "per-puzzle",
    )
    _echo_config(
        "report",
        {"log": str(args.log), "ttest": args.ttest, "format": args.format,
         "member": args.member, "figures": str(args.figures) if args.figures else None},
    )
    if args.format == "csv":
        print(metrics.render_csv(report), end="")
    else:
        print(metrics.render_text(report), end="")
    if args.figures:
        from .figures import render_figures

        paths = render_figures(report, args.figures)
        print(f"wrote {len(paths)} figures to {args.figures}", file=sys.stderr)
    return 0


def cmd_oracle(args) -> int:
    cache = args.cache
    if args.rebuild and cache and Path(cache).exists():
        Path(cache).unlink()
    table = load_or_build(cache)
    _echo_config(
        "oracle",
        {"cache": str(cache) if cache else None, "states": len(table),
         "max_distance": table.max_distance},
    )
    if args.board is not None:
        print(optimal_distance(table, args.board))
    else:
        print(f"states={len(table)} max_distance={table.max_distance}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "serve": cmd_serve,
        "simulate": cmd_simulate,
        "report": cmd_report,
        "oracle": cmd_oracle,
    }
    try:
        return handlers[args.command](args)
    except (Unsolvable, EngineError, OSError, ValueError) as e:
        print(f"tilevote {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
