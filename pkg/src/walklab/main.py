# src/walklab/main.py
import argparse
import logging
import sys

from dotenv import load_dotenv

from walklab.db import connect, list_runs
from walklab.experiments import EXIT_CONFIG, EXIT_OK, list_suites, run_experiment, suite_config, suite_text, write_suites
from walklab.models.config import load_config, with_overrides
from walklab.models.experiment import ConfigError, load_experiment, validate_config
from walklab.utils.logging import setup_logging
from walklab.utils.pool import set_default_threads
from walklab.utils.seeding import MASK64

logger = logging.getLogger(__name__)


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value <= MASK64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _add_common(parser: argparse.ArgumentParser, default) -> None:
    # accepted before or after the subcommand
    parser.add_argument("--out", default=default, help="report directory (overrides WALKLAB_OUT_DIR)")
    parser.add_argument("--threads", type=int, default=default, help="worker threads (overrides WALKLAB_THREADS)")
    parser.add_argument("--seed", type=_u64, default=default, help="master seed (overrides SEED in the config)")
    parser.add_argument("--debug", action="store_true", default=default, help="DEBUG log level")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walklab", description="RWRE and Knudsen billiard experiments")
    _add_common(parser, None)
    common = argparse.ArgumentParser(add_help=False)
    _add_common(common, argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run one experiment config")
    target = run.add_mutually_exclusive_group(required=True)
    target.add_argument("config", nargs="?", help="experiment config file")
    target.add_argument("--suite", help="built-in suite id")

    validate = sub.add_parser("validate", parents=[common], help="check a config without running it")
    validate.add_argument("config")

    suites = sub.add_parser("suites", parents=[common], help="list the built-in acceptance suites")
    suites.add_argument("--write", metavar="DIR", help="write every suite as a config file into DIR")
    suites.add_argument("--show", action="store_true", help="print each suite's config text")

    history = sub.add_parser("history", parents=[common], help="list recorded runs")
    history.add_argument("--limit", type=int, default=20)
    history.add_argument("--experiment")
    return parser


def cmd_run(args, config) -> int:
    try:
        cfg = suite_config(args.suite) if args.suite else load_experiment(args.config)
    except ConfigError as e:
        for d in e.diagnostics:
            print(f"{e.source}: {d}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    outcome = run_experiment(cfg.with_seed(args.seed), config)
    print(f"{outcome.status}: {outcome.report_path}")
    for path in outcome.csv_paths:
        print(f"  csv: {path}")
    return outcome.exit_code


def cmd_validate(args) -> int:
    try:
        diags = validate_config(args.config)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    for d in diags:
        print(f"{args.config}: {d}")
    if diags:
        return EXIT_CONFIG
    print(f"{args.config}: ok")
    return EXIT_OK


def cmd_suites(args) -> int:
    if args.write:
        for path in write_suites(args.write):
            print(path)
        return EXIT_OK
    for suite_id in list_suites():
        cfg = suite_config(suite_id)
        print(f"{suite_id:34} {cfg.kind}")
        if args.show:
            print(suite_text(suite_id))
    return EXIT_OK


def cmd_history(args, config) -> int:
    if not config.db_path:
        print("run ledger disabled (WALKLAB_DB_PATH=off)")
        return EXIT_OK
    conn = connect(config.db_path)
    try:
        rows = list_runs(conn, limit=args.limit, experiment=args.experiment)
    finally:
        conn.close()
    if not rows:
        print("no runs recorded")
        return EXIT_OK
    print(f"{'started':26} {'experiment':18} {'status':20} {'run':40} report")
    for r in rows:
        print(f"{r.started_at:26} {r.experiment:18} {r.status:20} {r.run_id:40} {r.report_path or ''}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    config = with_overrides(load_config(), out_dir=args.out, threads=args.threads, debug=args.debug)
    setup_logging(config.debug)
    set_default_threads(config.threads)
    logger.debug(f"Starting {config.app_name} {args.command}")

    if args.command == "run":
        return cmd_run(args, config)
    if args.command == "validate":
        return cmd_validate(args)
    if args.command == "suites":
        return cmd_suites(args)
    return cmd_history(args, config)


if __name__ == "__main__":
    sys.exit(main())
