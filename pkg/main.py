# main.py
import argparse
import logging
import os
import sys
import time

import appdirs

from src import __version__
from src.cli.commands import history_table, run
from src.cli.output import write_output
from src.cli.runconfig import COMMANDS, FORMATS, PRESETS, load_config_file, parse_config
from src.core.config import ConfigManager
from src.core.database import DatabaseManager
from src.core.errors import ConfigError, TmssError

APP_NAME = "TMSS"
APP_AUTHOR = "TMSS"
DATA_DIR_ENV_VAR = "TMSS_DATA_DIR"


def setup_logging(log_dir = "logs", log_level = logging.INFO, console_level = logging.WARNING):
    """Sets up logging to a timestamped file and to stderr."""
    logger = logging.getLogger('tmss')
    logger.setLevel(log_level)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    os.makedirs(log_dir, exist_ok=True)
    timestamp = time.strftime("%Y-%m-%d_%H-%M-%S")
    log_file = os.path.join(log_dir, f"tmss_{timestamp}.log")

    fh = logging.FileHandler(log_file, encoding="utf-8")
    formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(name)s - %(message)s')
    fh.setFormatter(formatter)
    fh.setLevel(log_level)
    logger.addHandler(fh)

    ch = logging.StreamHandler(sys.stderr)
    ch.setFormatter(formatter)
    ch.setLevel(max(log_level, console_level))
    logger.addHandler(ch)
    return logger


def rotate_logs(log_dir, logger, max_logs = 5):
    """Rotates log files, keeping only the 'max_logs' most recent."""
    log_files = sorted(
        [os.path.join(log_dir, f) for f in os.listdir(log_dir) if f.startswith("tmss_") and f.endswith(".log")])

    while len(log_files) > max_logs:
        oldest_log = log_files.pop(0)
        try:
            os.remove(oldest_log)
            logger.info(f"Deleted old log file: {oldest_log}")
        except OSError as e:
            logger.error(f"Error deleting log file {oldest_log}: {e}")


def user_data_dir():
    return os.environ.get(DATA_DIR_ENV_VAR) or appdirs.user_data_dir(APP_NAME, APP_AUTHOR)


def build_parser():
    parser = argparse.ArgumentParser(prog="tmss", description="Entanglement and Bell non-locality dynamics of "
                                                              "filtered two-mode squeezed states.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS + ("history",))
    parser.add_argument("--config", help="run configuration file (INI or JSON)")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="named parameter preset")
    parser.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one configuration value; may be repeated")
    parser.add_argument("--out", help="output path, '-' for stdout")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--limit", type=int, default=20, help="entries shown by 'history'")
    parser.add_argument("--verbose", action="store_true", help="debug logging on stderr")
    parser.add_argument("--no-journal", action="store_true", help="do not record this run")
    return parser


def _log_level(settings, logger):
    log_level_str = settings.get("Settings", "log_level", fallback="INFO").upper()
    log_level = getattr(logging, log_level_str, None)
    if not isinstance(log_level, int):
        logger.warning(f"Invalid log level '{log_level_str}' in settings. Using INFO.")
        log_level = logging.INFO
    return log_level


def main(argv = None):
    args = build_parser().parse_args(argv)

    data_dir = user_data_dir()
    os.makedirs(data_dir, exist_ok=True)
    log_dir = os.path.join(data_dir, "logs")
    logger = setup_logging(log_dir=log_dir, log_level=logging.DEBUG if args.verbose else logging.INFO,
                           console_level=logging.DEBUG if args.verbose else logging.WARNING)
    logger.debug(f"Using user data directory: {data_dir}")

    settings = ConfigManager(os.path.join(data_dir, "settings.ini"))
    if not args.verbose:
        log_level = _log_level(settings, logger)
        logger.setLevel(log_level)
        for handler in logger.handlers:
            handler.setLevel(log_level if isinstance(handler, logging.FileHandler) else max(log_level, logging.WARNING))
    logger.info(f"Logging initialized. Log level: {logging.getLevelName(logger.level)}")
    rotate_logs(log_dir, logger, settings.getint("Settings", "max_logs", fallback=10))

    journal = None
    if settings.getboolean("Settings", "journal", fallback=True) and not args.no_journal:
        journal = DatabaseManager(db_path=os.path.join(data_dir, "tmss_runs.db"))
    max_workers = max(1, settings.getint("Settings", "max_workers", fallback=4))

    try:
        if args.command == "history":
            if journal is None:
                raise ConfigError([("journal", "the run journal is disabled")])
            write_output(history_table(journal, args.limit), {"command": "history"}, args.format or "csv",
                         args.out or "-")
            return 0

        file_layer = None
        if args.config:
            try:
                file_layer = load_config_file(args.config)
            except OSError as e:
                raise ConfigError([("config", f"cannot read {args.config}: {e.strerror}")]) from e
        flags = {"command": args.command, "out": args.out, "format": args.format, "seed": args.seed}
        config = parse_config(preset=args.preset, overrides=args.set, flags=flags, file_layer=file_layer)
        return run(config, max_workers=max_workers, journal=journal)

    except TmssError as e:
        sys.stderr.write(f"tmss: {type(e).__name__}: {e}\n")
        logger.debug("Run failed", exc_info=True)
        return e.exit_code
    except Exception:
        logger.exception("An unhandled exception occurred:")
        return 1


if __name__ == '__main__':
    sys.exit(main())
