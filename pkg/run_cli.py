import argparse
import logging
import sys

import colorlog

import config
from core import (
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    cmd_bench,
    cmd_gen,
    cmd_hash,
    cmd_index_build,
    cmd_index_query,
    cmd_validate,
    load_run_config,
)
from errors import CapacityError, DimensionError, ParameterError, TensorFormatError, UsageError
from hashing.families import FamilyKind

logger = logging.getLogger()


def setup_logging():
    """Colored console output plus a detailed log file, like the service entry points."""
    logger.setLevel(logging.DEBUG)
    if logger.hasHandlers():
        logger.handlers.clear()
    console_handler = colorlog.StreamHandler()
    console_handler.setLevel(getattr(logging, config.LOG_LEVEL, logging.INFO))
    console_formatter = colorlog.ColoredFormatter(
        "%(log_color)s%(levelname)-8s%(reset)s %(blue)s%(message)s",
        log_colors={
            "DEBUG": "cyan",
            "INFO": "green",
            "WARNING": "yellow",
            "ERROR": "red",
            "CRITICAL": "red,bg_white",
        },
    )
    console_handler.setFormatter(console_formatter)
    file_handler = logging.FileHandler(config.LOG_FILE, mode="w")
    file_handler.setLevel(logging.DEBUG)
    file_formatter = logging.Formatter(
        "%(asctime)s - %(levelname)-8s - %(threadName)s - %(message)s"
    )
    file_handler.setFormatter(file_formatter)
    logger.addHandler(console_handler)
    logger.addHandler(file_handler)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    # Every flag defaults to None so that the config file can fill it in.
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--out")
    common.add_argument("--config", dest="config_path")

    family = _Parser(add_help=False)
    family.add_argument("--family", choices=[k.value for k in FamilyKind])
    family.add_argument("--rank", type=int)
    family.add_argument("--width", type=float)
    family.add_argument("--codes", type=int)
    family.add_argument("--distribution", choices=["rademacher", "gaussian"])

    parser = _Parser(prog="tensor-lsh", description="Tensorized LSH toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", parents=[common], help="Generate tensor files.")
    gen.add_argument("--format", choices=["dense", "cp", "tt", "pair"])
    gen.add_argument("--shape", type=int, nargs="+")
    gen.add_argument("--rank", type=int)
    gen.add_argument("--count", type=int)
    gen.add_argument("--angle", type=float)
    gen.add_argument("--distance", type=float)

    hash_cmd = sub.add_parser("hash", parents=[common, family], help="Hash tensor files.")
    hash_cmd.add_argument("inputs", nargs="*")
    hash_cmd.add_argument("--shape", type=int, nargs="+")

    validate = sub.add_parser("validate", parents=[common], help="Run the acceptance suite.")
    validate.add_argument("--trials", type=int)
    validate.add_argument(
        "--family", dest="families", action="append", choices=[k.value for k in FamilyKind]
    )

    bench = sub.add_parser("bench", parents=[common], help="Time the contraction kernels.")
    bench.add_argument("--repeats", type=int)

    for name in ("index-build", "index-query"):
        cmd = sub.add_parser(name, parents=[common, family], help=f"LSH index: {name[6:]}.")
        cmd.add_argument("inputs", nargs="*")
        cmd.add_argument("--index")
        cmd.add_argument("--bands", type=int)
        cmd.add_argument("--max-candidates", dest="max_candidates", type=int)
        cmd.add_argument("--no-rerank", dest="rerank", action="store_const", const=False)
    return parser


def run(argv=None) -> int:
    try:
        args = vars(build_parser().parse_args(argv))
        config_path = args.pop("config_path", None)
        cfg = load_run_config(args, config_path)
        logger.info(f"--- tensor-lsh {cfg.command} (seed={cfg.seed}) ---")
        if cfg.command == "gen":
            cmd_gen(cfg)
        elif cfg.command == "hash":
            listing = cmd_hash(cfg)
            if not cfg.out:
                sys.stdout.write(listing)
        elif cfg.command == "validate":
            status, _ = cmd_validate(cfg)
            return status
        elif cfg.command == "bench":
            cmd_bench(cfg)
        elif cfg.command == "index-build":
            cmd_index_build(cfg)
        elif cfg.command == "index-query":
            listing = cmd_index_query(cfg)
            if not cfg.out:
                sys.stdout.write(listing)
        return EXIT_OK
    except (UsageError, ParameterError, DimensionError, CapacityError) as e:
        logger.error(f"Usage error: {e}")
        return EXIT_USAGE
    except (OSError, TensorFormatError) as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO


if __name__ == "__main__":
    setup_logging()
    sys.exit(run())
