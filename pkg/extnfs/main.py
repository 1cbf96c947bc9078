"""Command line: one subcommand per pipeline stage plus the record check."""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from . import __version__
from .config import PipelineConfig, TUPLE_KEYS, coerce_value, load_config
from .errors import ExtnfsError
from .factorbase import count_degree1_ideals
from .fixtures import record_fixture, verify_record
from .log import configure_logging, pretty_print
from .pipeline import STAGES, run_all, run_stage

EXTRA_COMMANDS = ("all", "verify-record", "count-fb")


def _flag_help(name: str, default: Any) -> str:
    if name in TUPLE_KEYS:
        default = ",".join(str(v) for v in default)
    return f"Override the {name} config key (default: {default})"


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="ExTNFS discrete logarithms in F_p^4")
    parser.add_argument("command", choices=STAGES + EXTRA_COMMANDS,
                        help="Pipeline stage to run, 'all', 'verify-record' or 'count-fb'")
    parser.add_argument("--config", type=Path, default=None, help="key = value configuration file")
    parser.add_argument("--verbose", action="store_true", help="Log debug messages")
    parser.add_argument("--count-bound", type=int, dest="count_bound", default=1 << 26,
                        help="Bound for count-fb (default: 2^26)")
    parser.add_argument("--count-side", type=int, dest="count_side", choices=(0, 1), default=0,
                        help="Side for count-fb (default: 0)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    defaults = PipelineConfig()
    for item in fields(PipelineConfig):
        parser.add_argument(
            f"--{item.name.replace('_', '-')}",
            type=str,
            dest=f"cfg_{item.name}",
            default=None,
            help=_flag_help(item.name, getattr(defaults, item.name)),
        )
    return parser.parse_args(argv)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    out = {}
    for item in fields(PipelineConfig):
        raw = getattr(args, f"cfg_{item.name}")
        if raw is not None:
            out[item.name] = coerce_value(item.name, raw)
    return out


def _verify_record() -> bool:
    report = verify_record(record_fixture())
    for line in report.lines():
        pretty_print(line, "success" if line.startswith("PASS") else "error")
    return report.ok


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    try:
        if args.command == "verify-record":
            configure_logging(verbose=args.verbose, console=False)
            return 0 if _verify_record() else 1
        config = load_config(args.config, _overrides(args))
        configure_logging(Path(config.workdir) / "extnfs.log", args.verbose)
        if args.command == "count-fb":
            count = count_degree1_ideals(record_fixture().setup(), args.count_side, args.count_bound)
            pretty_print(f"degree-1 ideals on side {args.count_side} up to {args.count_bound}: {count}")
        elif args.command == "all":
            run_all(config)
        else:
            run_stage(args.command, config)
    except ExtnfsError as exc:
        pretty_print(str(exc), "error")
        raise SystemExit(1) from exc
    except KeyboardInterrupt:
        pretty_print("Interrupted", "warning")
        return 130
    return 0


if __name__ == "__main__":
    sys.exit(main())
