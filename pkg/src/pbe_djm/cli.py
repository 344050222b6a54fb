"""Command-line front end: ``pbe-djm <command> (--config FILE | --example N) --out DIR``.

Commands ``density``, ``error-table``, ``moments`` and ``oracle-compare``
write one CSV each; ``all`` writes every output listed in the config.
Files are named ``<case_name>_<output>.csv``.  With ``--example`` the
canonical configuration of that test problem is also written to
``<case_name>.cfg``.  Exit status is 0 only if every requested output was
produced.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import reports
from .errors import PBEError

COMMANDS = {
    "density": "density",
    "error-table": "error_table",
    "moments": "moments",
    "oracle-compare": "oracle_compare",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pbe-djm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(COMMANDS) + ["all"]:
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", type=Path, help="case configuration file")
        src.add_argument("--example", type=int, choices=range(1, 7), metavar="{1..6}",
                         help="use the canonical configuration of a test problem")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config is not None:
            cfg = reports.parse_config(args.config.read_text(encoding="utf-8"))
        else:
            cfg = reports.canonical_config(args.example)
    except (OSError, PBEError) as exc:
        print(f"pbe-djm: {exc}", file=sys.stderr)
        return 2

    args.out.mkdir(parents=True, exist_ok=True)
    if args.example is not None:
        (args.out / f"{cfg.case_name}.cfg").write_text(reports.emit_config(cfg), encoding="utf-8")

    wanted = list(cfg.outputs) if args.command == "all" else [COMMANDS[args.command]]
    status = 0
    for output in wanted:
        try:
            text = reports.RUNNERS[output](cfg)
        except PBEError as exc:
            print(f"pbe-djm: {output}: {exc.code}: {exc}", file=sys.stderr)
            status = 1
            continue
        path = args.out / f"{cfg.case_name}_{output}.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        logging.getLogger(__name__).info("wrote %s", path)
    return status


if __name__ == "__main__":
    sys.exit(main())
