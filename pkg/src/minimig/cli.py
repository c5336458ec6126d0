"""Headless command line: replay a directive script against a manifest, or
serve the HTTP API for the companion UI."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import MigrationError
from .scripting import ScriptReport, final_summary, run_script
from .session import load_manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minimig",
        description="Interactive, rule-based migration of procedural mini-programs",
    )
    parser.add_argument("--manifest", required=True, help="session manifest (models, rules, mappings)")
    parser.add_argument("--script", help="directive script to replay")
    parser.add_argument("--mode", choices=["auto", "choice", "debug"], default="auto",
                        help="default lookup mode for produce directives")
    parser.add_argument("--export-dir", default=".", help="base directory for export commands")
    parser.add_argument("--serve", type=int, metavar="PORT", help="serve the HTTP API instead")
    parser.add_argument("--host", default="127.0.0.1")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=os.environ.get("MINIMIG_LOG", "WARNING").upper())
    try:
        session = load_manifest(Path(args.manifest))
    except (OSError, ValueError, MigrationError) as exc:
        print(f"error: cannot load manifest: {exc}", file=sys.stderr)
        return 2

    if args.serve is not None:
        import uvicorn

        from .service import build_app

        app = build_app(session)
        uvicorn.run(app, host=args.host, port=args.serve, log_level="warning")
        return 0

    if not args.script:
        print("error: --script or --serve is required", file=sys.stderr)
        return 2

    report = ScriptReport()
    status = 0
    try:
        run_script(session, Path(args.script).read_text(),
                   default_mode=args.mode, export_dir=Path(args.export_dir), report=report)
    except MigrationError:
        status = 1
    final_summary(session, report)
    print(report.text(), end="")
    return status


if __name__ == "__main__":
    sys.exit(main())
