"""Command line entry: render <scenario> <csv> <out-image> [--style cfg.json]."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .figures import FigureSpec, StyleError, render
from .schema import SCHEMAS, SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render an experiment scenario CSV to an image file.",
    )
    parser.add_argument("scenario", choices=sorted(SCHEMAS))
    parser.add_argument("csv", help="input scenario CSV")
    parser.add_argument("out", help="output image path (.png, .svg or .pdf)")
    parser.add_argument("--style", help="JSON file with style overrides")
    parser.add_argument("--xlabel", help="override the x axis label")
    parser.add_argument("--ylabel", help="override the y axis label")
    return parser


def _load_style(path: str) -> dict:
    try:
        raw = Path(path).read_text()
    except FileNotFoundError:
        raise StyleError(f"style file not found: {path}") from None
    try:
        style = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise StyleError(f"style file is not valid JSON: {exc}") from None
    if not isinstance(style, dict):
        raise StyleError(f"style config must be a JSON object, got {type(style).__name__}")
    return style


def cli_main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        style = _load_style(args.style) if args.style else {}
        out = render(
            FigureSpec(
                scenario=args.scenario,
                csv_path=args.csv,
                out_path=args.out,
                xlabel=args.xlabel,
                ylabel=args.ylabel,
                style=style,
            )
        )
    except (SchemaError, StyleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"out": str(out), "scenario": args.scenario}, sort_keys=True))
    return 0


def cli_entry() -> None:
    sys.exit(cli_main(sys.argv[1:]))
