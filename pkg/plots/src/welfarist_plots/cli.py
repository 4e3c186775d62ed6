"""Command-line renderer: ``plots --csv PATH --panel a..f --out PATH [--dry-run]``.

Exit codes: 0 success, 2 bad usage or schema/content mismatch (the message
carries the column diff), 3 unexpected runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .panels import PANEL_IDS, PanelSpec, SchemaMismatch, format_dry_run, render_panel

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render a regret-vs-horizon benchmark panel from a sweep CSV.",
    )
    parser.add_argument("--csv", required=True, help="input sweep CSV")
    parser.add_argument("--panel", required=True, choices=PANEL_IDS, help="panel id")
    parser.add_argument("--out", default=None, help="output image path (PNG)")
    parser.add_argument("--dry-run", action="store_true",
                        help="print the plotted (x, y, err) triples instead of rendering")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if not args.dry_run and args.out is None:
        print("error: --out is required unless --dry-run is given", file=sys.stderr)
        return EXIT_USAGE
    spec = PanelSpec(panel_id=args.panel, input_csv=Path(args.csv))
    try:
        if args.dry_run:
            sys.stdout.write(format_dry_run(spec))
        else:
            written = render_panel(spec, args.out)
            print(f"wrote {written}")
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
