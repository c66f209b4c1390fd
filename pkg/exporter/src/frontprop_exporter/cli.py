"""Command-line exporter.

    export --framework {tf|torch} --in model.keras --out model.json \
        --verify 100 --seed 42

Writes the interchange JSON and emits the ExportReport as JSON on
standard output.  Exit codes: 0 success, 1 unmappable layer or parity
failure, 2 bad usage or unreadable input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .report import ExportError

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="export",
        description="Convert a trained sequential model to interchange JSON, verifying parity.",
    )
    parser.add_argument("--framework", required=True, choices=("tf", "torch"))
    parser.add_argument("--in", dest="source", required=True, help="saved source model")
    parser.add_argument("--out", required=True, help="interchange JSON destination")
    parser.add_argument("--verify", type=int, default=100, help="verification input count")
    parser.add_argument("--seed", type=int, default=42)
    return parser


def run(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if not Path(args.source).exists():
        print(f"error: no such file: {args.source}", file=sys.stderr)
        return 2
    try:
        if args.framework == "tf":
            from .keras_export import export_keras as export_fn
        else:
            from .torch_export import export_torch as export_fn
        report = export_fn(args.source, args.out, verify=args.verify, seed=args.seed)
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(report.to_json())
    return 0


def main(argv=None) -> None:
    raise SystemExit(run(argv))


if __name__ == "__main__":
    main()
