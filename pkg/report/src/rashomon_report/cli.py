"""`report --figures <spec file> --out <dir>`: render every figure in the spec."""

from __future__ import annotations

import argparse
import json
import sys

from .figures import load_spec_file, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="report", description=__doc__)
    parser.add_argument("--figures", required=True, help="JSON list of figure spec entries")
    parser.add_argument("--out", required=True, help="directory for rendered images")
    args = parser.parse_args(argv)
    try:
        specs = load_spec_file(args.figures, out_dir=args.out)
        for spec in specs:
            render(spec)
            print(f"wrote {spec.output} ({spec.kind})")
    except Exception as exc:  # noqa: BLE001 - single reporting point for the CLI contract
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
