#!/usr/bin/env python3
"""Validates report JSON files against docs/report.schema.json."""
import argparse
import json
import pathlib
import sys

import jsonschema


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("schema", type=pathlib.Path)
    parser.add_argument("reports", type=pathlib.Path, nargs="+", help="report files or directories")
    args = parser.parse_args()

    validator = jsonschema.Draft202012Validator(json.loads(args.schema.read_text()))
    files = []
    for path in args.reports:
        files.extend(sorted(path.glob("trial_*.json")) if path.is_dir() else [path])
    if not files:
        print("no reports found", file=sys.stderr)
        return 1
    bad = 0
    for f in files:
        errors = list(validator.iter_errors(json.loads(f.read_text())))
        for e in errors:
            print(f"{f}: {e.json_path}: {e.message}", file=sys.stderr)
        bad += bool(errors)
    print(f"{len(files) - bad}/{len(files)} reports valid")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
