#!/usr/bin/env python3
"""Run the full verification bundle and print a one-line summary per check.

Usage: python scripts/run_verification.py [--config CFG] [--out DIR]
"""

import argparse
import json
import sys
from pathlib import Path

from hartreekit.config import load_config
from hartreekit.runner import run_all


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=None)
    ap.add_argument("--out", default="out/full_run")
    args = ap.parse_args()

    cfg = load_config(args.config)
    code = run_all(cfg, args.out)
    payload = json.loads((Path(args.out) / "report.json").read_text())
    for rep in payload["reports"]:
        print(f"{rep['status'].upper():5s}  {rep['check_id']:14s} {rep['title']}")
    print(f"\noverall: {'PASS' if payload['all_passed'] else 'FAIL'}  "
          f"(bundle in {args.out})")
    return code


if __name__ == "__main__":
    sys.exit(main())
