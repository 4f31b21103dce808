#!/usr/bin/env python3
"""Scan the linking region for a configured problem and print the caps.

Usage: python scripts/scan_linking_region.py [--config CFG] [--out DIR]
"""

import argparse
import sys
from pathlib import Path

from hartreekit.checks import homotopy_boundary_check, lambda_sweep, scan_region
from hartreekit.config import load_config
from hartreekit.runner import build_context, ensure_profile


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=None)
    ap.add_argument("--out", default="out/region")
    args = ap.parse_args()

    cfg = load_config(args.config)
    ctx = build_context(cfg)
    ensure_profile(ctx, cfg)
    scan = scan_region(ctx.profile, ctx.prob)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    scan.samples.to_csv(out / "region_samples.csv")

    if not scan.found:
        print(f"scan failed: {scan.failure}")
        return 1
    print(f"region: dilations [{scan.delta1}, {scan.delta2}], radius {scan.rbar}")
    print(f"boundary energy sup {scan.boundary_sup_energy:.6f} < cap {scan.cbar:.6f}")
    print(f"kappa {scan.kappa:.6f} < threshold {scan.threshold:.6f} "
          f"(margin {scan.threshold - scan.kappa:.4f})")
    rep = homotopy_boundary_check(scan)
    print(f"homotopy boundary check: {rep.status}")
    sweep = lambda_sweep(ctx.profile, ctx.prob, scan)
    sweep.to_csv(out / "lambda_sweep.csv")
    feasible = [row["lam"] for row in sweep.rows if row["feasible"]]
    print(f"largest feasible mass shift in the sweep: "
          f"{max(feasible) if feasible else 'none found'}")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
