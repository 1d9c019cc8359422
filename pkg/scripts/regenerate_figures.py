"""Regenerate the region-scan data: containment counts plus SVG slices.

    python3 scripts/regenerate_figures.py --out figures --grid 101
"""
import argparse
import json
import time
from pathlib import Path

from phasecov.scan import AxisRange, PREDICATES, ScanConfig, csv_text, scan_region, write_svg

PANELS = {
    "cp": ("cp",),
    "attainable": ("cp", "class_l_rotated", "class_l"),
    "positive": ("positive", "cp"),
    "polyhedron": ("cp", "polyhedron"),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures")
    ap.add_argument("--grid", type=int, default=101)
    ap.add_argument("--threads", type=int, default=4)
    ap.add_argument("--slices", type=float, nargs="+", default=[0.0, 0.3, 0.6])
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    ax = lambda: AxisRange(-1.5, 1.5, args.grid)
    start = time.perf_counter()
    res = scan_region(ScanConfig(ax(), ax(), ax(), predicates=tuple(PREDICATES), threads=args.threads,
                                 slices=tuple(args.slices)))
    elapsed = time.perf_counter() - start
    summary = {"grid": args.grid, "seconds": round(elapsed, 3), "counts": res.counts(),
               "containment_violations": res.containment_violations()}
    (out / "region_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    (out / "region.csv").write_text(csv_text(res))

    for name, preds in PANELS.items():
        sub = scan_region(ScanConfig(ax(), ax(), ax(), predicates=preds, threads=args.threads,
                                     slices=tuple(args.slices)))
        write_svg(sub, out / f"{name}.svg")
    print(json.dumps(summary["containment_violations"]), f"{elapsed:.2f} s")


if __name__ == "__main__":
    main()
