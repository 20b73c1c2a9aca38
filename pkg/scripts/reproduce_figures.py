"""Write every figure preset as CSV into an output directory.

    python3 scripts/reproduce_figures.py out/ --points 801
"""
import argparse
import sys
import time
from pathlib import Path

from optonr.cli import FIGURES, main


def run(out_dir: Path, points: int) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    for fig in FIGURES:
        t0 = time.perf_counter()
        code = main(["figure", fig, "--points", str(points), "--out", str(out_dir / f"{fig}.csv")])
        if code != 0:
            return code
        print(f"{fig}: {len(FIGURES[fig])} panel(s) in {time.perf_counter() - t0:.2f} s")
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--points", type=int, default=401)
    args = ap.parse_args()
    sys.exit(run(args.out_dir, args.points))
