#!/usr/bin/env python3
"""Regenerate all five bundled survey tables into out/figures/.

Usage: python scripts/run_figures.py [--points N] [--workers W] [--outdir DIR]
"""

import argparse
import pathlib
import sys

from cavity_branching.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=201)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--outdir", default="out/figures")
    args = parser.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name in ("fig2", "fig3a", "fig4", "fig5"):
        target = outdir / f"{name}.csv"
        argv = ["figure", name, "--points", str(args.points),
                "--workers", str(args.workers), "--out", str(target)]
        code = cli_main(argv)
        if code != 0:
            return code
        print(f"wrote {target}")
    target = outdir / "fig3b.csv"
    code = cli_main(["figure", "fig3b", "--out", str(target)])
    if code != 0:
        return code
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
