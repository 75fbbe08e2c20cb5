#!/usr/bin/env python3
"""Regenerate the two bundled Monte Carlo error tables.

Runs the mc subcommand on configs/table1.cfg (coefficient errors) and
configs/table2.cfg (curve errors) and prints both tables.  Output
directories default to out/table1 and out/table2 under the current
directory; reruns with the same configs are byte-identical.
"""

import argparse
import os
import sys

from partlin.cli import main as partlin_main

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def run(name: str, out_root: str, workers: int) -> int:
    cfg = os.path.join(ROOT, "configs", f"{name}.cfg")
    out = os.path.join(out_root, name)
    argv = ["mc", "--config", cfg, "--out", out]
    if workers > 1:
        argv += ["--workers", str(workers)]
    code = partlin_main(argv)
    if code != 0:
        return code
    with open(os.path.join(out, "table.csv")) as fh:
        print(f"\n{name} ({out}/table.csv):")
        sys.stdout.write(fh.read())
    return 0


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out", help="output root directory")
    ap.add_argument("--workers", type=int, default=1,
                    help="parallel replication workers per cell")
    args = ap.parse_args()
    for name in ("table1", "table2"):
        code = run(name, args.out, args.workers)
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
