#!/usr/bin/env python3
"""End-to-end desk-scale demo: structural verification, policy simulation,
and the beta-selection pipeline on the small built-in preset.  Finishes in
well under a minute; results land in --out-dir."""

import argparse
import sys

from evcharge.cli import main as cli_main


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="out")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args(argv)

    common = ["--preset", "desk_scale", "--out-dir", args.out_dir,
              "--seed", str(args.seed)]
    for step in (
        ["price-check"] + common,
        ["verify"] + common,
        ["simulate", "--lam", "0.5", "--alpha", "0.9"] + common,
        ["pipeline"] + common,
    ):
        print(f"== evcharge {' '.join(step)}")
        code = cli_main(step)
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
