#!/usr/bin/env python3
"""Single-path study, threshold sweep, price surface and validation report
for one scenario file (default: the worked example in configs/)."""
import argparse
import os
import sys

from catbond import cli

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=os.path.join(HERE, "..", "configs", "base_model2.cfg"))
    ap.add_argument("--out", default="out/price_study")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--skip-validate", action="store_true")
    args = ap.parse_args()
    commands = ["price-path", "threshold-sweep", "surface"] + ([] if args.skip_validate else ["validate"])
    worst = 0
    for cmd in commands:
        argv = [cmd, "--config", args.config, "--out", args.out]
        if args.seed is not None:
            argv += ["--seed", str(args.seed)]
        code = cli.main(argv)
        print(f"== {cmd}: exit {code}", file=sys.stderr)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
