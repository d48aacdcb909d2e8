#!/usr/bin/env python3
"""Batch of seed-shifted scenarios (price path, threshold sweep and
shot-noise versus compound Poisson comparison per seed)."""
import argparse
import os
import sys

from catbond import cli

HERE = os.path.dirname(os.path.abspath(__file__))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=os.path.join(HERE, "..", "configs", "base_model2.cfg"))
    ap.add_argument("--out", default="out/scenarios")
    ap.add_argument("-n", "--n-scenarios", type=int, default=6)
    ap.add_argument("--seed", type=int)
    args = ap.parse_args()
    argv = ["scenarios", "--config", args.config, "--out", args.out, "--n-scenarios", str(args.n_scenarios)]
    if args.seed is not None:
        argv += ["--seed", str(args.seed)]
    return cli.main(argv)


if __name__ == "__main__":
    sys.exit(main())
