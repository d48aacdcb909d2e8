"""``catbond <command> --config FILE [--seed N] [--out DIR]``

Exit codes: 0 success, 2 configuration error, 3 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys

from .config import ConfigError, ScenarioConfig, load_config
from .experiments import (CPP_HEADER, DETAIL_HEADER, JUMP_HEADER, PRICE_PATH_HEADER, SURFACE_HEADER, SWEEP_HEADER,
                          ValidationFailure, check_jumps, compound_poisson_comparison, draw_scenario,
                          price_path, surface, surface_violations, threshold_sweep)
from .svg import line_chart
from .validation import run_checks

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION = 0, 2, 3


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def write_csv(path: str, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _require_model2(cfg: ScenarioConfig, command: str):
    if cfg.model != "model2":
        raise ConfigError(f"{command} needs model = model2")


def cmd_price_path(cfg: ScenarioConfig, out: str, seed: int | None = None) -> dict:
    _require_model2(cfg, "price-path")
    state = cfg.model2_state()
    sc = draw_scenario(cfg, seed)
    rows, jumps = price_path(state, sc)
    check_jumps(jumps)
    write_csv(os.path.join(out, "price_path.csv"), PRICE_PATH_HEADER, [(r[0], r[1], r[2], r[5]) for r in rows])
    write_csv(os.path.join(out, "price_path_detail.csv"), DETAIL_HEADER, rows)
    write_csv(os.path.join(out, "jumps.csv"), JUMP_HEADER, jumps)
    t = [r[0] for r in rows]
    _write(os.path.join(out, "price_path.svg"),
           line_chart({"pre-trigger price": (t, [r[2] for r in rows]), "price": (t, [r[3] for r in rows])},
                      "CAT bond price along one loss path", "t (years)", "price"))
    _write(os.path.join(out, "loss_path.svg"),
           line_chart({"L_t": (t, [r[1] for r in rows])}, "Aggregate loss", "t (years)", "loss"))
    return {"events": len(sc.path), "jumps": len(jumps)}


def cmd_threshold_sweep(cfg: ScenarioConfig, out: str, seed: int | None = None) -> dict:
    _require_model2(cfg, "threshold-sweep")
    sc = draw_scenario(cfg, seed)
    rows, curves = threshold_sweep(cfg, sc)
    write_csv(os.path.join(out, "threshold_sweep.csv"), SWEEP_HEADER, rows)
    _write(os.path.join(out, "threshold_sweep.svg"),
           line_chart({f"D={D:g}": (sc.grid, c[1]) for D, c in curves.items()},
                      "CAT bond price for several thresholds", "t (years)", "price"))
    return {"thresholds": len(curves)}


def cmd_surface(cfg: ScenarioConfig, out: str) -> dict:
    _require_model2(cfg, "surface")
    mats, ths, v = surface(cfg)
    rows = [(T, D, v[i, j]) for i, T in enumerate(mats) for j, D in enumerate(ths)]
    write_csv(os.path.join(out, "surface.csv"), SURFACE_HEADER, rows)
    bad = surface_violations(mats, ths, v)
    if bad:
        raise ValidationFailure("price surface not monotone: " + "; ".join(bad[:5]))
    return {"cells": len(rows)}


def cmd_validate(cfg: ScenarioConfig, out: str) -> dict:
    checks = run_checks(cfg)
    write_csv(os.path.join(out, "validate.csv"), ("check", "value_a", "value_b", "tolerance", "pass"),
              [(c.name, repr(c.value_a), repr(c.value_b), repr(c.tolerance), c.passed) for c in checks])
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value_a:.10g} vs {c.value_b:.10g} "
              f"(tol {c.tolerance:.3g})")
    failed = [c.name for c in checks if not c.passed]
    if failed:
        raise ValidationFailure(f"{len(failed)} check(s) failed: {', '.join(failed)}")
    return {"checks": len(checks)}


def cmd_scenarios(cfg: ScenarioConfig, out: str, n_scenarios: int | None = None) -> dict:
    _require_model2(cfg, "scenarios")
    n = cfg.n_scenarios if n_scenarios is None else n_scenarios
    if n < 1:
        raise ConfigError("n_scenarios must be at least 1")
    state = cfg.model2_state()
    summary = []
    for k in range(n):
        seed = cfg.seed + k
        sub = os.path.join(out, f"scenario_{k:02d}")
        os.makedirs(sub, exist_ok=True)
        cmd_price_path(cfg, sub, seed)
        cmd_threshold_sweep(cfg, sub, seed)
        sc = draw_scenario(cfg, seed)
        rows = compound_poisson_comparison(cfg, sc)
        write_csv(os.path.join(sub, "cpp_comparison.csv"), CPP_HEADER, rows)
        t = [r[0] for r in rows]
        _write(os.path.join(sub, "cpp_comparison.svg"),
               line_chart({"shot-noise": (t, [r[2] for r in rows]), "compound Poisson": (t, [r[4] for r in rows])},
                          "Shot-noise vs compound Poisson losses", "t (years)", "price"))
        _, jumps = price_path(state, sc)
        summary.append((k, seed, len(sc.path), len(jumps), rows[-1][1], rows[-1][2]))
    write_csv(os.path.join(out, "scenarios.csv"),
              ("scenario", "seed", "n_events", "n_jumps", "terminal_loss", "terminal_price"), summary)
    return {"scenarios": n}


COMMANDS = ("price-path", "threshold-sweep", "surface", "validate", "scenarios")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="catbond", description="Zero-coupon CAT bond pricing studies")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key = value scenario file (defaults reproduce the worked example)")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--out", help="output directory (overrides the configured one)")
    p.add_argument("--n-scenarios", type=int, help="scenario count for 'scenarios'")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, out=args.out)
        os.makedirs(cfg.out, exist_ok=True)
        echo = cfg.to_text()
        _write(os.path.join(cfg.out, f"{args.command}.config.txt"), echo)
        print("# resolved configuration")
        print(echo, end="")
        if args.command == "price-path":
            info = cmd_price_path(cfg, cfg.out)
        elif args.command == "threshold-sweep":
            info = cmd_threshold_sweep(cfg, cfg.out)
        elif args.command == "surface":
            info = cmd_surface(cfg, cfg.out)
        elif args.command == "validate":
            info = cmd_validate(cfg, cfg.out)
        else:
            info = cmd_scenarios(cfg, cfg.out, args.n_scenarios)
    except ConfigError as exc:
        print(f"catbond: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationFailure as exc:
        print(f"catbond: validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print("# done: " + ", ".join(f"{k}={v}" for k, v in info.items()))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
