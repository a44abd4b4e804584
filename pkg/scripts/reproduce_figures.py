#!/usr/bin/env python3
"""Run every named figure preset end to end.

Writes curves, traces, features, fields and overlay SVGs for fig1..fig7
into an output directory (one subdirectory per preset). The landscape
presets (fig6, fig7) sweep a 121x121 grid and take several minutes each.
"""
import argparse
import sys
import time

from burstlab.figures import PRESETS, run_figure


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="figure_runs")
    ap.add_argument("--only", nargs="*", choices=sorted(PRESETS),
                    help="subset of presets to run")
    args = ap.parse_args()
    names = args.only or sorted(PRESETS)
    for name in names:
        t0 = time.time()
        summary = run_figure(name, f"{args.outdir}/{name}")
        took = time.time() - t0
        for tr in summary["traces"]:
            tag = "DB" if tr.get("db") else "not DB"
            print(f"{name} {tr['label']}: {tr['sequence']} [{tag}]")
        print(f"{name} done in {took:.0f}s -> {summary['outdir']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
