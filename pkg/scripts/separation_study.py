#!/usr/bin/env python3
"""Separation design sweep: U-value and link improvement per antenna spacing.

Writes results/separation_sweep.csv and prints the feasibility summary.
"""

import argparse
from pathlib import Path

from signalwall.design_sweep import min_feasible_separation, run_sweep
from signalwall.scenario import load_scenario


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", help="scenario JSON (default: builtin)")
    parser.add_argument("--out", default="results/separation_sweep.csv")
    parser.add_argument("--refine-mm", type=float, help="bisection-refine the feasibility edge to this resolution")
    args = parser.parse_args()

    scenario = load_scenario(args.scenario)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)

    result = run_sweep(scenario.sweep, scenario.cell, scenario.boundary)
    result.write_csv(out)

    print(f"{'sep mm':>7} {'U':>8} {'feasible':>8}  mean improvement dB")
    for rec in result.records:
        print(f"{rec.separation_mm:7.0f} {rec.u:8.4f} {str(rec.feasible):>8}  {rec.mean_improvement_db:+6.1f}")
    smallest = min_feasible_separation(scenario.sweep, scenario.cell, scenario.boundary, refine_to_mm=args.refine_mm)
    if smallest is None:
        print("no feasible separation under the configured U limit")
    else:
        print(f"smallest feasible separation: {smallest:.0f} mm under U <= {scenario.sweep.u_limit}")
    print(result.rationale)
    print(f"sweep written to {out}")


if __name__ == "__main__":
    main()
