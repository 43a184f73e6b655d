#!/usr/bin/env python3
"""Cross-check the transfer-matrix wall transmission against the 1-D FDTD
time-domain solver and write the comparison table.
"""

import argparse
from pathlib import Path

from signalwall.fdtd import Fdtd1dConfig, validate_against_tmm
from signalwall.scenario import load_scenario


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", help="scenario JSON (default: builtin)")
    parser.add_argument("--start", type=float, default=1.0)
    parser.add_argument("--stop", type=float, default=8.0)
    parser.add_argument("--step", type=float, default=0.1)
    parser.add_argument("--dz", type=float, default=0.5, help="spatial step in mm")
    parser.add_argument("--out", default="results/fdtd_crosscheck.csv")
    args = parser.parse_args()

    scenario = load_scenario(args.scenario)
    table = validate_against_tmm(scenario.wall, args.start, args.stop, args.step, Fdtd1dConfig(dz_mm=args.dz))

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="\n") as fh:
        fh.write("freq_GHz,tmm_dB,fdtd_dB,delta_dB\n")
        for f, a, b, d in zip(table["frequencies_ghz"], table["tmm_db"], table["fdtd_db"], table["delta_db"]):
            fh.write(f"{f:.6f},{a:.6f},{b:.6f},{d:.6f}\n")
    print(f"max |delta|: {table['max_abs_delta_db']:.3f} dB over {len(table['frequencies_ghz'])} points")
    print(f"table written to {out}")


if __name__ == "__main__":
    main()
