#!/usr/bin/env python3
"""Bare-wall baseline: transmission spectrum 1-8 GHz plus the layered U-value.

Writes results/bare_wall_transmission.csv and prints the headline numbers.
"""

import argparse
from pathlib import Path

from signalwall.layered_em import Incidence, amplitude_db, tmm_coefficients, transmission_spectrum
from signalwall.scenario import load_scenario
from signalwall.thermal import u_value_analytical


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", help="scenario JSON (default: builtin)")
    parser.add_argument("--out", default="results/bare_wall_transmission.csv")
    args = parser.parse_args()

    scenario = load_scenario(args.scenario)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)

    spectrum = transmission_spectrum(scenario.wall, 1.0, 8.0, 281, 0.0, "RHCP")
    spectrum.write_csv(out)

    for f in (3.5, 8.0):
        t, _ = tmm_coefficients(scenario.wall, Incidence(f, 0.0, "RHCP"))
        print(f"bare wall loss @{f:g} GHz: {-amplitude_db(t):.2f} dB")
    print(f"layered U-value: {u_value_analytical(scenario.wall, scenario.boundary).u:.4f} W/(m^2 K)")
    print(f"spectrum written to {out}")


if __name__ == "__main__":
    main()
