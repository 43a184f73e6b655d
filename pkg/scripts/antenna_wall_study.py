#!/usr/bin/env python3
"""Antenna-embedded wall: spectra with and without the antenna path, plus the
finite-volume U-values of the bare and embedded unit cells.

Writes results/antenna_wall_{bare,embedded}.csv.
"""

import argparse
from pathlib import Path

import numpy as np

from signalwall.antenna_link import aperture_transmission, combine_paths, improvement_onset_ghz
from signalwall.layered_em import Spectrum, transmission_spectrum
from signalwall.scenario import load_scenario
from signalwall.thermal import solve_steady_state, voxelize_unit_cell


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", help="scenario JSON (default: builtin)")
    parser.add_argument("--outdir", default="results")
    parser.add_argument("--skip-thermal", action="store_true", help="spectra only")
    args = parser.parse_args()

    scenario = load_scenario(args.scenario)
    cell = scenario.cell
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    bare = transmission_spectrum(scenario.wall, 1.0, 8.0, 281, 0.0, "RHCP")
    bare.write_csv(outdir / "antenna_wall_bare.csv")

    combined = np.array(
        [combine_paths(t, aperture_transmission(cell, f)) for f, t in zip(bare.frequencies_ghz, bare.t)]
    )
    embedded = Spectrum(bare.frequencies_ghz, combined, bare.r, "RHCP", 0.0)
    embedded.write_csv(outdir / "antenna_wall_embedded.csv")

    for f in (3.5, 8.0):
        i = int(np.argmin(np.abs(bare.frequencies_ghz - f)))
        print(f"@{f:g} GHz: bare {bare.t_db[i]:7.2f} dB -> embedded {embedded.t_db[i]:7.2f} dB "
              f"(improvement {embedded.t_db[i] - bare.t_db[i]:.1f} dB)")
    onset = improvement_onset_ghz(cell)
    print(f"improvement onset: {onset:.2f} GHz" if onset else "no onset in band")

    if not args.skip_thermal:
        for label, grid in (
            ("bare", voxelize_unit_cell(cell, include_features=False)),
            ("embedded", voxelize_unit_cell(cell)),
        ):
            result = solve_steady_state(grid, scenario.boundary)
            print(f"U-value ({label} cell): {result.u:.4f} W/(m^2 K)")
    print(f"spectra written to {outdir}/")


if __name__ == "__main__":
    main()
