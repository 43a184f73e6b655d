"""Command-line interface.

Commands: transmission, uvalue, fit-permittivity, sweep, fdtd-validate,
materials.  All tabular output is CSV with fixed float formatting and no
timestamps, so re-runs are byte-identical.  Exit codes: 0 success, 2 usage
or input error, 3 infeasible design or diverged solve.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .antenna_link import aperture_transmission, combine_paths, improvement_onset_ghz
from .design_sweep import SweepConfig, SweepError, min_feasible_separation, run_sweep
from .fdtd import Fdtd1dConfig, FdtdError, validate_against_tmm
from .inverse import SpectrumFormatError, fit_permittivity, normalize_spectrum, read_spectrum
from .layered_em import Incidence, Spectrum, amplitude_db, tmm_coefficients, transmission_spectrum
from .materials import MaterialError, PermittivityModel, UnknownMaterialError, FixedPermittivity
from .scenario import ScenarioError, load_scenario, material_database
from .thermal import ThermalError, solve_steady_state, u_value_analytical, voxelize_unit_cell, write_vtk

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


def _parse_band(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError("band must be F1:F2 or F1:F2:N in GHz")
    try:
        f1, f2 = float(parts[0]), float(parts[1])
        n = int(parts[2]) if len(parts) == 3 else 141
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    return f1, f2, n


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            return tuple(np.round(np.arange(start, stop + 1e-9, step), 9).tolist())
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def cmd_transmission(args) -> int:
    scenario = load_scenario(args.scenario, args.materials)
    f1, f2, n = args.band
    spectrum = transmission_spectrum(scenario.wall, f1, f2, n, args.theta, args.pol)

    cell = scenario.cell
    summary_freqs = [f for f in (3.5, 8.0) if f1 <= f <= f2]
    lines = []
    if args.with_antennas:
        if not cell.has_antenna_system:
            print("error: scenario has no antenna system in the unit cell", file=sys.stderr)
            return EXIT_USAGE
        combined = np.array(
            [
                combine_paths(t, aperture_transmission(cell, f, args.theta), args.combine)
                for f, t in zip(spectrum.frequencies_ghz, spectrum.t)
            ]
        )
        spectrum = Spectrum(spectrum.frequencies_ghz, combined, spectrum.r, spectrum.polarization, spectrum.theta_deg)
        for f in summary_freqs:
            t_wall, _ = tmm_coefficients(scenario.wall, Incidence(f, args.theta, args.pol))
            level = combine_paths(t_wall, aperture_transmission(cell, f, args.theta), args.combine)
            lines.append(
                f"  {f:.1f} GHz: combined {amplitude_db(level):8.2f} dB   "
                f"improvement {amplitude_db(level) - amplitude_db(t_wall):6.2f} dB"
            )
        onset = improvement_onset_ghz(cell, max(f1, 1.0), f2, args.theta, args.pol)
        lines.append(f"  improvement onset: {onset:.2f} GHz" if onset else "  improvement onset: none in band")
    else:
        for f in summary_freqs:
            t_wall, _ = tmm_coefficients(scenario.wall, Incidence(f, args.theta, args.pol))
            lines.append(f"  {f:.1f} GHz: wall loss {-amplitude_db(t_wall):6.2f} dB")

    spectrum.write_csv(args.output)
    print(f"wall: {scenario.name}  pol={args.pol} theta={args.theta:.1f} deg  band {f1}-{f2} GHz ({n} points)")
    print("\n".join(lines))
    print(f"spectrum written to {args.output}")
    return EXIT_OK


def cmd_uvalue(args) -> int:
    scenario = load_scenario(args.scenario, args.materials)
    run_both = args.fv == args.analytical  # neither or both flags -> show both
    code = EXIT_OK
    if run_both or args.analytical:
        result = u_value_analytical(scenario.wall, scenario.boundary)
        print(f"analytical (layered): U = {result.u:.4f} W/(m^2 K)")
    if run_both or args.fv:
        cell = scenario.bare_cell() if args.bare else scenario.cell
        grid = voxelize_unit_cell(cell)
        result = solve_steady_state(grid, scenario.boundary)
        kind = "bare wall" if (args.bare or not cell.has_antenna_system) else "antenna cell"
        print(
            f"finite volume ({kind}, {grid.nx}x{grid.ny}x{grid.nz} cells): U = {result.u:.4f} W/(m^2 K)"
            f"   [{result.iterations} iterations, balance {result.balance:.2e}]"
        )
        if not result.converged:
            print("warning: finite-volume solve did not converge", file=sys.stderr)
            code = EXIT_INFEASIBLE
        if args.export_vtk:
            write_vtk(grid, result.temperature, args.export_vtk)
            print(f"temperature field written to {args.export_vtk}")
    return code


def cmd_fit(args) -> int:
    dut = read_spectrum(args.input)
    if args.reference:
        dut = normalize_spectrum(dut, read_spectrum(args.reference), interpolate=args.interpolate)
    bounds = (
        (args.bounds[0], args.bounds[1]),
        (args.bounds[2], args.bounds[3]),
        (args.bounds[4], args.bounds[5]),
    )
    fit = fit_permittivity(
        dut,
        thickness_mm=args.thickness,
        bounds=bounds,
        n_starts=args.starts,
        b_fixed=args.b,
        seed=args.seed,
        complex_objective=args.complex,
    )
    if not fit.converged:
        print("fit did not converge from any start", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"fitted permittivity coefficients (b fixed at {fit.b}):")
    print(f"  a = {fit.a:.4f}")
    print(f"  c = {fit.c:.4f} S/m (at 1 GHz)")
    print(f"  d = {fit.d:.4f}")
    print(f"  residual: {fit.residual_db_rms:.4f} dB RMS over {len(dut.frequencies_ghz)} points")
    eps = PermittivityModel(fit.a, fit.b, fit.c, fit.d)
    from .materials import permittivity_at

    mid = float(dut.frequencies_ghz[len(dut.frequencies_ghz) // 2])
    value = permittivity_at(eps, mid)
    print(f"  eps_r({mid:.2f} GHz) = {value.eps_real:.3f} - j{value.eps_imag:.3f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario, args.materials)
    base = scenario.sweep
    cfg = SweepConfig(
        separations_mm=args.separations or base.separations_mm,
        frequencies_ghz=args.frequencies or base.frequencies_ghz,
        u_limit=args.u_limit if args.u_limit is not None else base.u_limit,
        combination=base.combination,
    )
    if not scenario.cell.has_antenna_system:
        print("error: scenario has no antenna system to sweep", file=sys.stderr)
        return EXIT_USAGE
    result = run_sweep(cfg, scenario.cell, scenario.boundary)
    print(f"{'sep mm':>7} {'U':>8} {'feasible':>8}  " + "  ".join(f"{f:g} GHz" for f in cfg.frequencies_ghz))
    for rec in result.records:
        gains = "  ".join(f"{rec.improvement_db[f]:+6.1f}" for f in cfg.frequencies_ghz)
        print(f"{rec.separation_mm:7.0f} {rec.u:8.4f} {str(rec.feasible):>8}  {gains}")
    if args.output:
        result.write_csv(args.output)
        print(f"sweep table written to {args.output}")
    if result.selected_mm is None:
        print(result.rationale)
        return EXIT_INFEASIBLE
    smallest = min_feasible_separation(cfg, scenario.cell, scenario.boundary)
    print(f"smallest feasible separation: {smallest:.0f} mm (U limit {cfg.u_limit} W/(m^2 K))")
    print(result.rationale)
    return EXIT_OK


def cmd_fdtd_validate(args) -> int:
    scenario = load_scenario(args.scenario, args.materials)
    f1, f2, _ = args.band
    cfg = Fdtd1dConfig(dz_mm=args.dz)
    table = validate_against_tmm(scenario.wall, f1, f2, args.step, cfg)
    print(f"{'f GHz':>7} {'TMM dB':>9} {'FDTD dB':>9} {'delta dB':>9}")
    for f, a, b, d in zip(table["frequencies_ghz"], table["tmm_db"], table["fdtd_db"], table["delta_db"]):
        print(f"{f:7.2f} {a:9.3f} {b:9.3f} {d:9.3f}")
    print(f"max |delta|: {table['max_abs_delta_db']:.3f} dB over {len(table['frequencies_ghz'])} points")
    return EXIT_OK


def cmd_materials(args) -> int:
    db = material_database(args.materials)
    if args.action == "list":
        print(f"{'name':<22} {'lambda W/(m K)':>14}  permittivity")
        for m in db:
            if m.permittivity is None:
                eps = "(thermal only)"
            elif isinstance(m.permittivity, FixedPermittivity):
                eps = f"eps = {m.permittivity.eps_real:g} - j{m.permittivity.eps_imag:g}"
            else:
                p = m.permittivity
                eps = f"a={p.a:g} b={p.b:g} c={p.c:g} d={p.d:g}"
            print(f"{m.name:<22} {m.thermal_conductivity:>14g}  {eps}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signalwall",
        description="electromagnetic and thermal analysis of antenna-embedded load-bearing walls",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", help="scenario JSON file (default: builtin sandwich-wall scenario)")
        p.add_argument("--materials", help="extra material database JSON merged over the builtin one")

    p = sub.add_parser("transmission", help="wall transmission spectrum, optionally with the antenna path")
    common(p)
    p.add_argument("--with-antennas", action="store_true", help="combine the through-antenna path with the wall leakage")
    p.add_argument("--theta", type=float, default=0.0, help="incidence angle from the normal, degrees")
    p.add_argument("--pol", choices=("TE", "TM", "RHCP", "LHCP"), default="RHCP")
    p.add_argument("--band", type=_parse_band, default=(1.0, 8.0, 141), help="F1:F2[:N] in GHz (default 1:8:141)")
    p.add_argument("--combine", choices=("incoherent", "coherent_best", "coherent_worst"), default="incoherent")
    p.add_argument("-o", "--output", default="transmission.csv", help="spectrum CSV path")
    p.set_defaults(func=cmd_transmission)

    p = sub.add_parser("uvalue", help="thermal transmittance, analytical and finite-volume")
    common(p)
    p.add_argument("--analytical", action="store_true", help="layered analytical model only")
    p.add_argument("--fv", action="store_true", help="finite-volume solve only")
    p.add_argument("--bare", action="store_true", help="drop embedded features from the finite-volume model")
    p.add_argument("--export-vtk", help="write the temperature field as legacy VTK")
    p.set_defaults(func=cmd_uvalue)

    p = sub.add_parser("fit-permittivity", help="fit slab permittivity coefficients to a measured spectrum")
    p.add_argument("input", help="CSV (freq_GHz, s21_dB[, s21_phase_deg]) or Touchstone .s2p file")
    p.add_argument("--thickness", type=float, required=True, help="slab thickness in mm")
    p.add_argument("--reference", help="empty-fixture spectrum to normalize by")
    p.add_argument("--interpolate", action="store_true", help="resample the reference onto the DUT grid")
    p.add_argument("--b", type=float, default=0.0, help="fixed exponent b")
    p.add_argument("--starts", type=int, default=16, help="multistart count")
    p.add_argument("--seed", type=int, default=0, help="seed for the deterministic starts")
    p.add_argument("--complex", action="store_true", help="fit the complex S21 instead of its magnitude in dB")
    p.add_argument(
        "--bounds",
        type=float,
        nargs=6,
        metavar=("A_LO", "A_HI", "C_LO", "C_HI", "D_LO", "D_HI"),
        default=[1.0, 15.0, 1e-4, 2.0, 0.0, 2.0],
    )
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="antenna-separation design sweep under the U-value limit")
    common(p)
    p.add_argument("--separations", type=_parse_float_list, help="list 70,80,... or range START:STOP:STEP in mm")
    p.add_argument("--frequencies", type=_parse_float_list, help="evaluation frequencies in GHz")
    p.add_argument("--u-limit", type=float, help="regulatory U-value limit, W/(m^2 K)")
    p.add_argument("-o", "--output", help="sweep CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fdtd-validate", help="cross-check the transfer-matrix result against 1-D FDTD")
    common(p)
    p.add_argument("--band", type=_parse_band, default=(1.0, 8.0, 0), help="F1:F2 in GHz")
    p.add_argument("--step", type=float, default=0.1, help="comparison grid step in GHz")
    p.add_argument("--dz", type=float, default=0.5, help="FDTD spatial step in mm")
    p.set_defaults(func=cmd_fdtd_validate)

    p = sub.add_parser("materials", help="inspect the material database")
    p.add_argument("action", choices=("list",))
    p.add_argument("--materials", help="extra material database JSON merged over the builtin one")
    p.set_defaults(func=cmd_materials)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, SpectrumFormatError, MaterialError, UnknownMaterialError, ThermalError, SweepError, FdtdError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
