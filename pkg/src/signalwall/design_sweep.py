"""Antenna-separation design study: thermal feasibility vs link improvement.

Sweeps the square unit-cell size (equal to the antenna-system separation on
the wall), evaluates the finite-volume U-value and the combined
electromagnetic transmission per frequency, and selects the best separation
that respects the regulatory U-value limit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .antenna_link import UnitCell, aperture_transmission, combine_paths, COMBINATION_MODES
from .layered_em import Incidence, tmm_coefficients, amplitude_db
from .thermal import MeshOptions, ThermalBoundary, solve_steady_state, voxelize_unit_cell


class SweepError(ValueError):
    """Invalid sweep configuration."""


@dataclass(frozen=True)
class SweepConfig:
    separations_mm: tuple[float, ...] = tuple(float(s) for s in range(70, 201, 10))
    frequencies_ghz: tuple[float, ...] = (1.5, 3.5, 5.0, 8.0)
    u_limit: float = 0.17
    combination: str = "incoherent"
    polarization: str = "RHCP"
    theta_deg: float = 0.0
    thermal_tol: float = 1e-6
    mesh: MeshOptions = MeshOptions()

    def __post_init__(self):
        if not self.separations_mm:
            raise SweepError("separation list must not be empty")
        if any(s <= 0.0 for s in self.separations_mm):
            raise SweepError("separations must be > 0 mm")
        if not self.frequencies_ghz:
            raise SweepError("frequency list must not be empty")
        if self.u_limit <= 0.0:
            raise SweepError("U-value limit must be > 0")
        if self.combination not in COMBINATION_MODES:
            raise SweepError(f"combination must be one of {COMBINATION_MODES}")


@dataclass
class SeparationRecord:
    separation_mm: float
    u: float
    feasible: bool
    converged: bool
    transmission_db: dict[float, float]
    improvement_db: dict[float, float]

    @property
    def mean_improvement_db(self) -> float:
        return float(np.mean(list(self.improvement_db.values())))


@dataclass
class SweepResult:
    records: list[SeparationRecord]
    bare_db: dict[float, float]
    selected_mm: float | None
    rationale: str
    u_limit: float

    def record(self, separation_mm: float) -> SeparationRecord:
        for rec in self.records:
            if rec.separation_mm == separation_mm:
                return rec
        raise KeyError(separation_mm)

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("separation_mm,U,feasible,f_GHz,t_dB,improvement_dB\n")
            for rec in sorted(self.records, key=lambda r: r.separation_mm):
                for f in sorted(rec.transmission_db):
                    fh.write(
                        f"{rec.separation_mm:.3f},{rec.u:.6f},{int(rec.feasible)},"
                        f"{f:.6f},{rec.transmission_db[f]:.6f},{rec.improvement_db[f]:.6f}\n"
                    )


def _bare_levels(cell: UnitCell, cfg: SweepConfig) -> dict[float, float]:
    levels = {}
    for f in cfg.frequencies_ghz:
        t, _ = tmm_coefficients(cell.wall, Incidence(f, cfg.theta_deg, cfg.polarization))
        levels[f] = float(amplitude_db(t))
    return levels


def run_sweep(cfg: SweepConfig, cell_template: UnitCell, bc: ThermalBoundary = ThermalBoundary()) -> SweepResult:
    """Evaluate every separation and select the best feasible one.

    Selection maximizes the mean dB improvement over the configured
    frequencies among feasible separations, ties going to the larger (and
    cheaper to build) separation.  Mutual coupling between neighbouring
    antenna systems is not modelled, so rankings between adjacent dense
    spacings can differ from full-wave results; the rationale says so.
    """
    if not cell_template.has_antenna_system:
        raise SweepError("sweep needs a unit cell with an antenna system")
    bare_db = _bare_levels(cell_template, cfg)
    records = []
    for s in cfg.separations_mm:
        sized = cell_template.with_separation(s)
        grid = voxelize_unit_cell(sized, options=cfg.mesh)
        thermal = solve_steady_state(grid, bc, tol=cfg.thermal_tol)
        transmission = {}
        improvement = {}
        for f in cfg.frequencies_ghz:
            t_wall, _ = tmm_coefficients(sized.wall, Incidence(f, cfg.theta_deg, cfg.polarization))
            combined = combine_paths(t_wall, aperture_transmission(sized, f, cfg.theta_deg), cfg.combination)
            level = float(amplitude_db(combined))
            transmission[f] = level
            improvement[f] = level - bare_db[f]
        records.append(
            SeparationRecord(
                separation_mm=float(s),
                u=thermal.u,
                feasible=thermal.u <= cfg.u_limit,
                converged=thermal.converged,
                transmission_db=transmission,
                improvement_db=improvement,
            )
        )

    feasible = [r for r in records if r.feasible]
    if feasible:
        best = max(feasible, key=lambda r: (round(r.mean_improvement_db, 9), r.separation_mm))
        selected = best.separation_mm
        rationale = (
            f"selected {selected:.0f} mm: best mean improvement {best.mean_improvement_db:.1f} dB over "
            f"{list(cfg.frequencies_ghz)} GHz among separations with U <= {cfg.u_limit} W/(m^2 K). "
            "Mutual coupling between neighbouring antenna systems is not modelled; it penalizes the densest "
            "spacings in full-wave studies, so rankings within ~10 mm of the feasibility edge are soft."
        )
    else:
        selected = None
        rationale = (
            f"no separation in {[f'{s:.0f}' for s in cfg.separations_mm]} mm meets "
            f"U <= {cfg.u_limit} W/(m^2 K); the closest is "
            f"{min(records, key=lambda r: r.u).u:.4f} at {max(cfg.separations_mm):.0f} mm"
        )
    return SweepResult(records, bare_db, selected, rationale, cfg.u_limit)


def min_feasible_separation(
    cfg: SweepConfig,
    cell_template: UnitCell,
    bc: ThermalBoundary = ThermalBoundary(),
    refine_to_mm: float | None = None,
) -> float | None:
    """Smallest swept separation whose U-value meets the limit, or None.

    With ``refine_to_mm`` the feasibility edge between the last infeasible
    and first feasible sweep points is bisected down to that resolution.
    """
    separations = sorted(cfg.separations_mm)

    def u_of(s: float) -> float:
        grid = voxelize_unit_cell(cell_template.with_separation(s), options=cfg.mesh)
        return solve_steady_state(grid, bc, tol=cfg.thermal_tol).u

    found = None
    previous = None
    for s in separations:
        if u_of(s) <= cfg.u_limit:
            found = s
            break
        previous = s
    if found is None:
        return None
    if refine_to_mm and previous is not None:
        lo, hi = previous, found
        while hi - lo > refine_to_mm:
            mid = 0.5 * (lo + hi)
            if u_of(mid) <= cfg.u_limit:
                hi = mid
            else:
                lo = mid
        found = hi
    return float(found)
