"""Embedded back-to-back antenna path: dual-coax cable and aperture link budget.

The through-antenna path is modelled as: capture of the incident plane wave
by the outdoor element's effective aperture within its unit cell, cable
attenuation through the wall, and re-radiation by the identical indoor
element.  Capture fraction and cable loss each enter once; re-radiation
losses are already folded into the realized gain.

The cable assembly is a pair of identical coaxial lines whose shields are
galvanically joined into a balanced line: the assembly impedance is twice
the single-line impedance while attenuation per metre equals the single
line's.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
import numpy as np

from .constants import C0, ETA0, MU0
from .layered_em import Incidence, LayerStack, tmm_coefficients
from .materials import Material

COMBINATION_MODES = ("incoherent", "coherent_best", "coherent_worst")


@dataclass(frozen=True)
class CoaxSpec:
    """Geometry and materials of one coaxial line in the dual-coax assembly.

    ``outer_radius_mm`` is the shield's outer radius and also the radius used
    in the impedance logarithm; that reading reproduces the assembly's design
    impedance with the stated pin size (see README).  The steel shield
    occupies the outermost ``shield_thickness_mm`` of it, the dielectric
    fills the rest of the bore.
    """

    inner_radius_mm: float = 0.1435
    outer_radius_mm: float = 0.88
    shield_thickness_mm: float = 0.2
    eps_r: float = 1.75
    tan_delta: float = 0.004
    resistivity_ohm_m: float = 6.9e-7
    length_m: float = 0.44
    count: int = 2
    mu_r: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.inner_radius_mm < self.outer_radius_mm:
            raise ValueError("need 0 < inner radius < outer radius")
        if not 0.0 < self.shield_thickness_mm < self.outer_radius_mm - self.inner_radius_mm:
            raise ValueError("shield thickness must fit between inner and outer radius")
        if self.eps_r < 1.0 or self.tan_delta < 0.0:
            raise ValueError("dielectric needs eps_r >= 1 and tan_delta >= 0")
        if self.resistivity_ohm_m < 0.0:
            raise ValueError("resistivity must be >= 0")
        if self.length_m <= 0.0:
            raise ValueError("cable length must be > 0")
        if self.count < 1:
            raise ValueError("assembly needs at least one line")

    @property
    def shield_inner_radius_mm(self) -> float:
        return self.outer_radius_mm - self.shield_thickness_mm

    def conductor_area_m2(self) -> float:
        """Metal cross-section (shield annulus + pin) of the whole assembly."""
        b = self.outer_radius_mm * 1e-3
        bi = self.shield_inner_radius_mm * 1e-3
        a = self.inner_radius_mm * 1e-3
        return self.count * math.pi * ((b * b - bi * bi) + a * a)


def coax_impedance(spec: CoaxSpec) -> float:
    """Characteristic impedance of a single line, ohms."""
    return ETA0 / (2.0 * math.pi * math.sqrt(spec.eps_r)) * math.log(
        spec.outer_radius_mm / spec.inner_radius_mm
    )


def coax_assembly_impedance(spec: CoaxSpec) -> float:
    """Impedance of the balanced assembly: count x single line."""
    return spec.count * coax_impedance(spec)


@dataclass(frozen=True)
class CoaxAttenuation:
    total_db: float
    conductor_db: float
    dielectric_db: float
    skin_depth_m: float
    skin_depth_ok: bool


def coax_attenuation(spec: CoaxSpec, frequency_ghz: float) -> CoaxAttenuation:
    """Total cable attenuation over the line length at one frequency.

    Conductor loss from the skin-effect surface resistance
    R_s = sqrt(pi f mu rho) distributed over pin and shield,
    R' = (R_s / 2 pi)(1/a + 1/b); dielectric loss from the loss tangent.
    The skin-effect model assumes conductors much thicker than the skin
    depth; ``skin_depth_ok`` is False when the shield is not.
    """
    if frequency_ghz <= 0.0:
        raise ValueError(f"frequency must be > 0 GHz, got {frequency_ghz}")
    f_hz = frequency_ghz * 1e9
    a = spec.inner_radius_mm * 1e-3
    b = spec.outer_radius_mm * 1e-3
    z0 = coax_impedance(spec)

    if spec.resistivity_ohm_m > 0.0:
        r_surf = math.sqrt(math.pi * f_hz * MU0 * spec.mu_r * spec.resistivity_ohm_m)
        r_per_m = r_surf / (2.0 * math.pi) * (1.0 / a + 1.0 / b)
        alpha_c = r_per_m / (2.0 * z0)
        skin_depth = math.sqrt(spec.resistivity_ohm_m / (math.pi * f_hz * MU0 * spec.mu_r))
    else:
        alpha_c = 0.0
        skin_depth = 0.0
    alpha_d = math.pi * f_hz * math.sqrt(spec.eps_r) / C0 * spec.tan_delta

    np_to_db = 20.0 / math.log(10.0)
    conductor_db = np_to_db * alpha_c * spec.length_m
    dielectric_db = np_to_db * alpha_d * spec.length_m
    skin_ok = spec.resistivity_ohm_m == 0.0 or skin_depth < spec.shield_thickness_mm * 1e-3
    return CoaxAttenuation(conductor_db + dielectric_db, conductor_db, dielectric_db, skin_depth, skin_ok)


@dataclass(frozen=True)
class AntennaSpec:
    """Realized gain model of one antenna element.

    Either an explicit ``gain_table`` of (GHz, dBi) points (linearly
    interpolated, clamped at the ends) or a plateau ``gain_dbi`` with a
    low-frequency roll-off below ``cutoff_ghz``.  The roll-off captures the
    collapse of a spiral element's realized gain once the outer turn is
    electrically small; the default cutoff approximates c0/(2 pi r_outer)
    for the recorded spiral geometry.  The broadside pattern falls off as
    cos(theta)**pattern_exponent.
    """

    gain_dbi: float = 4.6
    cutoff_ghz: float = 2.7
    rolloff_db_per_octave: float = 24.0
    pattern_exponent: float = 1.0
    gain_table: tuple[tuple[float, float], ...] | None = None
    spiral_inner_radius_mm: float = 1.08
    spiral_outer_radius_mm: float = 17.4
    spiral_turns: int = 6

    def __post_init__(self):
        if not math.isfinite(self.gain_dbi):
            raise ValueError("gain must be finite")
        if self.pattern_exponent < 0.0:
            raise ValueError("pattern exponent must be >= 0")
        if self.rolloff_db_per_octave < 0.0:
            raise ValueError("roll-off must be >= 0 dB/octave")
        if self.gain_table is not None:
            table = tuple((float(f), float(g)) for f, g in self.gain_table)
            if len(table) < 1:
                raise ValueError("gain table must not be empty")
            if any(f2 <= f1 for (f1, _), (f2, _) in zip(table, table[1:])):
                raise ValueError("gain table frequencies must be strictly increasing")
            object.__setattr__(self, "gain_table", table)

    def gain_dbi_at(self, frequency_ghz: float) -> float:
        if self.gain_table is not None:
            freqs = [f for f, _ in self.gain_table]
            gains = [g for _, g in self.gain_table]
            return float(np.interp(frequency_ghz, freqs, gains))
        if frequency_ghz >= self.cutoff_ghz or self.rolloff_db_per_octave == 0.0:
            return self.gain_dbi
        return self.gain_dbi - self.rolloff_db_per_octave * math.log2(self.cutoff_ghz / frequency_ghz)

    def gain_at(self, frequency_ghz: float, theta_deg: float = 0.0) -> float:
        """Linear realized gain including the cos^n pattern roll-off."""
        g0 = 10.0 ** (self.gain_dbi_at(frequency_ghz) / 10.0)
        return g0 * math.cos(math.radians(theta_deg)) ** self.pattern_exponent


@dataclass(frozen=True)
class UnitCell:
    """One periodic cell of the antenna-embedded wall.

    Lateral cell size doubles as the antenna-system separation on the wall.
    ``coax``/``antenna`` may be None for a bare cell.  The embedded feature
    materials are needed by the thermal solver; the laminate sheet sits on
    each wall face with the foam spacer recessed into the concrete behind it.
    """

    sx_mm: float
    sy_mm: float
    wall: LayerStack
    antenna: AntennaSpec | None = None
    coax: CoaxSpec | None = None
    conductor: Material | None = None
    dielectric: Material | None = None
    foam: Material | None = None
    foam_size_mm: float = 50.0
    foam_thickness_mm: float = 10.0
    laminate: Material | None = None
    laminate_size_mm: float = 40.0
    laminate_thickness_mm: float = 0.5

    def __post_init__(self):
        if self.sx_mm <= 0.0 or self.sy_mm <= 0.0:
            raise ValueError("cell dimensions must be > 0")
        if self.has_antenna_system:
            footprint = self.laminate_size_mm if self.laminate is not None else 0.0
            if min(self.sx_mm, self.sy_mm) <= footprint:
                raise ValueError(
                    f"cell ({self.sx_mm} x {self.sy_mm} mm) must exceed the antenna footprint ({footprint} mm)"
                )
            depth_m = self.wall.depth_mm * 1e-3
            if abs(self.coax.length_m - depth_m) > 1e-9:
                raise ValueError(
                    f"coax length ({self.coax.length_m} m) must equal the wall depth ({depth_m} m)"
                )

    @property
    def has_antenna_system(self) -> bool:
        return self.antenna is not None and self.coax is not None

    @property
    def cell_area_m2(self) -> float:
        return self.sx_mm * self.sy_mm * 1e-6

    def with_separation(self, separation_mm: float) -> "UnitCell":
        return dataclasses.replace(self, sx_mm=separation_mm, sy_mm=separation_mm)


def aperture_transmission(cell: UnitCell, frequency_ghz: float, theta_deg: float = 0.0) -> float:
    """Amplitude transmission of the antenna path through one unit cell.

    |T|^2 = min(A_eff(theta) / (A_cell cos(theta)), 1) * L_cable with
    A_eff = G(theta) lambda^2 / (4 pi); saturates at full capture when the
    effective aperture exceeds the projected cell.
    """
    if not cell.has_antenna_system:
        raise ValueError("unit cell has no antenna system")
    if not 0.0 <= theta_deg < 90.0:
        raise ValueError(f"theta must be in [0, 90), got {theta_deg}")
    lam = C0 / (frequency_ghz * 1e9)
    a_eff = cell.antenna.gain_at(frequency_ghz, theta_deg) * lam * lam / (4.0 * math.pi)
    projected = cell.cell_area_m2 * math.cos(math.radians(theta_deg))
    capture = min(a_eff / projected, 1.0)
    cable = 10.0 ** (-coax_attenuation(cell.coax, frequency_ghz).total_db / 10.0)
    return math.sqrt(capture * cable)


def combine_paths(t_wall: complex, t_antenna: float, mode: str = "incoherent") -> float:
    """Combined through-wall amplitude from leakage and antenna paths."""
    if mode not in COMBINATION_MODES:
        raise ValueError(f"mode must be one of {COMBINATION_MODES}, got {mode!r}")
    w = abs(t_wall)
    a = abs(t_antenna)
    if not (w <= 1.0 and a <= 1.0):
        raise ValueError("path magnitudes must lie in [0, 1]")
    if mode == "incoherent":
        return math.hypot(w, a)
    if mode == "coherent_best":
        return w + a
    return abs(w - a)


def combined_transmission(
    cell: UnitCell,
    frequency_ghz: float,
    theta_deg: float = 0.0,
    polarization: str = "RHCP",
    mode: str = "incoherent",
) -> float:
    """Combined amplitude for a unit cell, bare-wall leakage included."""
    t_wall, _ = tmm_coefficients(cell.wall, Incidence(frequency_ghz, theta_deg, polarization))
    if not cell.has_antenna_system:
        return abs(t_wall)
    return combine_paths(t_wall, aperture_transmission(cell, frequency_ghz, theta_deg), mode)


def improvement_onset_ghz(
    cell: UnitCell,
    f_start_ghz: float = 1.0,
    f_stop_ghz: float = 8.0,
    theta_deg: float = 0.0,
    polarization: str = "RHCP",
    tol_ghz: float = 0.01,
) -> float | None:
    """Lowest frequency where the antenna path overtakes the bare wall.

    The crossover t_antenna = |t_wall| is where the combined incoherent level
    sits 3 dB above the bare wall; below it the antenna system no longer
    gives a meaningful improvement.  Returns None when no crossing exists in
    the band.
    """
    if not cell.has_antenna_system:
        return None

    def excess(f):
        t_wall, _ = tmm_coefficients(cell.wall, Incidence(f, theta_deg, polarization))
        return aperture_transmission(cell, f, theta_deg) - abs(t_wall)

    grid = np.arange(f_start_ghz, f_stop_ghz + 1e-9, 0.1)
    values = [excess(f) for f in grid]
    if values[0] >= 0.0:
        return float(grid[0])
    crossing = None
    for f1, f2, v1, v2 in zip(grid, grid[1:], values, values[1:]):
        if v1 < 0.0 <= v2:
            crossing = (f1, f2)
            break
    if crossing is None:
        return None
    lo, hi = crossing
    while hi - lo > tol_ghz:
        mid = 0.5 * (lo + hi)
        if excess(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
