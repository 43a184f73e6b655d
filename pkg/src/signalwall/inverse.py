"""Measurement post-processing and permittivity estimation.

Normalizes device-under-test spectra by empty-fixture references and fits
the power-law permittivity coefficients (a, c, d) of a single slab to a
measured transmission magnitude.  The exponent b stays fixed during the fit
(default 0): on one slab spectrum all four coefficients together are not
identifiable.

The fit minimizes the RMS error in dB between the measured |S21| and the
exact slab transmission, using a derivative-free simplex search restarted
from deterministic seeded points inside the bounds; the objective has
Fabry-Perot local minima, hence the multistart.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .layered_em import _tmm_linear
from .materials import Material, PermittivityModel


class SpectrumFormatError(ValueError):
    """Unreadable or inconsistent measured-spectrum input."""


REFERENCE_FLOOR_DB = -100.0


@dataclass
class MeasuredSpectrum:
    """Measured S21 on a frequency grid, complex or magnitude-only."""

    frequencies_ghz: np.ndarray
    s21: np.ndarray
    magnitude_only: bool = False
    thickness_mm: float | None = None
    fixture_id: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        f = np.asarray(self.frequencies_ghz, dtype=float)
        s = np.asarray(self.s21, dtype=complex)
        if f.ndim != 1 or f.size < 1 or s.shape != f.shape:
            raise SpectrumFormatError("frequencies and S21 must be equal-length 1-D arrays")
        if f.size > 1 and not np.all(np.diff(f) > 0.0):
            raise SpectrumFormatError("frequency grid must be strictly increasing")
        if not np.all(np.isfinite(s)):
            raise SpectrumFormatError("S21 must be finite")
        self.frequencies_ghz = f
        self.s21 = s

    @property
    def magnitude_db(self) -> np.ndarray:
        return 20.0 * np.log10(np.abs(self.s21))


def normalize_spectrum(dut: MeasuredSpectrum, reference: MeasuredSpectrum, interpolate: bool = False) -> MeasuredSpectrum:
    """Per-point complex division of the DUT by the reference spectrum.

    Magnitude-only inputs subtract in dB.  Grids must match unless
    ``interpolate``; reference points below -100 dB are flagged in
    ``meta['low_reference_mask']`` rather than silently divided.
    """
    if dut.frequencies_ghz.shape == reference.frequencies_ghz.shape and np.allclose(
        dut.frequencies_ghz, reference.frequencies_ghz, rtol=0.0, atol=1e-9
    ):
        ref_s21 = reference.s21
    elif interpolate:
        ref_s21 = np.interp(dut.frequencies_ghz, reference.frequencies_ghz, reference.s21.real) + 1j * np.interp(
            dut.frequencies_ghz, reference.frequencies_ghz, reference.s21.imag
        )
    else:
        raise SpectrumFormatError("frequency grids differ; pass interpolate=True to resample the reference")

    low = 20.0 * np.log10(np.abs(ref_s21) + 1e-300) < REFERENCE_FLOOR_DB
    magnitude_only = dut.magnitude_only or reference.magnitude_only
    if magnitude_only:
        s21 = np.abs(dut.s21) / np.abs(ref_s21)
    else:
        s21 = dut.s21 / ref_s21
    return MeasuredSpectrum(
        dut.frequencies_ghz.copy(),
        s21,
        magnitude_only=magnitude_only,
        thickness_mm=dut.thickness_mm,
        fixture_id=dut.fixture_id,
        meta={**dut.meta, "reference_id": reference.fixture_id, "low_reference_mask": low},
    )


# ---------------------------------------------------------------------------
# permittivity fitting


DEFAULT_BOUNDS = ((1.0, 15.0), (1e-4, 2.0), (0.0, 2.0))  # (a, c, d)


@dataclass
class FitResult:
    a: float
    b: float
    c: float
    d: float
    residual_db_rms: float
    iterations: int
    converged: bool
    starts: list = field(default_factory=list, repr=False)

    @property
    def model(self) -> PermittivityModel:
        return PermittivityModel(self.a, self.b, self.c, self.d)


def slab_transmission(a, b, c, d, thickness_mm, frequencies_ghz):
    """Complex normal-incidence t of a single slab with power-law coefficients."""
    material = Material("fit", 1.0, PermittivityModel(a, b, c, d))
    f = np.asarray(frequencies_ghz, dtype=float)
    eps = material.complex_permittivity(f)
    ambient = np.ones_like(f, dtype=complex)
    t, _ = _tmm_linear([ambient, eps, ambient], [thickness_mm * 1e-3], f, 0.0, "TE")
    return t


def slab_transmission_db(a, b, c, d, thickness_mm, frequencies_ghz):
    """|t| in dB of a single slab with the given power-law coefficients."""
    return 20.0 * np.log10(np.abs(slab_transmission(a, b, c, d, thickness_mm, frequencies_ghz)))


def fit_permittivity(
    spectrum: MeasuredSpectrum,
    thickness_mm: float | None = None,
    bounds=DEFAULT_BOUNDS,
    n_starts: int = 16,
    b_fixed: float = 0.0,
    seed: int = 0,
    max_iterations: int = 2000,
    complex_objective: bool = False,
) -> FitResult:
    """Fit (a, c, d) of the slab permittivity to a measured S21 spectrum.

    The default objective is the RMS error of |S21| in dB (fixture phase is
    often unreliable); ``complex_objective`` switches to the RMS of the
    complex-log difference log(t_model/s21), which weighs magnitude error in
    nepers and phase error in radians evenly across a wide dynamic range and
    needs phase-calibrated data.  Phase wrapping through a thick slab makes
    that landscape a comb, so the complex mode first runs the magnitude fit
    and adds its optimum to the start list.  The best of ``n_starts``
    Nelder-Mead runs wins; ties resolve to the lowest start index, so
    results are reproducible for a given seed.  The reported residual is
    always the dB-magnitude RMS of the returned fit.
    """
    thickness = thickness_mm if thickness_mm is not None else spectrum.thickness_mm
    if thickness is None or thickness <= 0.0:
        raise ValueError("slab thickness must be given and > 0 mm")
    if complex_objective and spectrum.magnitude_only:
        raise ValueError("complex objective needs complex S21 data")
    f = spectrum.frequencies_ghz
    measured_db = spectrum.magnitude_db
    if f.size < 10 or f[-1] / f[0] < 2.0:
        warnings.warn(
            "fit input has fewer than 10 points or spans less than one octave; the estimate may be poorly conditioned",
            stacklevel=2,
        )
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    if len(bounds) != 3 or any(lo >= hi for lo, hi in bounds):
        raise ValueError("bounds must be three (low, high) pairs for (a, c, d)")

    def objective(x):
        if complex_objective:
            t_model = slab_transmission(x[0], b_fixed, x[1], x[2], thickness, f)
            log_error = np.log(t_model / spectrum.s21)
            return float(np.sqrt(np.mean(np.abs(log_error) ** 2)))
        model_db = slab_transmission_db(x[0], b_fixed, x[1], x[2], thickness, f)
        return float(np.sqrt(np.mean((model_db - measured_db) ** 2)))

    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    starts = [0.5 * (lo + hi)]
    starts.extend(lo + (hi - lo) * rng.random(3) for _ in range(max(n_starts - 1, 0)))
    if complex_objective:
        magnitude_fit = fit_permittivity(
            spectrum, thickness, bounds, n_starts, b_fixed, seed, max_iterations, complex_objective=False
        )
        if magnitude_fit.converged:
            starts.insert(0, np.array([magnitude_fit.a, magnitude_fit.c, magnitude_fit.d]))

    diagnostics = []
    best = None
    total_iterations = 0
    for index, x0 in enumerate(starts):
        result = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            bounds=bounds,
            options={"maxiter": max_iterations, "xatol": 1e-6, "fatol": 1e-10},
        )
        total_iterations += result.nit
        entry = {"start": index, "x0": np.asarray(x0), "x": result.x, "residual": float(result.fun), "success": bool(result.success)}
        diagnostics.append(entry)
        if result.success and math.isfinite(result.fun):
            if best is None or result.fun < best["residual"] - 1e-15:
                best = entry

    if best is None:
        return FitResult(math.nan, b_fixed, math.nan, math.nan, math.inf, total_iterations, False, diagnostics)
    a, c, d = best["x"]
    model_db = slab_transmission_db(a, b_fixed, c, d, thickness, f)
    residual_db = float(np.sqrt(np.mean((model_db - measured_db) ** 2)))
    return FitResult(float(a), b_fixed, float(c), float(d), residual_db, total_iterations, True, diagnostics)


# ---------------------------------------------------------------------------
# file readers


def read_spectrum_csv(path) -> MeasuredSpectrum:
    """CSV with header freq_GHz, s21_dB[, s21_phase_deg]."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SpectrumFormatError(f"{path}: empty file")
    header = [h.strip().lower() for h in rows[0]]
    try:
        f_col = header.index("freq_ghz")
        db_col = header.index("s21_db")
    except ValueError as exc:
        raise SpectrumFormatError(f"{path}: need columns freq_GHz and s21_dB, got {rows[0]}") from exc
    phase_col = header.index("s21_phase_deg") if "s21_phase_deg" in header else None

    freqs, values = [], []
    for row in rows[1:]:
        if not row or not row[0].strip():
            continue
        freqs.append(float(row[f_col]))
        mag = 10.0 ** (float(row[db_col]) / 20.0)
        if phase_col is not None:
            phase = math.radians(float(row[phase_col]))
            values.append(mag * complex(math.cos(phase), math.sin(phase)))
        else:
            values.append(mag)
    return MeasuredSpectrum(
        np.asarray(freqs), np.asarray(values, dtype=complex), magnitude_only=phase_col is None, fixture_id=path.name
    )


_TOUCHSTONE_UNITS = {"hz": 1e-9, "khz": 1e-6, "mhz": 1e-3, "ghz": 1.0}


def read_touchstone(path) -> MeasuredSpectrum:
    """Two-port Touchstone (.s2p) reader returning the S21 trace.

    Handles MA (magnitude/angle), DB (dB/angle) and RI encodings; data rows
    follow the v1 column order S11 S21 S12 S22.
    """
    path = Path(path)
    unit_scale = 1.0
    fmt = "ma"
    freqs, values = [], []
    with path.open("r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("!", 1)[0].strip()
            if not line:
                continue
            if line.startswith("#"):
                tokens = line[1:].split()
                for token in tokens:
                    t = token.lower()
                    if t in _TOUCHSTONE_UNITS:
                        unit_scale = _TOUCHSTONE_UNITS[t]
                    elif t in ("ma", "db", "ri"):
                        fmt = t
                continue
            fields = [float(v) for v in line.split()]
            if len(fields) < 9:
                raise SpectrumFormatError(f"{path}: expected 9 columns for a 2-port record, got {len(fields)}")
            freqs.append(fields[0] * unit_scale)
            x, y = fields[3], fields[4]  # S21 pair
            if fmt == "ri":
                values.append(complex(x, y))
            else:
                mag = 10.0 ** (x / 20.0) if fmt == "db" else x
                phase = math.radians(y)
                values.append(mag * complex(math.cos(phase), math.sin(phase)))
    if not freqs:
        raise SpectrumFormatError(f"{path}: no data rows")
    return MeasuredSpectrum(np.asarray(freqs), np.asarray(values, dtype=complex), fixture_id=path.name)


def read_spectrum(path) -> MeasuredSpectrum:
    path = Path(path)
    if path.suffix.lower() in (".s2p", ".ts"):
        return read_touchstone(path)
    return read_spectrum_csv(path)
