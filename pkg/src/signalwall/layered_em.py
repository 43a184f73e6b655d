"""Plane-wave transmission and reflection of layered lossy walls.

Exact transfer-matrix solution on transverse field amplitudes for a stack of
homogeneous slabs with vacuum ambient on both sides.  Conventions:

* time dependence e^{+j omega t}, eps = eps' - j eps'';
* propagating/decaying waves carry e^{-j kz z} with Im(kz) <= 0 in every
  layer (branch enforced explicitly);
* ``t`` and ``r`` relate the transverse E-field amplitudes of the
  transmitted/reflected waves to the incident wave in the ambient media, so
  with identical ambients |t|^2 and |r|^2 are power fractions;
* circular polarization: components are combined in the fixed transverse
  basis of the incident wave, co = (TE + TM)/2 and cross = (TE - TM)/2 for
  both transmission and reflection.  At normal incidence TE and TM are
  degenerate, so CP results coincide with the linear ones and cross terms
  vanish.  Note the propagation-relative handedness of the reflected wave is
  flipped by the specular bounce; radar conventions would label the
  reflected "co" component here as cross-polar.

Running transfer matrices are rescaled layer by layer, which keeps the
cascade finite for arbitrarily thick lossy stacks; |t| itself underflows to
zero below roughly -3000 dB, far past any physically meaningful level.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import C0, EPS0, MU0
from .materials import Material

POLARIZATIONS = ("TE", "TM", "RHCP", "LHCP")
_CSV_HEADER = "freq_GHz,t_dB,t_phase_deg,r_dB,r_phase_deg,pol,theta_deg"


@dataclass(frozen=True)
class Layer:
    material: Material
    thickness_mm: float

    def __post_init__(self):
        if not (self.thickness_mm > 0.0 and math.isfinite(self.thickness_mm)):
            raise ValueError(f"layer thickness must be > 0 mm, got {self.thickness_mm}")


@dataclass(frozen=True)
class LayerStack:
    """Ordered slabs of a wall cross-section, vacuum ambient on both sides."""

    layers: tuple[Layer, ...]

    def __init__(self, layers: Sequence[Layer]):
        layers = tuple(layers)
        if not layers:
            raise ValueError("layer stack must contain at least one layer")
        object.__setattr__(self, "layers", layers)

    @property
    def depth_mm(self) -> float:
        return sum(l.thickness_mm for l in self.layers)

    def reversed(self) -> "LayerStack":
        return LayerStack(tuple(reversed(self.layers)))


@dataclass(frozen=True)
class Incidence:
    frequency_ghz: float
    theta_deg: float = 0.0
    polarization: str = "TE"

    def __post_init__(self):
        if not 0.0 <= self.theta_deg < 90.0:
            raise ValueError(f"theta must be in [0, 90) degrees, got {self.theta_deg}")
        if self.polarization not in POLARIZATIONS:
            raise ValueError(f"polarization must be one of {POLARIZATIONS}, got {self.polarization!r}")
        if self.frequency_ghz <= 0.0:
            raise ValueError(f"frequency must be > 0 GHz, got {self.frequency_ghz}")


@dataclass
class Spectrum:
    """Complex transmission/reflection coefficients on a frequency grid."""

    frequencies_ghz: np.ndarray
    t: np.ndarray
    r: np.ndarray
    polarization: str
    theta_deg: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        f = np.asarray(self.frequencies_ghz, dtype=float)
        if f.ndim != 1 or f.size < 1:
            raise ValueError("frequency grid must be a 1-D array")
        if f.size > 1 and not np.all(np.diff(f) > 0.0):
            raise ValueError("frequency grid must be strictly increasing")
        self.frequencies_ghz = f
        self.t = np.asarray(self.t, dtype=complex)
        self.r = np.asarray(self.r, dtype=complex)

    @property
    def t_db(self) -> np.ndarray:
        return amplitude_db(self.t)

    @property
    def r_db(self) -> np.ndarray:
        return amplitude_db(self.r)

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_CSV_HEADER + "\n")
            for f, t, r in zip(self.frequencies_ghz, self.t, self.r):
                fh.write(
                    f"{f:.6f},{amplitude_db(t):.6f},{math.degrees(cmath.phase(t)):.6f},"
                    f"{amplitude_db(r):.6f},{math.degrees(cmath.phase(r)):.6f},"
                    f"{self.polarization},{self.theta_deg:.3f}\n"
                )


def amplitude_db(x):
    """20*log10|x| with -inf clipped to a large negative float."""
    mag = np.abs(x)
    with np.errstate(divide="ignore"):
        return np.where(mag > 0.0, 20.0 * np.log10(np.maximum(mag, 1e-300)), -6000.0)


def _branch_kz(k0_sq_eps, kx):
    """kz = sqrt(k0^2 eps - kx^2) with Im(kz) <= 0 (decay along +z)."""
    kz = np.sqrt(k0_sq_eps - kx * kx + 0j)
    kz = np.where(kz.imag > 0.0, -kz, kz)
    kz = np.where((kz.imag == 0.0) & (kz.real < 0.0), -kz, kz)
    return kz


def _tmm_linear(eps_media, d_m, f_ghz, theta_deg, pol):
    """t, r for TE or TM transverse amplitudes across the full cascade.

    eps_media: per-medium relative permittivity arrays, ambient first/last.
    d_m: interior layer thicknesses in metres.
    """
    f = np.atleast_1d(np.asarray(f_ghz, dtype=float))
    omega = 2.0 * math.pi * f * 1e9
    k0 = omega / C0
    kx = k0 * math.sin(math.radians(theta_deg))

    kz = [_branch_kz(k0 * k0 * np.asarray(eps, dtype=complex), kx) for eps in eps_media]
    if pol == "TE":
        z = [omega * MU0 / kzn for kzn in kz]
    elif pol == "TM":
        z = [kzn / (omega * EPS0 * np.asarray(eps, dtype=complex)) for kzn, eps in zip(kz, eps_media)]
    else:
        raise ValueError(f"linear polarization must be TE or TM, got {pol!r}")

    one = np.ones_like(f, dtype=complex)
    m11, m12, m21, m22 = one.copy(), np.zeros_like(one), np.zeros_like(one), one.copy()
    log_scale = np.zeros_like(f)

    n_media = len(eps_media)
    for n in range(1, n_media):
        zr = z[n - 1] / z[n]
        i11 = 0.5 * (1.0 + zr)
        i12 = 0.5 * (1.0 - zr)
        m11, m12, m21, m22 = (
            m11 * i11 + m12 * i12,
            m11 * i12 + m12 * i11,
            m21 * i11 + m22 * i12,
            m21 * i12 + m22 * i11,
        )
        if n <= len(d_m):
            phase = kz[n] * d_m[n - 1]
            p = np.exp(1j * phase)      # |p| >= 1 in lossy layers
            m11 = m11 * p
            m21 = m21 * p
            pm = np.exp(-1j * phase)
            m12 = m12 * pm
            m22 = m22 * pm
            scale = np.abs(m11)
            scale = np.where(scale > 1.0, scale, 1.0)
            m11, m12, m21, m22 = m11 / scale, m12 / scale, m21 / scale, m22 / scale
            log_scale += np.log(scale)

    t = np.exp(-log_scale) / m11
    r = m21 / m11
    return t, r


def _stack_eps(stack: LayerStack, f):
    f = np.atleast_1d(np.asarray(f, dtype=float))
    ambient = np.ones_like(f, dtype=complex)
    eps_media = [ambient]
    for layer in stack.layers:
        eps_media.append(np.broadcast_to(layer.material.complex_permittivity(f), f.shape).astype(complex))
    eps_media.append(ambient)
    d_m = [layer.thickness_mm * 1e-3 for layer in stack.layers]
    return eps_media, d_m


def _coefficients(stack: LayerStack, f, theta_deg, pol):
    eps_media, d_m = _stack_eps(stack, f)
    if pol in ("TE", "TM"):
        return _tmm_linear(eps_media, d_m, f, theta_deg, pol)
    t_te, r_te = _tmm_linear(eps_media, d_m, f, theta_deg, "TE")
    t_tm, r_tm = _tmm_linear(eps_media, d_m, f, theta_deg, "TM")
    # co components in the fixed incident basis; identical for RHCP and LHCP
    # through an isotropic stratified stack
    return 0.5 * (t_te + t_tm), 0.5 * (r_te + r_tm)


def tmm_coefficients(stack: LayerStack, inc: Incidence) -> tuple[complex, complex]:
    """Complex (t, r) for a single incidence; CP inputs return co-polar terms."""
    t, r = _coefficients(stack, inc.frequency_ghz, inc.theta_deg, inc.polarization)
    return complex(t[0]), complex(r[0])


def cp_transmission(stack: LayerStack, frequency_ghz: float, theta_deg: float = 0.0) -> tuple[complex, complex]:
    """(co, cross) circular-polarization transmission amplitudes."""
    Incidence(frequency_ghz, theta_deg, "RHCP")  # reuse validation
    eps_media, d_m = _stack_eps(stack, frequency_ghz)
    t_te, _ = _tmm_linear(eps_media, d_m, frequency_ghz, theta_deg, "TE")
    t_tm, _ = _tmm_linear(eps_media, d_m, frequency_ghz, theta_deg, "TM")
    return complex(0.5 * (t_te[0] + t_tm[0])), complex(0.5 * (t_te[0] - t_tm[0]))


def transmission_spectrum(
    stack: LayerStack,
    f_start_ghz: float,
    f_stop_ghz: float,
    n_points: int,
    theta_deg: float = 0.0,
    polarization: str = "TE",
) -> Spectrum:
    """Spectrum over a linear frequency grid inside the material model's validity."""
    if not (f_start_ghz >= 1.0 and f_stop_ghz <= 100.0 and f_start_ghz < f_stop_ghz):
        raise ValueError(f"frequency band must satisfy 1 <= start < stop <= 100 GHz, got [{f_start_ghz}, {f_stop_ghz}]")
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    Incidence(f_start_ghz, theta_deg, polarization)
    f = np.linspace(f_start_ghz, f_stop_ghz, int(n_points))
    t, r = _coefficients(stack, f, theta_deg, polarization)
    return Spectrum(f, t, r, polarization, theta_deg)
