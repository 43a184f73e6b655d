"""Building-material database and frequency-dependent complex permittivity.

Dielectrics follow the ITU-R P.2040 power-law parameterization

    eps_r(f) = eps' - j eps'' = a * f**b - j * sigma(f) / (eps0 * omega)

with sigma(f) = c * f**d in S/m, f in GHz inside the power laws and
omega = 2*pi*f*1e9 rad/s.  The parameterization is stated for 1-100 GHz.

Every public interface takes frequencies in GHz; the single GHz -> SI
conversion lives in :func:`loss_permittivity` so the 1e9 factor exists in
exactly one place.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Union

import numpy as np

from .constants import EPS0

VALID_RANGE_GHZ = (1.0, 100.0)


class MaterialError(ValueError):
    """Invalid material definition or evaluation request."""


class UnknownMaterialError(KeyError):
    """Material name not present in the database."""


def _require_finite(value, label):
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise MaterialError(f"{label} must be a finite number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class PermittivityModel:
    """Power-law coefficients (a, b, c, d) of the ITU-style dispersion model."""

    a: float
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, _require_finite(getattr(self, name), f"coefficient {name}"))
        if self.a <= 0.0:
            raise MaterialError(f"coefficient a must be > 0, got {self.a}")
        if self.c < 0.0:
            raise MaterialError(f"coefficient c must be >= 0, got {self.c}")

    def conductivity(self, frequency_ghz):
        """Conductivity sigma(f) = c * f**d in S/m for f in GHz."""
        return self.c * np.power(frequency_ghz, self.d)


@dataclass(frozen=True)
class FixedPermittivity:
    """Frequency-independent relative permittivity eps' - j eps''."""

    eps_real: float
    eps_imag: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "eps_real", _require_finite(self.eps_real, "eps_real"))
        object.__setattr__(self, "eps_imag", _require_finite(self.eps_imag, "eps_imag"))
        if self.eps_real <= 0.0:
            raise MaterialError(f"eps_real must be > 0, got {self.eps_real}")
        if self.eps_imag < 0.0:
            raise MaterialError(f"eps_imag must be >= 0, got {self.eps_imag}")

    @classmethod
    def from_tan_delta(cls, eps_real, tan_delta):
        return cls(eps_real, eps_real * tan_delta)


@dataclass(frozen=True)
class ComplexPermittivity:
    """Evaluated relative permittivity at a single frequency.

    ``eps_imag`` is stored non-negative; the sign convention is
    eps = eps' - j eps'' under the e^{+j omega t} time convention.
    """

    eps_real: float
    eps_imag: float
    frequency_ghz: float

    @property
    def value(self) -> complex:
        return complex(self.eps_real, -self.eps_imag)

    @property
    def loss_tangent(self) -> float:
        return self.eps_imag / self.eps_real


def loss_permittivity(sigma_s_per_m, frequency_ghz):
    """eps'' = sigma / (eps0 * omega) with omega = 2*pi*f*1e9."""
    omega = 2.0 * math.pi * np.asarray(frequency_ghz, dtype=float) * 1e9
    return sigma_s_per_m / (EPS0 * omega)


def permittivity_at(model: PermittivityModel, frequency_ghz: float) -> ComplexPermittivity:
    """Evaluate the power-law model at a single frequency in GHz."""
    f = float(frequency_ghz)
    if f <= 0.0:
        raise MaterialError(f"frequency must be > 0 GHz, got {f}")
    eps_real = model.a * f ** model.b
    eps_imag = float(loss_permittivity(model.conductivity(f), f))
    return ComplexPermittivity(eps_real, eps_imag, f)


@dataclass(frozen=True)
class Material:
    """A named medium with electromagnetic and thermal properties.

    ``permittivity`` may be a dispersion model, a fixed value, or None for
    media used only thermally (metals in this database).
    """

    name: str
    thermal_conductivity: float
    permittivity: Union[PermittivityModel, FixedPermittivity, None] = None
    resistivity_ohm_m: float | None = None
    aliases: tuple[str, ...] = ()
    note: str = ""

    def __post_init__(self):
        if not self.name:
            raise MaterialError("material name must be non-empty")
        object.__setattr__(
            self, "thermal_conductivity", _require_finite(self.thermal_conductivity, "thermal_conductivity")
        )
        if self.thermal_conductivity <= 0.0:
            raise MaterialError(f"thermal_conductivity must be > 0, got {self.thermal_conductivity}")
        if self.resistivity_ohm_m is not None and self.resistivity_ohm_m <= 0.0:
            raise MaterialError(f"resistivity_ohm_m must be > 0, got {self.resistivity_ohm_m}")

    def permittivity_at(self, frequency_ghz: float) -> ComplexPermittivity:
        if self.permittivity is None:
            raise MaterialError(f"material {self.name!r} has no electromagnetic model")
        if isinstance(self.permittivity, FixedPermittivity):
            return ComplexPermittivity(self.permittivity.eps_real, self.permittivity.eps_imag, float(frequency_ghz))
        return permittivity_at(self.permittivity, frequency_ghz)

    def complex_permittivity(self, frequency_ghz):
        """Vectorized eps' - j eps'' for scalar or ndarray frequencies in GHz."""
        f = np.asarray(frequency_ghz, dtype=float)
        if np.any(f <= 0.0):
            raise MaterialError("frequency must be > 0 GHz")
        if self.permittivity is None:
            raise MaterialError(f"material {self.name!r} has no electromagnetic model")
        if isinstance(self.permittivity, FixedPermittivity):
            return np.broadcast_to(
                complex(self.permittivity.eps_real, -self.permittivity.eps_imag), f.shape
            ).copy() if f.shape else complex(self.permittivity.eps_real, -self.permittivity.eps_imag)
        m = self.permittivity
        eps_real = m.a * f ** m.b
        eps_imag = loss_permittivity(m.conductivity(f), f)
        return eps_real - 1j * eps_imag


def _normalize(name: str) -> str:
    return re.sub(r"[^a-z0-9]", "", name.lower())


class MaterialDatabase:
    """Name-indexed collection of materials with alias-aware lookup."""

    def __init__(self, materials: Iterable[Material] = ()):
        self._materials: list[Material] = []
        self._by_key: dict[str, Material] = {}
        for m in materials:
            self.add(m)

    def add(self, material: Material):
        keys = [_normalize(material.name)] + [_normalize(a) for a in material.aliases]
        existing = self._by_key.get(keys[0])
        if existing is not None:
            self._materials.remove(existing)
        for key in keys:
            self._by_key[key] = material
        self._materials.append(material)

    def get(self, name: str) -> Material:
        key = _normalize(name)
        try:
            return self._by_key[key]
        except KeyError:
            known = ", ".join(sorted(m.name for m in self._materials))
            raise UnknownMaterialError(f"unknown material {name!r} (known: {known})") from None

    def __contains__(self, name: str) -> bool:
        return _normalize(name) in self._by_key

    def __iter__(self):
        return iter(self._materials)

    def __len__(self):
        return len(self._materials)

    def names(self) -> list[str]:
        return [m.name for m in self._materials]

    def merged_with(self, materials: Iterable[Material]) -> "MaterialDatabase":
        """New database where the given materials override same-name entries."""
        db = MaterialDatabase(self._materials)
        for m in materials:
            db.add(m)
        return db

    def to_dict(self) -> dict:
        return {"materials": [_material_to_dict(m) for m in self._materials]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "MaterialDatabase":
        entries = data.get("materials")
        if not isinstance(entries, list):
            raise MaterialError("material file must contain a 'materials' list")
        return cls(_material_from_dict(e) for e in entries)

    @classmethod
    def from_json(cls, text: str) -> "MaterialDatabase":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "MaterialDatabase":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _material_to_dict(m: Material) -> dict:
    entry: dict = {"name": m.name, "thermal_conductivity": m.thermal_conductivity}
    if isinstance(m.permittivity, PermittivityModel):
        p = m.permittivity
        entry["permittivity"] = {"a": p.a, "b": p.b, "c": p.c, "d": p.d}
    elif isinstance(m.permittivity, FixedPermittivity):
        entry["permittivity"] = {"eps_real": m.permittivity.eps_real, "eps_imag": m.permittivity.eps_imag}
    if m.resistivity_ohm_m is not None:
        entry["resistivity_ohm_m"] = m.resistivity_ohm_m
    if m.aliases:
        entry["aliases"] = list(m.aliases)
    if m.note:
        entry["note"] = m.note
    return entry


def _material_from_dict(entry: dict) -> Material:
    if "name" not in entry or "thermal_conductivity" not in entry:
        raise MaterialError(f"material entry needs 'name' and 'thermal_conductivity': {entry!r}")
    perm = entry.get("permittivity")
    model: Union[PermittivityModel, FixedPermittivity, None]
    if perm is None:
        model = None
    elif "a" in perm:
        model = PermittivityModel(perm["a"], perm.get("b", 0.0), perm.get("c", 0.0), perm.get("d", 0.0))
    elif "tan_delta" in perm:
        model = FixedPermittivity.from_tan_delta(perm["eps_real"], perm["tan_delta"])
    else:
        model = FixedPermittivity(perm["eps_real"], perm.get("eps_imag", 0.0))
    return Material(
        name=entry["name"],
        thermal_conductivity=entry["thermal_conductivity"],
        permittivity=model,
        resistivity_ohm_m=entry.get("resistivity_ohm_m"),
        aliases=tuple(entry.get("aliases", ())),
        note=entry.get("note", ""),
    )


_BUILTIN: MaterialDatabase | None = None


def builtin_database() -> MaterialDatabase:
    """The database shipped with the package (see data/materials.json)."""
    global _BUILTIN
    if _BUILTIN is None:
        text = resources.files("signalwall").joinpath("data/materials.json").read_text(encoding="utf-8")
        _BUILTIN = MaterialDatabase.from_json(text)
    return _BUILTIN
