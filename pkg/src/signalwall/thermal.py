"""Thermal transmittance of walls: layered analytical model and 3-D finite volumes.

The analytical path is the ISO 6946 series-resistance formula
U = 1 / (R_si + sum(d_n / lambda_n) + R_se).  The finite-volume solver
handles unit cells with embedded features (dual-coax thermal bridge, foam
cavity, laminate sheets) on a feature-snapped rectilinear grid:

* steady conduction div(lambda grad T) = 0, harmonic-mean face conductances;
* Robin (convective-film) conditions q = (T_air - T_surface) / R_s on the
  two wall faces, adiabatic lateral faces so the cell tiles an infinite wall;
* cylindrical cable parts are mapped to equivalent-area square prisms, which
  preserves the axial conductance lambda*A/L of the bridge exactly
  (concentric circles of radius r map to squares of side sqrt(pi)*r).

The linear system is symmetric positive definite and solved with conjugate
gradients under diagonal preconditioning, started from the 1-D layered
temperature profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .antenna_link import UnitCell
from .layered_em import LayerStack


class ThermalError(ValueError):
    """Invalid thermal model input."""


@dataclass(frozen=True)
class ThermalBoundary:
    """Surface film resistances and ambient temperatures for the two faces."""

    r_si: float = 0.13
    r_se: float = 0.04
    t_inside_k: float = 293.0
    t_outside_k: float = 271.0

    def __post_init__(self):
        if self.r_si <= 0.0 or self.r_se <= 0.0:
            raise ThermalError("surface resistances must be > 0")
        if self.t_inside_k == self.t_outside_k:
            raise ThermalError("ambient temperatures must differ")

    @property
    def delta_t(self) -> float:
        return abs(self.t_inside_k - self.t_outside_k)


@dataclass
class UValueResult:
    u: float
    heat_flow_w: float
    converged: bool
    iterations: int
    residual: float
    balance: float = 0.0
    area_m2: float = 1.0
    temperature: np.ndarray | None = field(default=None, repr=False)


def u_value_analytical(stack: LayerStack, bc: ThermalBoundary, area_m2: float = 1.0) -> UValueResult:
    """Series-resistance U-value of a laterally homogeneous wall."""
    r = bc.r_si + bc.r_se
    for layer in stack.layers:
        lam = layer.material.thermal_conductivity
        if lam <= 0.0:
            raise ThermalError(f"layer {layer.material.name!r} needs thermal conductivity > 0")
        r += layer.thickness_mm * 1e-3 / lam
    u = 1.0 / r
    return UValueResult(
        u=u,
        heat_flow_w=u * bc.delta_t * area_m2,
        converged=True,
        iterations=0,
        residual=0.0,
        area_m2=area_m2,
    )


# ---------------------------------------------------------------------------
# voxelization


@dataclass(frozen=True)
class MeshOptions:
    """Grid-spacing targets in mm; defaults suit 0.1-1 m walls with mm features."""

    z_conductive_mm: float = 5.0      # slabs with lambda >= 0.1 W/(m K)
    z_insulating_mm: float = 2.0      # slabs below that
    z_interface_mm: float = 0.5       # first cell at laminate/foam planes
    xy_coarse_mm: float = 12.0
    xy_feature_mm: float = 2.0        # spacing at foam/laminate edges
    xy_cable_mm: float = 0.4          # spacing hint at cable feature lines
    growth: float = 1.6

    def z_target(self, conductivity: float) -> float:
        return self.z_insulating_mm if conductivity < 0.1 else self.z_conductive_mm


def _graded_spacings(width, h_left, h_right, h_max, growth):
    """Cell widths filling ``width``, growing geometrically from both ends."""
    h_left = min(max(h_left, 1e-6), h_max)
    h_right = min(max(h_right, 1e-6), h_max)
    if width <= 1.25 * min(h_left, h_right):
        return np.array([width])
    left = [h_left]
    right = [h_right]
    while sum(left) + sum(right) < width:
        if sum(left) <= sum(right):
            left.append(min(left[-1] * growth, h_max))
        else:
            right.append(min(right[-1] * growth, h_max))
    spacings = np.array(left + right[::-1])
    return spacings * (width / spacings.sum())


def _axis_nodes(segments):
    """Node coordinates from (a, b, h_left, h_right, h_max, growth) segments."""
    nodes = [segments[0][0]]
    for a, b, hl, hr, hmax, growth in segments:
        cumulative = a + np.cumsum(_graded_spacings(b - a, hl, hr, hmax, growth))
        cumulative[-1] = b
        nodes.extend(cumulative.tolist())
    return np.asarray(nodes)


def _merge_lines(lines, length, tol=1e-9):
    """Sorted unique {coordinate: spacing hint}, clipped to [0, length]."""
    merged: dict[float, float] = {0.0: lines.get(0.0, math.inf), length: lines.get(length, math.inf)}
    for coord, hint in lines.items():
        if coord < -tol or coord > length + tol:
            raise ThermalError(f"feature coordinate {coord} mm outside the cell (0..{length} mm)")
        coord = min(max(coord, 0.0), length)
        for existing in merged:
            if abs(existing - coord) <= tol:
                merged[existing] = min(merged[existing], hint)
                break
        else:
            merged[coord] = hint
    return dict(sorted(merged.items()))


@dataclass(frozen=True)
class _Box:
    """Axis-aligned feature in mm; z range may span several slabs."""

    material_id: int
    x0: float
    x1: float
    y0: float
    y1: float
    z0: float
    z1: float


class VoxelGrid:
    """Feature-snapped rectilinear grid with a material id per voxel."""

    def __init__(self, x_nodes_mm, y_nodes_mm, z_nodes_mm, material, conductivity_by_id, material_names):
        self.x_nodes_mm = np.asarray(x_nodes_mm, dtype=float)
        self.y_nodes_mm = np.asarray(y_nodes_mm, dtype=float)
        self.z_nodes_mm = np.asarray(z_nodes_mm, dtype=float)
        self.material = np.asarray(material)
        self.conductivity_by_id = np.asarray(conductivity_by_id, dtype=float)
        self.material_names = list(material_names)
        if self.material.shape != (self.nx, self.ny, self.nz):
            raise ThermalError("material array shape does not match the grid")
        if np.any(self.material < 0) or np.any(self.material >= len(self.conductivity_by_id)):
            raise ThermalError("every voxel must carry a valid material id")
        if np.any(self.conductivity_by_id <= 0.0):
            raise ThermalError("all conductivities must be > 0")

    @property
    def nx(self):
        return len(self.x_nodes_mm) - 1

    @property
    def ny(self):
        return len(self.y_nodes_mm) - 1

    @property
    def nz(self):
        return len(self.z_nodes_mm) - 1

    @property
    def n_cells(self):
        return self.nx * self.ny * self.nz

    @property
    def dx_m(self):
        return np.diff(self.x_nodes_mm) * 1e-3

    @property
    def dy_m(self):
        return np.diff(self.y_nodes_mm) * 1e-3

    @property
    def dz_m(self):
        return np.diff(self.z_nodes_mm) * 1e-3

    @property
    def area_m2(self):
        return float(self.x_nodes_mm[-1] * self.y_nodes_mm[-1] * 1e-6)

    @property
    def depth_mm(self):
        return float(self.z_nodes_mm[-1])

    def conductivity_field(self):
        return self.conductivity_by_id[self.material]

    def cross_section_area_m2(self, material_name: str, z_mm: float) -> float:
        """Painted area of one material in the x-y plane nearest to z_mm."""
        mat_id = self.material_names.index(material_name)
        zc = 0.5 * (self.z_nodes_mm[:-1] + self.z_nodes_mm[1:])
        k = int(np.argmin(np.abs(zc - z_mm)))
        mask = self.material[:, :, k] == mat_id
        areas = np.outer(self.dx_m, self.dy_m)
        return float(np.sum(areas[mask]))


def equivalent_square_side_mm(radius_mm: float) -> float:
    """Side of the square with the same area as a circle of this radius."""
    return math.sqrt(math.pi) * radius_mm


def voxelize_unit_cell(cell: UnitCell, include_features: bool = True, options: MeshOptions = MeshOptions()) -> VoxelGrid:
    """Rectilinear voxel model of a unit cell, feature boundaries on grid lines.

    With ``include_features`` False (or a bare cell) the result is the plain
    slab stack, whose finite-volume solution must match the analytical
    U-value.
    """
    features = include_features and cell.has_antenna_system

    materials: list = []
    conductivities: list[float] = []
    names: list[str] = []

    def material_id(material) -> int:
        for i, m in enumerate(materials):
            if m is material:
                return i
        materials.append(material)
        conductivities.append(material.thermal_conductivity)
        names.append(material.name)
        return len(materials) - 1

    depth = cell.wall.depth_mm
    cx, cy = cell.sx_mm / 2.0, cell.sy_mm / 2.0

    # z segmentation: slab boundaries plus laminate/foam interface planes
    z_lines: dict[float, float] = {}
    slab_edges = [0.0]
    for layer in cell.wall.layers:
        slab_edges.append(slab_edges[-1] + layer.thickness_mm)
    for edge in slab_edges:
        z_lines[edge] = math.inf

    boxes: list[_Box] = []
    fine_z: set[float] = set()
    if features:
        lam_t = cell.laminate_thickness_mm if cell.laminate is not None else 0.0
        foam_t = cell.foam_thickness_mm if cell.foam is not None else 0.0
        if lam_t + foam_t > 0.0:
            for plane in (lam_t, lam_t + foam_t, depth - lam_t - foam_t, depth - lam_t):
                z_lines[plane] = math.inf
                fine_z.add(plane)
            fine_z.update((0.0, depth))
        if cell.foam is not None:
            half = cell.foam_size_mm / 2.0
            if half > min(cx, cy):
                raise ThermalError("foam block exceeds the cell bounds")
            fid = material_id(cell.foam)
            boxes.append(_Box(fid, cx - half, cx + half, cy - half, cy + half, lam_t, lam_t + foam_t))
            boxes.append(_Box(fid, cx - half, cx + half, cy - half, cy + half, depth - lam_t - foam_t, depth - lam_t))
        if cell.laminate is not None:
            half = cell.laminate_size_mm / 2.0
            lid = material_id(cell.laminate)
            boxes.append(_Box(lid, cx - half, cx + half, cy - half, cy + half, 0.0, lam_t))
            boxes.append(_Box(lid, cx - half, cx + half, cy - half, cy + half, depth - lam_t, depth))

    x_lines: dict[float, float] = {}
    y_lines: dict[float, float] = {}
    if features:
        for box in boxes:
            for coord in (box.x0, box.x1):
                x_lines[coord] = min(x_lines.get(coord, math.inf), options.xy_feature_mm)
            for coord in (box.y0, box.y1):
                y_lines[coord] = min(y_lines.get(coord, math.inf), options.xy_feature_mm)

        spec = cell.coax
        w_pin = equivalent_square_side_mm(spec.inner_radius_mm)
        w_bore = equivalent_square_side_mm(spec.shield_inner_radius_mm)
        w_shield = equivalent_square_side_mm(spec.outer_radius_mm)
        if spec.count * w_shield > cell.sx_mm or w_shield > cell.sy_mm:
            raise ThermalError("coax assembly exceeds the cell bounds")
        conductor_id = material_id(cell.conductor)
        dielectric_id = material_id(cell.dielectric)
        # lines side by side along x, shields touching
        offsets = (np.arange(spec.count) - (spec.count - 1) / 2.0) * w_shield
        for off in offsets:
            x0 = cx + off
            for width, mid in ((w_shield, conductor_id), (w_bore, dielectric_id), (w_pin, conductor_id)):
                boxes.append(_Box(mid, x0 - width / 2.0, x0 + width / 2.0, cy - width / 2.0, cy + width / 2.0, 0.0, depth))
                for coord in (x0 - width / 2.0, x0 + width / 2.0):
                    x_lines[coord] = min(x_lines.get(coord, math.inf), options.xy_cable_mm)
                for coord in (cy - width / 2.0, cy + width / 2.0):
                    y_lines[coord] = min(y_lines.get(coord, math.inf), options.xy_cable_mm)

    # slab paint happens first, later boxes override, cable painted last
    slab_ids = [material_id(layer.material) for layer in cell.wall.layers]

    x_feat = _merge_lines(x_lines, cell.sx_mm)
    y_feat = _merge_lines(y_lines, cell.sy_mm)

    def xy_segments(feat: dict[float, float]):
        coords = list(feat)
        return [
            (a, b, feat[a], feat[b], options.xy_coarse_mm, options.growth)
            for a, b in zip(coords, coords[1:])
        ]

    x_nodes = _axis_nodes(xy_segments(x_feat))
    y_nodes = _axis_nodes(xy_segments(y_feat))

    z_feat = _merge_lines(z_lines, depth)
    z_coords = list(z_feat)
    z_segments = []
    for a, b in zip(z_coords, z_coords[1:]):
        mid = 0.5 * (a + b)
        lam = cell.wall.layers[-1].material.thermal_conductivity
        for layer, lo in zip(cell.wall.layers, slab_edges):
            if lo <= mid < lo + layer.thickness_mm:
                lam = layer.material.thermal_conductivity
                break
        target = options.z_target(lam)
        hl = options.z_interface_mm if a in fine_z else target
        hr = options.z_interface_mm if b in fine_z else target
        z_segments.append((a, b, hl, hr, target, options.growth))
    z_nodes = _axis_nodes(z_segments)

    if features:
        # diameter must span at least two cells inside the pack footprint
        xc = 0.5 * (x_nodes[:-1] + x_nodes[1:])
        half_pack = cell.coax.count * equivalent_square_side_mm(cell.coax.outer_radius_mm) / 2.0
        widest = float(np.max(np.diff(x_nodes)[np.abs(xc - cx) <= half_pack]))
        if widest > cell.coax.outer_radius_mm:
            raise ThermalError(
                f"mesh too coarse near the cable: {widest:.3f} mm cells vs {2 * cell.coax.outer_radius_mm:.3f} mm diameter"
            )

    material = np.empty((len(x_nodes) - 1, len(y_nodes) - 1, len(z_nodes) - 1), dtype=np.int16)
    zc = 0.5 * (z_nodes[:-1] + z_nodes[1:])
    for sid, lo, layer in zip(slab_ids, slab_edges, cell.wall.layers):
        material[:, :, (zc >= lo) & (zc < lo + layer.thickness_mm)] = sid

    xc = 0.5 * (x_nodes[:-1] + x_nodes[1:])
    yc = 0.5 * (y_nodes[:-1] + y_nodes[1:])
    for box in boxes:
        mask_x = (xc > box.x0) & (xc < box.x1)
        mask_y = (yc > box.y0) & (yc < box.y1)
        mask_z = (zc > box.z0) & (zc < box.z1)
        material[np.ix_(mask_x, mask_y, mask_z)] = box.material_id

    return VoxelGrid(x_nodes, y_nodes, z_nodes, material, conductivities, names)


# ---------------------------------------------------------------------------
# finite-volume solve


def _face_conductance(lam, d_this, d_next, area, axis):
    """Harmonic-mean conductance of internal faces along one axis."""
    sl_lo = [slice(None)] * 3
    sl_hi = [slice(None)] * 3
    sl_lo[axis] = slice(None, -1)
    sl_hi[axis] = slice(1, None)
    lam_lo = lam[tuple(sl_lo)]
    lam_hi = lam[tuple(sl_hi)]
    resist = 0.5 * d_this / lam_lo + 0.5 * d_next / lam_hi
    return area / resist


def solve_steady_state(
    grid: VoxelGrid,
    bc: ThermalBoundary,
    tol: float = 1e-6,
    max_iter: int = 50000,
    cg_rtol: float = 1e-8,
) -> UValueResult:
    """Finite-volume steady-state solve; U from total heat flow per face.

    ``tol`` bounds the relative mismatch of the two face heat flows (global
    energy balance); the linear system itself is driven to ``cg_rtol``.
    A non-converged solve returns the partial result with converged False.
    """
    if tol <= 0.0:
        raise ThermalError("tolerance must be > 0")
    lam = grid.conductivity_field()
    dx, dy, dz = grid.dx_m, grid.dy_m, grid.dz_m
    nx, ny, nz = grid.nx, grid.ny, grid.nz
    n = grid.n_cells
    idx = np.arange(n).reshape(nx, ny, nz)

    area_x = dy[None, :, None] * dz[None, None, :]
    area_y = dx[:, None, None] * dz[None, None, :]
    area_z = dx[:, None, None] * dy[None, :, None]

    gx = _face_conductance(lam, dx[:-1, None, None], dx[1:, None, None], area_x, 0)
    gy = _face_conductance(lam, dy[None, :-1, None], dy[None, 1:, None], area_y, 1)
    gz = _face_conductance(lam, dz[None, None, :-1], dz[None, None, 1:], area_z, 2)

    rows = np.concatenate([idx[:-1].ravel(), idx[:, :-1].ravel(), idx[:, :, :-1].ravel()])
    cols = np.concatenate([idx[1:].ravel(), idx[:, 1:].ravel(), idx[:, :, 1:].ravel()])
    vals = np.concatenate([gx.ravel(), gy.ravel(), gz.ravel()])

    diag = np.zeros(n)
    np.add.at(diag, rows, vals)
    np.add.at(diag, cols, vals)

    # Robin faces: z=0 outdoor (R_se), z=depth indoor (R_si)
    g_se = (area_z[:, :, 0] / (bc.r_se + 0.5 * dz[0] / lam[:, :, 0])).ravel()
    g_si = (area_z[:, :, 0] / (bc.r_si + 0.5 * dz[-1] / lam[:, :, -1])).ravel()
    b = np.zeros(n)
    out_idx = idx[:, :, 0].ravel()
    in_idx = idx[:, :, -1].ravel()
    diag[out_idx] += g_se
    diag[in_idx] += g_si
    b[out_idx] += g_se * bc.t_outside_k
    b[in_idx] += g_si * bc.t_inside_k

    matrix = sp.coo_matrix(
        (
            np.concatenate([vals * -1.0, vals * -1.0, diag]),
            (np.concatenate([rows, cols, np.arange(n)]), np.concatenate([cols, rows, np.arange(n)])),
        ),
        shape=(n, n),
    ).tocsr()

    x0 = _layered_profile_guess(grid, bc)
    preconditioner = spla.LinearOperator((n, n), matvec=lambda v: v / diag)
    iterations = 0

    def count(_):
        nonlocal iterations
        iterations += 1

    t_flat, info = spla.cg(matrix, b, x0=x0, rtol=cg_rtol, maxiter=max_iter, M=preconditioner, callback=count)
    residual = float(np.linalg.norm(b - matrix @ t_flat) / np.linalg.norm(b))

    t = t_flat.reshape(nx, ny, nz)
    q_in = float(np.sum(g_si * (bc.t_inside_k - t_flat[in_idx])))
    q_out = float(np.sum(g_se * (t_flat[out_idx] - bc.t_outside_k)))
    q_ref = max(abs(q_in), abs(q_out))
    balance = abs(q_in - q_out) / q_ref if q_ref > 0.0 else math.inf
    flow = 0.5 * (q_in + q_out)
    u = flow / (grid.area_m2 * bc.delta_t)
    converged = info == 0 and balance < tol
    return UValueResult(
        u=u,
        heat_flow_w=flow,
        converged=converged,
        iterations=iterations,
        residual=residual,
        balance=balance,
        area_m2=grid.area_m2,
        temperature=t,
    )


def _layered_profile_guess(grid: VoxelGrid, bc: ThermalBoundary) -> np.ndarray:
    """1-D temperature profile through area-averaged slab conductivities."""
    lam = grid.conductivity_field()
    areas = np.outer(grid.dx_m, grid.dy_m)
    lam_eff = np.einsum("xy,xyz->z", areas, lam) / areas.sum()
    dz = grid.dz_m
    r_slab = dz / lam_eff
    r_cum = bc.r_se + np.cumsum(r_slab) - 0.5 * r_slab  # resistance up to cell centres
    r_tot = bc.r_se + np.sum(r_slab) + bc.r_si
    t_profile = bc.t_outside_k + (bc.t_inside_k - bc.t_outside_k) * r_cum / r_tot
    return np.broadcast_to(t_profile, (grid.nx, grid.ny, grid.nz)).ravel().copy()


def write_vtk(grid: VoxelGrid, temperature: np.ndarray, path):
    """Legacy-ASCII rectilinear-grid VTK export of cell temperatures."""
    t = np.asarray(temperature)
    if t.shape != (grid.nx, grid.ny, grid.nz):
        raise ThermalError("temperature shape does not match the grid")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# vtk DataFile Version 3.0\nsignalwall temperature field\nASCII\n")
        fh.write("DATASET RECTILINEAR_GRID\n")
        fh.write(f"DIMENSIONS {grid.nx + 1} {grid.ny + 1} {grid.nz + 1}\n")
        for label, nodes in (
            ("X_COORDINATES", grid.x_nodes_mm),
            ("Y_COORDINATES", grid.y_nodes_mm),
            ("Z_COORDINATES", grid.z_nodes_mm),
        ):
            fh.write(f"{label} {len(nodes)} float\n")
            fh.write(" ".join(f"{v:.6f}" for v in nodes) + "\n")
        fh.write(f"CELL_DATA {grid.n_cells}\n")
        fh.write("SCALARS temperature_K float 1\nLOOKUP_TABLE default\n")
        for value in t.transpose(2, 1, 0).ravel():
            fh.write(f"{value:.6f}\n")
