"""Sparse spatial operators over the active unknowns.

Diffusion and advection rows are assembled once per geometry and reused for
every time step; with a separable velocity the whole time dependence of the
problem is carried by scalars, never by re-assembly.

Row conventions:
  * fluid rows (interior / near-wall) carry the discretized operator;
  * wall and ghost rows are left zero here and are filled in by the wall
    boundary rows and the ghost-point module respectively;
  * rows whose wide 9-point stencil would leave the grid or touch an
    inactive node fall back to the compact second-order cross stencil in
    both directions (the degree-3 extrapolation of the out-of-grid value
    cancels the wide correction exactly, leaving the cross stencil).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .geometry import Classification, Grid, PointClass

__all__ = [
    "VelocityField",
    "constant_velocity",
    "poly_cubic_velocity",
    "radial_velocity",
    "laplacian_2nd",
    "advection_2nd",
    "laplacian_4th",
    "advection_4th_const",
    "advection_4th_variable",
    "dirichlet_wall_rows",
    "neumann_wall_rows",
    "WallRows",
]


@dataclass
class VelocityField:
    """Spatial factor V of a separable velocity u(x, t) = g(t/eps) V(x)."""

    vx: Callable[[np.ndarray, np.ndarray], np.ndarray]
    vy: Callable[[np.ndarray, np.ndarray], np.ndarray]
    kind: str = "custom"
    amplitude: float = 1.0
    gamma: float = 0.0

    def on_grid(self, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
        X, Y = grid.node_xy()
        with np.errstate(divide="ignore", invalid="ignore"):
            vx = np.asarray(self.vx(X, Y), dtype=float)
            vy = np.asarray(self.vy(X, Y), dtype=float)
        # singular evaluation points can only be inactive nodes; the values
        # are never referenced but must not poison array arithmetic
        vx[~np.isfinite(vx)] = 0.0
        vy[~np.isfinite(vy)] = 0.0
        return vx, vy


def constant_velocity(u: float) -> VelocityField:
    return VelocityField(vx=lambda x, y: np.full_like(x, float(u)),
                         vy=lambda x, y: np.full_like(x, float(u)),
                         kind="constant", amplitude=float(u))


def poly_cubic_velocity(amplitude: float = 1.0) -> VelocityField:
    a = float(amplitude)
    return VelocityField(vx=lambda x, y: a * x**3, vy=lambda x, y: a * y**3,
                         kind="poly_cubic", amplitude=a)


def radial_velocity(amplitude: float = 1.0, gamma: float = 0.1) -> VelocityField:
    a, g = float(amplitude), float(gamma)
    return VelocityField(vx=lambda x, y: a * x / (x**2 + y**2 + g),
                         vy=lambda x, y: a * y / (x**2 + y**2 + g),
                         kind="radial", amplitude=a, gamma=g)


def _fluid_masks(cls: Classification) -> tuple[np.ndarray, np.ndarray]:
    """(wide, reduced) row masks over the node mesh.

    `wide` selects fluid nodes whose 9-point stencil stays on active nodes
    inside the grid; `reduced` the remaining fluid nodes (near-wall layer
    and interface-adjacent nodes).
    """
    pc = cls.point_class
    n = cls.grid.n
    fluid = (pc == PointClass.INTERIOR) | (pc == PointClass.NEAR_WALL)
    inactive = pc == PointClass.INACTIVE

    wide = fluid.copy()
    wide[:2, :] = wide[-2:, :] = False
    wide[:, :2] = wide[:, -2:] = False
    for di, dj in ((1, 0), (2, 0), (-1, 0), (-2, 0), (0, 1), (0, 2), (0, -1), (0, -2)):
        # shifted[i, j] = inactive[i + di, j + dj]
        shifted = np.zeros_like(wide)
        si = slice(max(di, 0), n + 1 + min(di, 0))
        ti = slice(max(-di, 0), n + 1 + min(-di, 0))
        sj = slice(max(dj, 0), n + 1 + min(dj, 0))
        tj = slice(max(-dj, 0), n + 1 + min(-dj, 0))
        shifted[ti, tj] = inactive[si, sj]
        wide &= ~shifted
    reduced = fluid & ~wide
    return wide, reduced


def _assemble(cls: Classification, contributions) -> sp.csr_matrix:
    """COO assembly from (row_mask, di, dj, value_mesh) contributions."""
    idx = cls.active_index
    rows, cols, vals = [], [], []
    for mask, di, dj, val in contributions:
        ii, jj = np.nonzero(mask)
        if ii.size == 0:
            continue
        r = idx[ii, jj]
        c = idx[ii + di, jj + dj]
        if np.any(c < 0):
            bad = np.nonzero(c < 0)[0][0]
            raise ValueError(
                f"operator stencil references inactive node "
                f"({ii[bad] + di},{jj[bad] + dj}) from row ({ii[bad]},{jj[bad]})")
        v = val[ii, jj] if isinstance(val, np.ndarray) else np.full(ii.shape, val)
        rows.append(r)
        cols.append(c)
        vals.append(v)
    n = cls.n_active
    m = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n))
    return m.tocsr()


def laplacian_2nd(grid: Grid, cls: Classification, diffusivity: float) -> sp.csr_matrix:
    """Second-order 5-point Laplacian times D; square domain only."""
    if cls.n_ghost:
        raise ValueError("second-order baseline operator requires no obstacle")
    pc = cls.point_class
    fluid = (pc == PointClass.INTERIOR) | (pc == PointClass.NEAR_WALL)
    d = diffusivity / grid.h**2
    contributions = [(fluid, 0, 0, -4.0 * d)]
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        contributions.append((fluid, di, dj, d))
    return _assemble(cls, contributions)


def advection_2nd(grid: Grid, cls: Classification, u: float) -> sp.csr_matrix:
    """Second-order central advection u (c_x + c_y); square domain only."""
    if cls.n_ghost:
        raise ValueError("second-order baseline operator requires no obstacle")
    pc = cls.point_class
    fluid = (pc == PointClass.INTERIOR) | (pc == PointClass.NEAR_WALL)
    a = u / (2.0 * grid.h)
    contributions = [
        (fluid, 1, 0, a), (fluid, -1, 0, -a),
        (fluid, 0, 1, a), (fluid, 0, -1, -a),
    ]
    return _assemble(cls, contributions)


def laplacian_4th(grid: Grid, cls: Classification, diffusivity: float) -> sp.csr_matrix:
    """Fourth-order 9-point Laplacian times D, with reduced rows where the
    wide stencil does not fit (both directions drop to the cross stencil,
    e.g. the row at (2, N-1) carries weights (12,12,12,12,-48)/(12 h^2))."""
    wide, reduced = _fluid_masks(cls)
    c12 = diffusivity / (12.0 * grid.h**2)
    contributions = [(wide, 0, 0, -60.0 * c12)]
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        contributions.append((wide, di, dj, 16.0 * c12))
    for di, dj in ((2, 0), (-2, 0), (0, 2), (0, -2)):
        contributions.append((wide, di, dj, -1.0 * c12))
    d = diffusivity / grid.h**2
    contributions.append((reduced, 0, 0, -4.0 * d))
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        contributions.append((reduced, di, dj, d))
    return _assemble(cls, contributions)


def advection_4th_const(grid: Grid, cls: Classification, u: float) -> sp.csr_matrix:
    """Fourth-order central advection u (c_x + c_y); reduced rows use the
    second-order central difference in both directions."""
    wide, reduced = _fluid_masks(cls)
    a = u / (12.0 * grid.h)
    contributions = []
    for di, dj, w in ((-2, 0, 1.0), (-1, 0, -8.0), (1, 0, 8.0), (2, 0, -1.0),
                      (0, -2, 1.0), (0, -1, -8.0), (0, 1, 8.0), (0, 2, -1.0)):
        contributions.append((wide, di, dj, w * a))
    b = u / (2.0 * grid.h)
    for di, dj, w in ((1, 0, 1.0), (-1, 0, -1.0), (0, 1, 1.0), (0, -1, -1.0)):
        contributions.append((reduced, di, dj, w * b))
    return _assemble(cls, contributions)


def advection_4th_variable(grid: Grid, cls: Classification,
                           velocity: VelocityField) -> sp.csr_matrix:
    """Conservative fourth-order discretization of div(V c): the column at
    each neighbor carries that neighbor's velocity component."""
    wide, reduced = _fluid_masks(cls)
    vx, vy = velocity.on_grid(grid)
    h = grid.h
    n = grid.n

    def shifted(field, di, dj):
        out = np.zeros_like(field)
        si = slice(max(di, 0), n + 1 + min(di, 0))
        ti = slice(max(-di, 0), n + 1 + min(-di, 0))
        sj = slice(max(dj, 0), n + 1 + min(dj, 0))
        tj = slice(max(-dj, 0), n + 1 + min(-dj, 0))
        out[ti, tj] = field[si, sj]
        return out

    contributions = []
    for di, w in ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)):
        contributions.append((wide, di, 0, w / (12.0 * h) * shifted(vx, di, 0)))
    for dj, w in ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)):
        contributions.append((wide, 0, dj, w / (12.0 * h) * shifted(vy, 0, dj)))
    for di, w in ((1, 1.0), (-1, -1.0)):
        contributions.append((reduced, di, 0, w / (2.0 * h) * shifted(vx, di, 0)))
    for dj, w in ((1, 1.0), (-1, -1.0)):
        contributions.append((reduced, 0, dj, w / (2.0 * h) * shifted(vy, 0, dj)))
    return _assemble(cls, contributions)


@dataclass
class WallRows:
    """Constraint rows for the square-edge nodes.

    `matrix` holds the rows (over the active unknowns, zero elsewhere),
    `rows` their active indices, and `rhs(t)` the constraint targets.
    """

    rows: np.ndarray
    matrix: sp.csr_matrix
    rhs: Callable[[float], np.ndarray]


def dirichlet_wall_rows(grid: Grid, cls: Classification,
                        f: Callable[[np.ndarray, np.ndarray, float], np.ndarray] | None
                        ) -> WallRows:
    """Identity rows 1 * c|wall = f(x, y, t); f None means homogeneous."""
    pc = cls.point_class
    ii, jj = np.nonzero(pc == PointClass.WALL)
    rows = cls.active_index[ii, jj]
    n = cls.n_active
    matrix = sp.coo_matrix((np.ones(rows.size), (rows, rows)), shape=(n, n)).tocsr()
    X, Y = grid.node_xy()
    xw, yw = X[ii, jj], Y[ii, jj]
    if f is None:
        def rhs(t: float) -> np.ndarray:
            return np.zeros(rows.size)
    else:
        def rhs(t: float) -> np.ndarray:
            return np.asarray(f(xw, yw, t), dtype=float)
    return WallRows(rows=rows, matrix=matrix, rhs=rhs)


_ONESIDED = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


def neumann_wall_rows(grid: Grid, cls: Classification) -> WallRows:
    """Homogeneous Neumann walls: one-sided 4th-order normal derivative rows
    (scaled by h, so entries are O(1)) set to zero.  Corner nodes take the
    x-direction row."""
    pc = cls.point_class
    idx = cls.active_index
    n = grid.n
    ii, jj = np.nonzero(pc == PointClass.WALL)
    rows_list, cols_list, vals_list = [], [], []
    for i, j in zip(ii, jj):
        r = idx[i, j]
        if i == 0:
            nodes = [(i + k, j) for k in range(5)]
        elif i == n:
            nodes = [(i - k, j) for k in range(5)]
        elif j == 0:
            nodes = [(i, j + k) for k in range(5)]
        else:
            nodes = [(i, j - k) for k in range(5)]
        for (pi, pj), w in zip(nodes, _ONESIDED):
            c = idx[pi, pj]
            if c < 0:
                raise ValueError(
                    f"Neumann wall row at ({i},{j}) needs inactive node "
                    f"({pi},{pj}); interface too close to the wall")
            rows_list.append(r)
            cols_list.append(c)
            vals_list.append(w)
    nn = cls.n_active
    matrix = sp.coo_matrix((vals_list, (rows_list, cols_list)), shape=(nn, nn)).tocsr()
    rows = idx[ii, jj]

    def rhs(t: float) -> np.ndarray:
        return np.zeros(rows.size)

    return WallRows(rows=rows, matrix=matrix, rhs=rhs)
