"""Assembly of the full semi-discrete system for one geometry.

Collects the fluid operator rows, the ghost-point interface rows and the
wall rows into:

  * `L`: diffusion plus interface-evolution rows (adsorption condition);
  * `Q`: the spatial advection factor (time dependence is the scalar g);
  * `mass`: identity, except that adsorption ghost rows may carry the
    interpolation weights of the boundary value (the evolved quantity of
    the boundary condition is c at B, not the ghost node value);
  * algebraic constraint rows (Dirichlet walls / Neumann walls / Dirichlet
    interface) kept out of L and Q so that operator products in the
    higher-order step operators never touch them.

The system reads  mass * dc/dt = (L + g(t/eps) Q) c  on evolution rows,
with constraint rows enforced at every step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .geometry import Classification, Grid, LevelSetDomain, PointClass, classify
from .ghost import build_stencil, ghost_row_robin
from .operators import (
    VelocityField,
    advection_4th_variable,
    dirichlet_wall_rows,
    laplacian_4th,
    neumann_wall_rows,
)

__all__ = ["SemiDiscreteSystem", "build_system"]


@dataclass
class SemiDiscreteSystem:
    grid: Grid
    cls: Classification
    L: sp.csr_matrix
    Q: Optional[sp.csr_matrix]
    mass: sp.csr_matrix
    constraint_rows: np.ndarray
    constraint_matrix: sp.csr_matrix
    constraint_rhs: Callable[[float], np.ndarray]
    diffusivity: float

    @property
    def n(self) -> int:
        return self.cls.n_active

    def fluid_rows(self) -> np.ndarray:
        """Rows of fluid non-wall nodes (where errors are measured)."""
        return np.sort(np.concatenate([
            self.cls.rows_of(PointClass.INTERIOR),
            self.cls.rows_of(PointClass.NEAR_WALL),
        ]))

    def initial_field(self, f) -> np.ndarray:
        """Sample the initial condition on all active nodes (ghosts get the
        smooth extension of the same formula)."""
        return self.cls.node_values(f)


def build_system(grid: Grid, domain: LevelSetDomain, diffusivity: float,
                 velocity: Optional[VelocityField] = None,
                 wall_bc: str = "dirichlet0",
                 wall_dirichlet_f=None,
                 interface_bc: str = "robin",
                 adsorption_length: float | None = None,
                 robin_mass: str = "interp") -> SemiDiscreteSystem:
    """Assemble the operators for one geometry.

    wall_bc: 'dirichlet0', 'dirichlet' (with wall_dirichlet_f(x, y, t)), or
    'neumann'.  interface_bc: 'robin' (needs adsorption_length) or
    'dirichlet0'.  robin_mass: 'interp' evolves the interpolated boundary
    value (mass row = value weights), 'identity' evolves the ghost unknown.
    """
    cls = classify(grid, domain)
    n = cls.n_active

    L = laplacian_4th(grid, cls, diffusivity).tolil()
    Q = advection_4th_variable(grid, cls, velocity) if velocity is not None else None

    mass = sp.identity(n, format="lil")

    constraint_parts = []
    constraint_rows_list = []
    rhs_fns = []

    if cls.n_wall:
        if wall_bc == "dirichlet0":
            wr = dirichlet_wall_rows(grid, cls, None)
        elif wall_bc == "dirichlet":
            wr = dirichlet_wall_rows(grid, cls, wall_dirichlet_f)
        elif wall_bc == "neumann":
            wr = neumann_wall_rows(grid, cls)
        else:
            raise ValueError(f"unknown wall_bc {wall_bc!r}")
        constraint_parts.append(wr.matrix)
        constraint_rows_list.append(wr.rows)
        rhs_fns.append((wr.rows, wr.rhs))

    if cls.frames:
        ghost_rows = []
        ghost_cols = []
        ghost_vals = []
        mass_rows = []
        mass_cols = []
        mass_vals = []
        for (i, j) in sorted(cls.frames):
            fr = cls.frames[(i, j)]
            w = build_stencil(grid, cls, fr)
            r = cls.active_index[i, j]
            if interface_bc == "robin":
                if adsorption_length is None or adsorption_length <= 0.0:
                    raise ValueError("robin interface needs a positive adsorption_length")
                cols, row = ghost_row_robin(w, diffusivity, adsorption_length)
                L.rows[r] = []
                L.data[r] = []
                for c, v in zip(cols, row):
                    ghost_rows.append(r)
                    ghost_cols.append(int(c))
                    ghost_vals.append(float(v))
                if robin_mass == "interp":
                    mass_rows.extend([r] * 16)
                    mass_cols.extend(int(c) for c in w.cols)
                    mass_vals.extend(float(v) for v in w.w_val)
                elif robin_mass != "identity":
                    raise ValueError(f"unknown robin_mass {robin_mass!r}")
            elif interface_bc == "dirichlet0":
                # normalize the constraint row: the ghost's own weight can be
                # arbitrarily small when B sits near the far cell corner
                scale = 1.0 / float(np.max(np.abs(w.w_val)))
                for c, v in zip(w.cols, w.w_val):
                    ghost_rows.append(r)
                    ghost_cols.append(int(c))
                    ghost_vals.append(float(v) * scale)
            else:
                raise ValueError(f"unknown interface_bc {interface_bc!r}")
        ghost_matrix = sp.coo_matrix(
            (ghost_vals, (ghost_rows, ghost_cols)), shape=(n, n)).tocsr()
        rows = np.sort(np.unique(ghost_rows))
        if interface_bc == "robin":
            L = (L.tocsr() + ghost_matrix).tolil()
            if robin_mass == "interp":
                mass = mass.tocsr().tolil()
                for r in rows:
                    mass.rows[r] = []
                    mass.data[r] = []
                mass = (mass.tocsr() + sp.coo_matrix(
                    (mass_vals, (mass_rows, mass_cols)), shape=(n, n)).tocsr()).tolil()
        else:
            constraint_parts.append(ghost_matrix)
            constraint_rows_list.append(rows)
            rhs_fns.append((rows, lambda t, m=rows.size: np.zeros(m)))

    if constraint_rows_list:
        constraint_rows = np.sort(np.concatenate(constraint_rows_list))
        constraint_matrix = sum(constraint_parts[1:], start=constraint_parts[0]).tocsr()
    else:
        constraint_rows = np.empty(0, dtype=np.int64)
        constraint_matrix = sp.csr_matrix((n, n))

    def constraint_rhs(t: float) -> np.ndarray:
        out = np.zeros(n)
        for rows, fn in rhs_fns:
            out[rows] = fn(t)
        return out[constraint_rows]

    L = L.tocsr()
    if Q is not None:
        Q = Q.tocsr()
    mass = mass.tocsr()

    # evolution operators must be strictly zero on constraint rows
    if constraint_rows.size:
        keep = np.ones(n)
        keep[constraint_rows] = 0.0
        P = sp.diags(keep)
        L = (P @ L).tocsr()
        if Q is not None:
            Q = (P @ Q).tocsr()

    return SemiDiscreteSystem(grid=grid, cls=cls, L=L, Q=Q, mass=mass,
                              constraint_rows=constraint_rows,
                              constraint_matrix=constraint_matrix,
                              constraint_rhs=constraint_rhs,
                              diffusivity=diffusivity)
