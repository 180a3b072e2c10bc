"""Manufactured solutions, forcing terms, and error norms.

The spatial accuracy studies integrate the forced equation

    dc/dt = D Lap c + adv(c) + F(t),   F = d_t c_exa - D Lap c_exa - adv(c_exa)

with a small-step Crank-Nicolson loop, so that the measured error at the
final time is dominated by the spatial truncation.  The exact solution is
a pair of Gaussians with cos(t)/sin(t) envelopes; all derivatives entering
F are evaluated in closed form (no numerical differentiation on the
production path).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = ["ManufacturedCase", "error_norms", "CrankNicolson"]


@dataclass
class ManufacturedCase:
    """Exact solution cos(t) G1 + sin(t) G2 and its forcing.

    velocity: 'none', 'constant' (speed u in both components), or
    'poly_cubic' (A (x^3, y^3)); must match the advection operator used by
    the run that consumes the forcing.
    """

    sigma: float = 0.1
    center1: tuple[float, float] = (0.0, 0.0)
    center2: tuple[float, float] | None = None
    diffusivity: float = 1.0
    velocity: str = "constant"
    u: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.center2 is None:
            self.center2 = self.center1
        if self.velocity not in ("none", "constant", "poly_cubic"):
            raise ValueError(f"unknown velocity kind {self.velocity!r}")

    def _gaussian(self, x, y, center):
        cx, cy = center
        s2 = self.sigma**2
        return np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * s2))

    def _parts(self, x, y):
        return self._gaussian(x, y, self.center1), self._gaussian(x, y, self.center2)

    def exact(self, x, y, t):
        g1, g2 = self._parts(x, y)
        return np.cos(t) * g1 + np.sin(t) * g2

    def exact_grad(self, x, y, t):
        g1, g2 = self._parts(x, y)
        s2 = self.sigma**2
        cx1, cy1 = self.center1
        cx2, cy2 = self.center2
        cxp = -(np.cos(t) * (x - cx1) * g1 + np.sin(t) * (x - cx2) * g2) / s2
        cyp = -(np.cos(t) * (y - cy1) * g1 + np.sin(t) * (y - cy2) * g2) / s2
        return cxp, cyp

    def exact_laplacian(self, x, y, t):
        g1, g2 = self._parts(x, y)
        s2 = self.sigma**2
        cx1, cy1 = self.center1
        cx2, cy2 = self.center2
        r1 = (x - cx1) ** 2 + (y - cy1) ** 2
        r2 = (x - cx2) ** 2 + (y - cy2) ** 2
        lap1 = (r1 / s2 - 2.0) / s2 * g1
        lap2 = (r2 / s2 - 2.0) / s2 * g2
        return np.cos(t) * lap1 + np.sin(t) * lap2

    def exact_dt(self, x, y, t):
        g1, g2 = self._parts(x, y)
        return -np.sin(t) * g1 + np.cos(t) * g2

    def advection_of_exact(self, x, y, t):
        """adv(c_exa) for the declared velocity kind."""
        if self.velocity == "none":
            return np.zeros_like(np.asarray(x, dtype=float))
        cx, cy = self.exact_grad(x, y, t)
        if self.velocity == "constant":
            return self.u * (cx + cy)
        c = self.exact(x, y, t)
        a = self.amplitude
        return a * ((3.0 * x**2 + 3.0 * y**2) * c + x**3 * cx + y**3 * cy)

    def forcing(self, x, y, t):
        return (self.exact_dt(x, y, t)
                - self.diffusivity * self.exact_laplacian(x, y, t)
                - self.advection_of_exact(x, y, t))


def error_norms(numeric: np.ndarray, reference: np.ndarray):
    """Relative (L1, L2, Linf) vector norms of numeric - reference."""
    numeric = np.asarray(numeric, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if numeric.shape != reference.shape:
        raise ValueError("fields must share the index map")
    diff = numeric - reference
    n1, n2, ninf = (np.linalg.norm(reference, 1), np.linalg.norm(reference),
                    np.linalg.norm(reference, np.inf))
    if n2 == 0.0:
        raise ValueError("reference field has zero norm")
    return (np.linalg.norm(diff, 1) / n1,
            np.linalg.norm(diff) / n2,
            np.linalg.norm(diff, np.inf) / ninf)


class CrankNicolson:
    """(I - dt/2 Op) c^{n+1} = (I + dt/2 Op) c^n + dt/2 (F^n + F^{n+1}),
    with algebraic constraint rows (walls) enforced on the implicit side.

    Op must have zero rows at the constraint indices; the operator is
    factorized once and reused for every step.
    """

    def __init__(self, op, dt: float, constraint_rows=None,
                 constraint_matrix=None, constraint_rhs=None, forcing=None):
        self.dt = float(dt)
        n = op.shape[0]
        self.n = n
        self.forcing = forcing
        self.constraint_rows = (np.empty(0, dtype=np.int64)
                                if constraint_rows is None else constraint_rows)
        self.constraint_rhs = constraint_rhs
        dense = not sp.issparse(op)
        eye = np.eye(n) if dense else sp.identity(n, format="csr")
        lhs = eye - 0.5 * self.dt * op
        self.rhs_mat = eye + 0.5 * self.dt * op
        if self.constraint_rows.size:
            keep = np.ones(n)
            keep[self.constraint_rows] = 0.0
            if dense:
                lhs = keep[:, None] * lhs + constraint_matrix
                self.rhs_mat = keep[:, None] * self.rhs_mat
            else:
                P = sp.diags(keep)
                lhs = (P @ lhs + constraint_matrix).tocsr()
                self.rhs_mat = (P @ self.rhs_mat).tocsr()
        if dense:
            self._solve = np.linalg.inv(lhs).__matmul__
        else:
            self._solve = spla.splu(lhs.tocsc()).solve

    def step(self, c: np.ndarray, t: float) -> np.ndarray:
        rhs = self.rhs_mat @ c
        if self.forcing is not None:
            f_mid = 0.5 * self.dt * (self.forcing(t) + self.forcing(t + self.dt))
            if self.constraint_rows.size:
                f_mid[self.constraint_rows] = 0.0
            rhs = rhs + f_mid
        if self.constraint_rows.size:
            rhs[self.constraint_rows] = self.constraint_rhs(t + self.dt)
        return self._solve(rhs)

    def run(self, c0: np.ndarray, t0: float, n_steps: int) -> np.ndarray:
        c = np.asarray(c0, dtype=float).copy()
        for k in range(n_steps):
            c = self.step(c, t0 + k * self.dt)
        return c
