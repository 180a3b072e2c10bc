"""Ghost-point boundary rows on the level-set interface.

Every ghost node G carries one equation obtained by interpolating the
solution (and, for the adsorption condition, its first and second
derivatives) at the closest interface point B with the upwind 16-point
stencil anchored at G, then imposing the boundary condition there:

  * Dirichlet:  c(B) = f(B), a stationary constraint row;
  * adsorption (Robin / tangential-diffusion): the interpolated boundary
    value evolves as  d c(B)/dt = D (tau.grad)^2 c|_B - (D/M) dc/dn|_B,
    a time-evolution row that enters the step operators like interior rows.

Interpolation uses the tensor product of cubic Lagrange bases on the nodes
{0, 1, 2, 3} evaluated at the offsets theta in [0, 1); it is exact for
polynomials of degree <= 3 per variable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import BoundaryFrame, Classification, Grid

__all__ = [
    "lagrange_weights",
    "StencilWeights",
    "build_stencil",
    "ghost_row_dirichlet",
    "ghost_row_robin",
]


def _cubic_basis(theta: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cubic Lagrange basis on nodes {0,1,2,3} and its two derivatives."""
    t = float(theta)
    l = np.array([
        -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0,
        t * (t - 2.0) * (t - 3.0) / 2.0,
        -t * (t - 1.0) * (t - 3.0) / 2.0,
        t * (t - 1.0) * (t - 2.0) / 6.0,
    ])
    lp = np.array([
        -(3.0 * t * t - 12.0 * t + 11.0) / 6.0,
        (3.0 * t * t - 10.0 * t + 6.0) / 2.0,
        -(3.0 * t * t - 8.0 * t + 3.0) / 2.0,
        (3.0 * t * t - 6.0 * t + 2.0) / 6.0,
    ])
    lpp = np.array([2.0 - t, 3.0 * t - 5.0, 4.0 - 3.0 * t, t - 1.0])
    return l, lp, lpp


def lagrange_weights(theta: float, h: float = 1.0):
    """Value/derivative weights of the cubic interpolation basis at theta.

    Returns (l, l', l'') with the derivative rows carrying the 1/h and
    1/h^2 grid scalings.  theta must lie in [0, 1) (offset of the boundary
    point inside the first stencil cell).
    """
    if not 0.0 <= theta < 1.0:
        raise ValueError(f"theta must lie in [0, 1), got {theta}")
    l, lp, lpp = _cubic_basis(theta)
    return l, lp / h, lpp / h**2


@dataclass
class StencilWeights:
    """Interpolation rows of one ghost node over its 16-point stencil.

    `cols` are active-vector indices ordered as (m_x, m_y) row-major;
    the six weight vectors give value, first and second derivatives of the
    interpolant at the boundary point B.
    """

    frame: BoundaryFrame
    cols: np.ndarray
    w_val: np.ndarray
    w_dx: np.ndarray
    w_dy: np.ndarray
    w_dxx: np.ndarray
    w_dyy: np.ndarray
    w_dxy: np.ndarray


def build_stencil(grid: Grid, cls: Classification,
                  frame: BoundaryFrame) -> StencilWeights:
    """Tensor-product weights of the upwind 16-point stencil of a ghost."""
    h = grid.h
    lx, lpx, lppx = _cubic_basis(frame.theta_x)
    ly, lpy, lppy = _cubic_basis(frame.theta_y)
    sx, sy = frame.sx, frame.sy

    cols = np.empty(16, dtype=np.int64)
    k = 0
    for mx in range(4):
        for my in range(4):
            ii = frame.gi + sx * mx
            jj = frame.gj + sy * my
            c = cls.active_index[ii, jj]
            if c < 0:
                raise ValueError(
                    f"stencil of ghost ({frame.gi},{frame.gj}) touches "
                    f"inactive node ({ii},{jj})")
            cols[k] = c
            k += 1

    w_val = np.outer(lx, ly).ravel()
    w_dx = sx * np.outer(lpx, ly).ravel() / h
    w_dy = sy * np.outer(lx, lpy).ravel() / h
    w_dxx = np.outer(lppx, ly).ravel() / h**2
    w_dyy = np.outer(lx, lppy).ravel() / h**2
    w_dxy = sx * sy * np.outer(lpx, lpy).ravel() / h**2
    return StencilWeights(frame=frame, cols=cols, w_val=w_val, w_dx=w_dx,
                          w_dy=w_dy, w_dxx=w_dxx, w_dyy=w_dyy, w_dxy=w_dxy)


def ghost_row_dirichlet(weights: StencilWeights, f_b: float):
    """Stationary constraint row: interpolated value at B equals f(B)."""
    return weights.cols, weights.w_val.copy(), float(f_b)


def ghost_row_robin(weights: StencilWeights, diffusivity: float,
                    adsorption_length: float):
    """Evolution row D (tau.grad)^2 - (D/M) d/dn at B over the stencil."""
    if adsorption_length <= 0.0:
        raise ValueError(f"adsorption length must be positive, got {adsorption_length}")
    fr = weights.frame
    tx, ty = fr.tau
    tang = (tx * tx * weights.w_dxx
            + 2.0 * tx * ty * weights.w_dxy
            + ty * ty * weights.w_dyy)
    normal = fr.nx * weights.w_dx + fr.ny * weights.w_dy
    row = diffusivity * tang - (diffusivity / adsorption_length) * normal
    return weights.cols, row
