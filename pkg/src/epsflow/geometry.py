"""Grids, level-set domains, node classification, and boundary frames.

The computational domain is a square [a, b]^2 possibly minus an obstacle
given implicitly by a level-set function phi: phi > 0 in the excluded
region, phi < 0 in the fluid, phi = 0 on the interface.  Grid nodes are
classified as interior, near-wall (one layer inside the square edge, where
the wide stencils of the 4th-order operators do not fit), wall, ghost
(excluded node with a fluid 4-neighbor), or inactive.  For every ghost node
a boundary frame is computed: the closest interface point B, the unit
normal/tangent there, and the dimensionless offsets used by the upwind
interpolation stencil.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Grid",
    "LevelSetDomain",
    "PointClass",
    "Classification",
    "BoundaryFrame",
    "build_grid",
    "classify",
    "closest_boundary_point",
    "circle_domain",
    "ellipse_domain",
    "flower_domain",
    "cardioid_domain",
    "no_obstacle",
]

# Nodes with |phi| below this multiple of h are nudged to the fluid side,
# so the zero set never passes exactly through a node.
PHI_NUDGE = 1e-14


@dataclass(frozen=True)
class Grid:
    """Uniform square Cartesian mesh on [a, b]^2 with N cells per side.

    Nodes are (x_i, y_j) = (a + i h, a + j h) for i, j in {0..N}, so there
    are N+1 nodes per side and h = (b - a) / N.
    """

    n: int
    a: float
    b: float

    def __post_init__(self):
        if self.n < 4:
            raise ValueError(f"need N >= 4 cells per side, got {self.n}")
        if not self.b > self.a:
            raise ValueError(f"need b > a, got [{self.a}, {self.b}]")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def n_nodes(self) -> int:
        return (self.n + 1) ** 2

    def coords_1d(self) -> np.ndarray:
        return self.a + self.h * np.arange(self.n + 1)

    def node_xy(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshes X[i, j] = x_i, Y[i, j] = y_j (first axis is x)."""
        c = self.coords_1d()
        return np.meshgrid(c, c, indexing="ij")

    def coordinate_of(self, i: int, j: int) -> tuple[float, float]:
        return self.a + i * self.h, self.a + j * self.h

    def index_of(self, x: float, y: float) -> tuple[int, int]:
        i = round((x - self.a) / self.h)
        j = round((y - self.a) / self.h)
        return int(i), int(j)


def build_grid(n: int, a: float, b: float) -> Grid:
    return Grid(n, a, b)


@dataclass
class LevelSetDomain:
    """Obstacle description: phi > 0 excluded, phi < 0 fluid, phi = 0 on the
    interface.  `grad_phi` is analytic where available; otherwise a central
    finite-difference fallback is used (sufficient for Newton projection).
    """

    phi: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad_phi: Optional[Callable[[float, float], tuple[float, float]]] = None
    shape_tag: str = "none"
    params: dict = field(default_factory=dict)

    def phi_at(self, x, y):
        return self.phi(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def gradient(self, x: float, y: float) -> tuple[float, float]:
        if self.grad_phi is not None:
            return self.grad_phi(x, y)
        d = 1e-6 * max(1.0, abs(x), abs(y))
        gx = (float(self.phi_at(x + d, y)) - float(self.phi_at(x - d, y))) / (2 * d)
        gy = (float(self.phi_at(x, y + d)) - float(self.phi_at(x, y - d))) / (2 * d)
        return gx, gy


def no_obstacle() -> LevelSetDomain:
    return LevelSetDomain(phi=lambda x, y: np.full_like(np.asarray(x, float), -1.0),
                          grad_phi=lambda x, y: (0.0, 0.0), shape_tag="none")


def circle_domain(radius: float, center: tuple[float, float] = (0.0, 0.0)) -> LevelSetDomain:
    """Signed-distance circle: phi = R - |x - O| (positive inside)."""
    ox, oy = center

    def phi(x, y):
        return radius - np.sqrt((x - ox) ** 2 + (y - oy) ** 2)

    def grad(x, y):
        r = math.hypot(x - ox, y - oy)
        if r == 0.0:
            return 0.0, 0.0
        return -(x - ox) / r, -(y - oy) / r

    return LevelSetDomain(phi=phi, grad_phi=grad, shape_tag="circle",
                          params={"radius": radius, "center": center})


_C6 = math.cos(math.pi / 6.0)
_S6 = math.sin(math.pi / 6.0)


def ellipse_domain() -> LevelSetDomain:
    """Ellipsoidal test domain; fluid is the inside of the curve."""
    x0 = math.sqrt(2.0) / 20.0
    y0 = math.sqrt(3.0) / 30.0

    def phi(x, y):
        X = _C6 * x - _S6 * y
        Y = _C6 * x + _S6 * y
        return ((X - x0) / 0.7) ** 2 + ((Y - y0) / 0.45) ** 2 - 1.0

    def grad(x, y):
        X = _C6 * x - _S6 * y
        Y = _C6 * x + _S6 * y
        dX = 2.0 * (X - x0) / 0.7**2
        dY = 2.0 * (Y - y0) / 0.45**2
        return dX * _C6 + dY * _C6, -dX * _S6 + dY * _S6

    return LevelSetDomain(phi=phi, grad_phi=grad, shape_tag="ellipse")


def flower_domain() -> LevelSetDomain:
    """Five-petal flower; fluid is the inside of the curve."""
    x0 = 0.03 * math.sqrt(3.0)
    y0 = 0.04 * math.sqrt(2.0)

    def phi(x, y):
        X = x - x0
        Y = y - y0
        R = np.sqrt(X * X + Y * Y)
        R = np.maximum(R, 1e-30)
        # the angular quintic is normalized by 5 R^5, so the petal
        # perturbation stays bounded and the zero set is a single curve
        return R - 0.52 - (Y**5 + 5.0 * X**4 * Y - 10.0 * X**2 * Y**3) / (5.0 * R**5)

    return LevelSetDomain(phi=phi, shape_tag="flower")


def cardioid_domain() -> LevelSetDomain:
    """Cardioid; fluid is the inside of the curve (cusp on the interface)."""
    x0 = 0.04 * math.sqrt(3.0) + 0.35
    y0 = 0.05 * math.sqrt(2.0)

    def phi(x, y):
        X = x - x0
        Y = y - y0
        r2 = X * X + Y * Y
        return (3.0 * r2 - X) ** 2 - r2

    return LevelSetDomain(phi=phi, shape_tag="cardioid")


SHAPE_BUILDERS = {
    "none": lambda **kw: no_obstacle(),
    "circle": lambda **kw: circle_domain(kw.get("radius", 0.2), kw.get("center", (0.0, 0.0))),
    "ellipse": lambda **kw: ellipse_domain(),
    "flower": lambda **kw: flower_domain(),
    "cardioid": lambda **kw: cardioid_domain(),
}


class PointClass(enum.IntEnum):
    INTERIOR = 0
    NEAR_WALL = 1   # fluid node one layer from the square edge
    WALL = 2
    GHOST = 3
    INACTIVE = 4


@dataclass
class BoundaryFrame:
    """Geometry attached to one ghost node G: closest interface point B,
    outgoing (into the obstacle) unit normal n, tangent tau = (-n_y, n_x),
    upwind signs s_x/s_y, and offsets theta in [0, 1)."""

    gi: int
    gj: int
    bx: float
    by: float
    nx: float
    ny: float
    sx: int
    sy: int
    theta_x: float
    theta_y: float

    @property
    def tau(self) -> tuple[float, float]:
        return -self.ny, self.nx


class Classification:
    """Node classes plus the dense numbering of the active unknowns.

    Active unknowns are all non-inactive nodes (fluid, wall and ghost); the
    flat index of node (i, j) is `active_index[i, j]` (-1 if inactive).
    `n_interior` counts fluid non-wall nodes and `n_ghost` the first-layer
    ghosts, so the pair matches the (N_I, N_G) bookkeeping of the scheme.
    Thin concave features may force extra excluded nodes into the unknown
    set (`ghost_layer` > 1) because a first-layer ghost's interpolation
    stencil needs them; they carry interpolation rows exactly like ghosts.
    """

    def __init__(self, grid: Grid, domain: LevelSetDomain,
                 point_class: np.ndarray, phi: np.ndarray,
                 frames: dict[tuple[int, int], "BoundaryFrame"],
                 ghost_layer: dict[tuple[int, int], int]):
        self.grid = grid
        self.domain = domain
        self.point_class = point_class
        self.phi = phi
        self.frames = frames
        self.ghost_layer = ghost_layer
        active = point_class != PointClass.INACTIVE
        self.active_index = -np.ones(point_class.shape, dtype=np.int64)
        self.active_index[active] = np.arange(int(active.sum()))
        self.n_active = int(active.sum())
        self.n_interior = int(np.sum((point_class == PointClass.INTERIOR)
                                     | (point_class == PointClass.NEAR_WALL)))
        self.n_ghost = sum(1 for lay in ghost_layer.values() if lay == 1)
        self.n_wall = int(np.sum(point_class == PointClass.WALL))
        ii, jj = np.nonzero(active)
        self.active_ij = np.stack([ii, jj], axis=1)

    def rows_of(self, kind: PointClass) -> np.ndarray:
        """Active-vector rows of all nodes of one class, sorted."""
        mask = self.point_class == kind
        return np.sort(self.active_index[mask])

    def node_values(self, f: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
        """Sample f(x, y) on the active nodes, packed in active order."""
        X, Y = self.grid.node_xy()
        i, j = self.active_ij[:, 0], self.active_ij[:, 1]
        return np.asarray(f(X[i, j], Y[i, j]), dtype=float)

    def coords_active(self) -> tuple[np.ndarray, np.ndarray]:
        X, Y = self.grid.node_xy()
        i, j = self.active_ij[:, 0], self.active_ij[:, 1]
        return X[i, j], Y[i, j]


def classify(grid: Grid, domain: LevelSetDomain) -> Classification:
    """Classify every node and number the active unknowns.

    Raises if the interface reaches the square edge or if any ghost's
    16-point upwind stencil does not fit inside the grid (too coarse for
    the shape).  Stencil nodes that fall on excluded non-ghost nodes are
    promoted to higher-layer ghosts until the stencil closure is active.
    """
    X, Y = grid.node_xy()
    phi = np.asarray(domain.phi_at(X, Y), dtype=float)
    nudge = PHI_NUDGE * grid.h
    phi = np.where(np.abs(phi) < nudge, -nudge, phi)

    n = grid.n
    fluid = phi < 0.0
    pc = np.full(phi.shape, PointClass.INACTIVE, dtype=np.int8)

    edge = np.zeros_like(fluid)
    edge[0, :] = edge[-1, :] = edge[:, 0] = edge[:, -1] = True

    # first-layer ghosts: excluded nodes with a fluid 4-neighbor
    has_fluid_neighbor = np.zeros_like(fluid)
    has_fluid_neighbor[1:, :] |= fluid[:-1, :]
    has_fluid_neighbor[:-1, :] |= fluid[1:, :]
    has_fluid_neighbor[:, 1:] |= fluid[:, :-1]
    has_fluid_neighbor[:, :-1] |= fluid[:, 1:]
    # Excluded edge nodes adjacent to fluid become ghosts like any others;
    # this happens when the interface is clipped by the square (the fluid
    # part of the edge then carries wall rows, the rest interface rows).
    ghost = (~fluid) & has_fluid_neighbor

    pc[fluid & ~edge] = PointClass.INTERIOR
    near = np.zeros_like(fluid)
    near[1, :] = near[-2, :] = True
    near[:, 1] = near[:, -2] = True
    pc[fluid & near & ~edge] = PointClass.NEAR_WALL
    pc[fluid & edge] = PointClass.WALL
    pc[ghost] = PointClass.GHOST

    frames: dict[tuple[int, int], BoundaryFrame] = {}
    ghost_layer: dict[tuple[int, int], int] = {}
    queue = [(int(i), int(j)) for i, j in zip(*np.nonzero(ghost))]
    for ij in queue:
        ghost_layer[ij] = 1

    while queue:
        next_queue: list[tuple[int, int]] = []
        for (i, j) in sorted(queue):
            layer = ghost_layer[(i, j)]
            try:
                fr = closest_boundary_point(
                    grid, domain, i, j, theta_bound=1.0 if layer == 1 else 3.0)
            except RuntimeError as exc:
                raise ValueError(
                    f"boundary frame failed for ghost ({i},{j}); grid too "
                    f"coarse for shape {domain.shape_tag!r}: {exc}") from exc
            frames[(i, j)] = fr
            for mx in range(4):
                for my in range(4):
                    ii = i + fr.sx * mx
                    jj = j + fr.sy * my
                    if not (0 <= ii <= n and 0 <= jj <= n):
                        raise ValueError(
                            f"ghost ({i},{j}): 16-point stencil exits the grid; "
                            f"grid too coarse for shape {domain.shape_tag!r}")
                    if pc[ii, jj] == PointClass.INACTIVE:
                        pc[ii, jj] = PointClass.GHOST
                        ghost_layer[(ii, jj)] = layer + 1
                        next_queue.append((ii, jj))
        if next_queue and max(ghost_layer[ij] for ij in next_queue) > 5:
            raise ValueError(
                f"ghost stencil closure keeps growing (layer > 5); grid too "
                f"coarse for shape {domain.shape_tag!r}")
        queue = next_queue

    return Classification(grid, domain, pc, phi, frames, ghost_layer)


def _project_newton(domain: LevelSetDomain, x0: float, y0: float,
                    tol: float, max_iter: int = 50) -> tuple[float, float]:
    """Damped Newton projection onto the zero set of phi."""
    x, y = x0, y0
    f = float(domain.phi_at(x, y))
    for _ in range(max_iter):
        if abs(f) <= tol:
            return x, y
        gx, gy = domain.gradient(x, y)
        g2 = gx * gx + gy * gy
        if g2 < 1e-30:
            break
        step = 1.0
        while step >= 1.0 / 64.0:
            xn = x - step * f * gx / g2
            yn = y - step * f * gy / g2
            fn = float(domain.phi_at(xn, yn))
            if abs(fn) < abs(f):
                x, y, f = xn, yn, fn
                break
            step *= 0.5
        else:
            break
    if abs(f) <= tol:
        return x, y
    raise RuntimeError(
        f"projection from ({x0:.6g},{y0:.6g}) did not converge: |phi|={abs(f):.3e}")


def _edge_crossing(domain: LevelSetDomain, grid: Grid,
                   gi: int, gj: int) -> tuple[float, float]:
    """Interface point on the nearest ghost-to-fluid grid edge (bisection);
    fallback when Newton fails or overshoots the one-cell offset bound."""
    gx, gy = grid.coordinate_of(gi, gj)
    best = None
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        ii, jj = gi + di, gj + dj
        if not (0 <= ii <= grid.n and 0 <= jj <= grid.n):
            continue
        nx_, ny_ = grid.coordinate_of(ii, jj)
        if float(domain.phi_at(nx_, ny_)) >= 0.0:
            continue
        lo, hi = 0.0, 1.0   # phi(lo side) > 0 at G, < 0 at neighbor
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            px, py = gx + mid * (nx_ - gx), gy + mid * (ny_ - gy)
            if float(domain.phi_at(px, py)) > 0.0:
                lo = mid
            else:
                hi = mid
        mid = 0.5 * (lo + hi)
        px, py = gx + mid * (nx_ - gx), gy + mid * (ny_ - gy)
        d = math.hypot(px - gx, py - gy)
        if best is None or d < best[0]:
            best = (d, px, py)
    if best is None:
        raise RuntimeError(f"ghost ({gi},{gj}) has no fluid 4-neighbor")
    return best[1], best[2]


def closest_boundary_point(grid: Grid, domain: LevelSetDomain,
                           gi: int, gj: int,
                           theta_bound: float = 1.0) -> BoundaryFrame:
    """Boundary frame of ghost node (gi, gj).

    For the circle the projection and normal are exact; for general shapes
    B comes from damped Newton on phi (|phi(B)| <= 1e-12 h) and the normal
    from the normalized gradient at B.  First-layer ghosts satisfy
    theta < 1; promoted ghosts deeper in thin features are allowed offsets
    up to `theta_bound` (< 3, so B stays inside the 16-point stencil).
    """
    gx, gy = grid.coordinate_of(gi, gj)
    h = grid.h
    tol = 1e-12 * h

    if domain.shape_tag == "circle":
        r = domain.params["radius"]
        ox, oy = domain.params["center"]
        d = math.hypot(gx - ox, gy - oy)
        if d == 0.0:
            raise RuntimeError("ghost coincides with the circle center")
        bx = ox + r * (gx - ox) / d
        by = oy + r * (gy - oy) / d
        nx_, ny_ = (ox - gx) / d, (oy - gy) / d
    else:
        try:
            bx, by = _project_newton(domain, gx, gy, tol)
        except RuntimeError:
            bx, by = _edge_crossing(domain, grid, gi, gj)
        if max(abs(bx - gx), abs(by - gy)) >= theta_bound * h:
            bx, by = _edge_crossing(domain, grid, gi, gj)
        gxn, gyn = domain.gradient(bx, by)
        gn = math.hypot(gxn, gyn)
        if gn > 1e-8:
            nx_, ny_ = gxn / gn, gyn / gn
        else:
            # degenerate gradient (e.g. near a cusp): fall back to the
            # direction from the fluid side toward the interface
            d = math.hypot(bx - gx, by - gy)
            nx_, ny_ = ((gx - bx) / d, (gy - by) / d) if d > 0 else (1.0, 0.0)

    sx = 1 if bx - gx >= 0.0 else -1
    sy = 1 if by - gy >= 0.0 else -1
    theta_x = sx * (bx - gx) / h
    theta_y = sy * (by - gy) / h
    if max(theta_x, theta_y) > theta_bound + 1e-9 or min(theta_x, theta_y) < 0.0:
        raise RuntimeError(
            f"ghost ({gi},{gj}): boundary point offset outside bound "
            f"{theta_bound} (theta=({theta_x:.3f},{theta_y:.3f}))")
    # B exactly on a grid node (nudged to the fluid side) gives theta = 1;
    # pull it infinitesimally inside the cell so the convention theta < 1
    # holds, moving B along the interface a negligible distance.
    theta_max = theta_bound - 2.0**-46
    if theta_x > theta_max:
        theta_x = theta_max
        bx = gx + sx * theta_x * h
    if theta_y > theta_max:
        theta_y = theta_max
        by = gy + sy * theta_y * h
    return BoundaryFrame(gi=gi, gj=gj, bx=bx, by=by, nx=nx_, ny=ny_,
                         sx=sx, sy=sy, theta_x=theta_x, theta_y=theta_y)
