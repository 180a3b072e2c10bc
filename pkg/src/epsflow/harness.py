"""Experiment configuration, drivers for the convergence studies, detector
probes and CPU/error comparisons, and CSV persistence.

Every driver is deterministic: identical configurations produce identical
CSV payloads (a timestamp comment line is the only varying output), and the
configuration hash is recorded in each file.

Resolution labels: the convergence tables index rows by the resolution
label N of the reference tables being reproduced; the corresponding mesh
uses `table_scale * N` cells per side of [-1, 1] (equivalently h = 1/N for
the default scale 2), and time-step labels N_ts map to t_fin / (scale N_ts)
steps.  Set table_scale = 1 to interpret labels literally.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .geometry import (
    Grid,
    PointClass,
    SHAPE_BUILDERS,
    build_grid,
    classify,
)
from .ghost import _cubic_basis
from .integrator import Integrator, evolve
from .mms import CrankNicolson, ManufacturedCase, error_norms
from .operators import (
    advection_4th_const,
    advection_4th_variable,
    constant_velocity,
    dirichlet_wall_rows,
    laplacian_4th,
    poly_cubic_velocity,
    radial_velocity,
)
from .system import SemiDiscreteSystem, build_system
from .timefactor import ConstantFactor, CosineFactor

__all__ = [
    "ExperimentConfig",
    "ConvergenceReport",
    "compute_adsorption_length",
    "convergence_space",
    "convergence_time",
    "eps_sweep",
    "detector_series",
    "cpu_pareto",
    "write_csv",
]


@dataclass
class ExperimentConfig:
    """One experiment run; all drivers consume this."""

    # domain
    a: float = -1.0
    b: float = 1.0
    shape: str = "none"
    radius: float = 0.2
    center: tuple[float, float] = (0.0, 0.0)
    # physics
    diffusivity: float = 0.02
    adsorption_length: Optional[float] = None
    delta: Optional[float] = None
    lj_phi: float = 1.0
    lj_cutoff: float = 2.0
    epsilon: float = 1e-2
    velocity: str = "poly_cubic"
    amplitude: float = 1.0
    gamma: float = 0.1
    u: float = 1.0
    time_factor: str = "cosine"
    # boundary conditions
    wall_bc: str = "dirichlet0"
    interface_bc: str = "robin"
    robin_mass: str = "identity"
    # discretization
    n: int = 160
    order: int = 3
    dt: float = 1e-3
    t_fin: float = 0.1
    dt_ref: float = 1e-5
    n_ref: int = 160
    table_scale: int = 2
    # manufactured solution
    sigma: float = 0.1
    center1: tuple[float, float] = (0.0, 0.0)
    center2: Optional[tuple[float, float]] = None
    # sweeps
    n_values: Optional[Sequence[int]] = None
    nts_values: Optional[Sequence[int]] = None
    eps_values: Optional[Sequence[float]] = None
    dt_values: Optional[Sequence[float]] = None
    # outputs
    detector: tuple[float, float] = (0.35, 0.35)
    stride: int = 1

    def validate(self) -> None:
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.dt <= 0.0 or self.t_fin <= 0.0:
            raise ValueError("dt and t_fin must be positive")
        if self.order not in (1, 2, 3):
            raise ValueError(f"order must be 1, 2 or 3, got {self.order}")
        if self.shape not in SHAPE_BUILDERS:
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.shape != "none" and self.n < 8:
            raise ValueError("need n >= 8 when a shape is present")
        if self.velocity not in ("none", "constant", "poly_cubic", "radial"):
            raise ValueError(f"unknown velocity kind {self.velocity!r}")

    def hash(self) -> str:
        payload = json.dumps(dataclasses.asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    @classmethod
    def from_file(cls, path: str, overrides: Optional[dict] = None) -> "ExperimentConfig":
        with open(path) as fh:
            data = json.load(fh)
        if overrides:
            data.update(overrides)
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        tupled = {}
        for key, value in data.items():
            if isinstance(value, list) and key in ("center", "center1", "center2", "detector"):
                tupled[key] = tuple(value)
            else:
                tupled[key] = value
        cfg = cls(**tupled)
        cfg.validate()
        return cfg


@dataclass
class ConvergenceReport:
    axis_name: str
    axis: list
    errors: dict
    slopes: dict
    runtimes: list
    config_hash: str
    meta: dict = field(default_factory=dict)


def fit_slope(axis: Sequence[float], errors: Sequence[float],
              n_points: Optional[int] = None) -> float:
    """Least-squares log-log slope over the last n_points (>= 3)."""
    x = np.log(np.asarray(axis, dtype=float))
    y = np.log(np.maximum(np.asarray(errors, dtype=float), 1e-300))
    k = len(x) if n_points is None else max(3, min(n_points, len(x)))
    return float(np.polyfit(x[-k:], y[-k:], 1)[0])


def compute_adsorption_length(delta: float, lj_phi: float = 1.0,
                              lj_cutoff: float = 2.0) -> float:
    """Adsorption length from the nondimensional Lennard-Jones layer:
    M = delta * int_0^{L+1} exp(-phi (z^-12 - 2 z^-6)) dz.

    The integrand vanishes smoothly at 0 (the repulsive wall sends the
    exponent to -inf); adaptive quadrature is cross-checked against a
    composite Gauss-Legendre rule to 1e-10 relative.
    """
    if delta <= 0.0 or lj_cutoff <= 0.0:
        raise ValueError("delta and the cutoff must be positive")

    if lj_phi < 0.0:
        raise ValueError("the well depth ratio must be nonnegative")

    def integrand(z):
        z = np.asarray(z, dtype=float)
        if lj_phi == 0.0:
            return np.ones_like(z)
        # the repulsive wall drives the exponent to -inf as z -> 0+, so the
        # integrand vanishes there; float semantics give exactly that
        with np.errstate(divide="ignore", over="ignore", under="ignore"):
            out = np.exp(-lj_phi * (z**-12.0 - 2.0 * z**-6.0))
        return np.where(z == 0.0, 0.0, out)

    hi = lj_cutoff + 1.0
    val, err = quad(integrand, 0.0, hi, points=[1.0], limit=200)
    nodes, weights = np.polynomial.legendre.leggauss(48)
    edges = np.linspace(0.0, hi, 64)
    total = 0.0
    for lo, up in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + up), 0.5 * (up - lo)
        total += half * float(weights @ integrand(mid + half * nodes))
    if abs(total - val) > 1e-10 * max(1.0, abs(val)):
        raise RuntimeError(
            f"adsorption-length quadratures disagree: {val!r} vs {total!r}")
    return delta * val


def _resolve_adsorption_length(cfg: ExperimentConfig) -> Optional[float]:
    if cfg.interface_bc != "robin" or cfg.shape == "none":
        return None
    if cfg.adsorption_length is not None:
        return cfg.adsorption_length
    if cfg.delta is None:
        raise ValueError("robin interface needs adsorption_length or delta")
    return compute_adsorption_length(cfg.delta, cfg.lj_phi, cfg.lj_cutoff)


def _velocity_field(cfg: ExperimentConfig):
    if cfg.velocity == "none":
        return None
    if cfg.velocity == "constant":
        return constant_velocity(cfg.u)
    if cfg.velocity == "poly_cubic":
        return poly_cubic_velocity(cfg.amplitude)
    return radial_velocity(cfg.amplitude, cfg.gamma)


def _time_factor(cfg: ExperimentConfig, epsilon: Optional[float] = None):
    if cfg.time_factor == "constant" or cfg.velocity in ("none",):
        return ConstantFactor()
    if cfg.time_factor == "cosine":
        return CosineFactor(cfg.epsilon if epsilon is None else epsilon)
    raise ValueError(f"unknown time factor {cfg.time_factor!r}")


def _build(cfg: ExperimentConfig, n_cells: int) -> SemiDiscreteSystem:
    grid = build_grid(n_cells, cfg.a, cfg.b)
    domain = SHAPE_BUILDERS[cfg.shape](radius=cfg.radius, center=cfg.center)
    return build_system(
        grid, domain, cfg.diffusivity, velocity=_velocity_field(cfg),
        wall_bc=cfg.wall_bc, interface_bc=cfg.interface_bc,
        adsorption_length=_resolve_adsorption_length(cfg),
        robin_mass=cfg.robin_mass)


def _initial_field(cfg: ExperimentConfig, system: SemiDiscreteSystem) -> np.ndarray:
    s2 = 2.0 * cfg.sigma**2
    cx, cy = cfg.center1
    return system.initial_field(
        lambda x, y: np.exp(-((x - cx)**2 + (y - cy)**2) / s2))


def _solution_rows(system: SemiDiscreteSystem) -> np.ndarray:
    cls = system.cls
    return np.sort(np.concatenate([
        cls.rows_of(PointClass.INTERIOR),
        cls.rows_of(PointClass.NEAR_WALL),
        cls.rows_of(PointClass.WALL),
    ]))


# ---------------------------------------------------------------------------
# cross-grid sampling
# ---------------------------------------------------------------------------

def sample_field(grid: Grid, cls, field: np.ndarray,
                 xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bicubic samples of an active-node field at arbitrary fluid points.

    Uses the 4x4 node block around each point, shifted when necessary so
    that all 16 nodes are active (ghost values carry the smooth extension,
    so blocks may overlap the interface by one layer).
    """
    h, a, n = grid.h, grid.a, grid.n
    out = np.empty(xs.shape, dtype=float)
    idx = cls.active_index
    for k, (x, y) in enumerate(zip(xs, ys)):
        px = (x - a) / h
        py = (y - a) / h
        i0 = min(max(int(math.floor(px)) - 1, 0), n - 3)
        j0 = min(max(int(math.floor(py)) - 1, 0), n - 3)
        block = None
        for i_try in _shift_candidates(i0, int(math.floor(px)), n):
            for j_try in _shift_candidates(j0, int(math.floor(py)), n):
                sub = idx[i_try:i_try + 4, j_try:j_try + 4]
                if np.all(sub >= 0):
                    block = (i_try, j_try, sub)
                    break
            if block:
                break
        if block is None:
            raise ValueError(f"no active 4x4 interpolation block around "
                             f"({x:.4f},{y:.4f})")
        i_b, j_b, sub = block
        lx, _, _ = _cubic_basis(px - i_b)
        ly, _, _ = _cubic_basis(py - j_b)
        out[k] = lx @ field[sub] @ ly
    return out


def _shift_candidates(pref: int, cell: int, n: int):
    lo = max(0, cell - 3)
    hi = min(n - 3, cell)
    cands = [pref] + [s for s in range(hi, lo - 1, -1) if s != pref]
    return [s for s in cands if lo <= s <= hi]


def compare_on_coarse(coarse_sys: SemiDiscreteSystem, coarse_field: np.ndarray,
                      fine_sys: SemiDiscreteSystem, fine_field: np.ndarray):
    """Relative (L1, L2, Linf) errors of a coarse run against a fine
    reference, measured on the coarse solution nodes."""
    rows = _solution_rows(coarse_sys)
    xs, ys = coarse_sys.cls.coords_active()
    xs, ys = xs[rows], ys[rows]
    ratio = fine_sys.grid.n / coarse_sys.grid.n
    if abs(ratio - round(ratio)) < 1e-12:
        r = round(ratio)
        ii = coarse_sys.cls.active_ij[rows, 0] * r
        jj = coarse_sys.cls.active_ij[rows, 1] * r
        fine_idx = fine_sys.cls.active_index[ii, jj]
        if np.all(fine_idx >= 0):
            ref_vals = fine_field[fine_idx]
            return error_norms(coarse_field[rows], ref_vals)
    ref_vals = sample_field(fine_sys.grid, fine_sys.cls, fine_field, xs, ys)
    return error_norms(coarse_field[rows], ref_vals)


# ---------------------------------------------------------------------------
# convergence in space
# ---------------------------------------------------------------------------

def _cn_mms_error(cfg: ExperimentConfig, n_cells: int):
    """Forced Crank-Nicolson run against the manufactured solution."""
    grid = build_grid(n_cells, cfg.a, cfg.b)
    cls = classify(grid, SHAPE_BUILDERS["none"]())
    op = laplacian_4th(grid, cls, cfg.diffusivity)
    if cfg.velocity == "constant":
        op = op + advection_4th_const(grid, cls, cfg.u)
        case_velocity = "constant"
    elif cfg.velocity == "poly_cubic":
        op = op + advection_4th_variable(grid, cls, poly_cubic_velocity(cfg.amplitude))
        case_velocity = "poly_cubic"
    elif cfg.velocity == "none":
        case_velocity = "none"
    else:
        raise ValueError(
            "space study with exact solution needs constant/poly_cubic/none velocity")
    case = ManufacturedCase(sigma=cfg.sigma, center1=cfg.center1,
                            center2=cfg.center2, diffusivity=cfg.diffusivity,
                            velocity=case_velocity, u=cfg.u,
                            amplitude=cfg.amplitude)
    wr = dirichlet_wall_rows(
        grid, cls,
        None if cfg.wall_bc == "dirichlet0" else
        (lambda x, y, t: case.exact(x, y, t)))
    X, Y = cls.coords_active()
    g1 = case._gaussian(X, Y, case.center1)
    g2 = case._gaussian(X, Y, case.center2)
    lap1 = case.exact_laplacian(X, Y, 0.0)            # = Lap(G1)
    lap2 = case.exact_laplacian(X, Y, np.pi / 2.0)    # = Lap(G2)
    if case_velocity == "constant":
        cx1, cy1 = case.exact_grad(X, Y, 0.0)
        adv1 = case.u * (cx1 + cy1)
        cx2, cy2 = case.exact_grad(X, Y, np.pi / 2.0)
        adv2 = case.u * (cx2 + cy2)
    elif case_velocity == "poly_cubic":
        a_ = case.amplitude
        div = a_ * (3.0 * X**2 + 3.0 * Y**2)
        cx1, cy1 = case.exact_grad(X, Y, 0.0)
        adv1 = div * g1 + a_ * (X**3 * cx1 + Y**3 * cy1)
        cx2, cy2 = case.exact_grad(X, Y, np.pi / 2.0)
        adv2 = div * g2 + a_ * (X**3 * cx2 + Y**3 * cy2)
    else:
        adv1 = adv2 = np.zeros_like(g1)
    d = cfg.diffusivity

    def forcing(t: float) -> np.ndarray:
        ct, st = math.cos(t), math.sin(t)
        return (-st * g1 + ct * g2
                - ct * (d * lap1 + adv1) - st * (d * lap2 + adv2))

    cn = CrankNicolson(op, cfg.dt_ref, constraint_rows=wr.rows,
                       constraint_matrix=wr.matrix, constraint_rhs=wr.rhs,
                       forcing=forcing)
    c = cn.run(case.exact(X, Y, 0.0), 0.0, round(cfg.t_fin / cfg.dt_ref))
    return error_norms(c, case.exact(X, Y, cfg.t_fin))


def convergence_space(cfg: ExperimentConfig) -> ConvergenceReport:
    """Spatial accuracy study.

    Square domains run the forced Crank-Nicolson scheme against the
    manufactured solution (the table reproduction); domains with a shape
    run the order-p scheme at dt_ref on every grid and compare against the
    n_ref reference on the coarse solution nodes.
    """
    cfg.validate()
    mode = "exact" if cfg.shape == "none" else "reference"
    n_values = list(cfg.n_values or ([10, 20, 40, 80, 160] if mode == "exact"
                                     else [30, 40, 60, 80, 120]))
    scale = cfg.table_scale
    errors = {"e1": [], "e2": [], "einf": []}
    axis, runtimes = [], []
    meta = {"mode": mode, "table_scale": scale}
    ref_data = None
    if mode == "reference":
        t0 = time.time()
        ref_sys = _build(cfg, scale * cfg.n_ref)
        g = _time_factor(cfg)
        c0 = _initial_field(cfg, ref_sys)
        steps = round(cfg.t_fin / cfg.dt_ref)
        ref_field = evolve(ref_sys, cfg.order, g, cfg.dt_ref, steps, c0)
        ref_data = (ref_sys, ref_field)
        meta["reference_seconds"] = round(time.time() - t0, 3)
        meta["n_ref"] = cfg.n_ref

    for n_label in n_values:
        t0 = time.time()
        n_cells = scale * n_label
        if mode == "exact":
            e1, e2, einf = _cn_mms_error(cfg, n_cells)
        else:
            try:
                sys_n = _build(cfg, n_cells)
            except ValueError as exc:
                meta[f"skipped_n_{n_label}"] = str(exc)
                continue
            g = _time_factor(cfg)
            c0 = _initial_field(cfg, sys_n)
            steps = round(cfg.t_fin / cfg.dt_ref)
            sol = evolve(sys_n, cfg.order, g, cfg.dt_ref, steps, c0)
            e1, e2, einf = compare_on_coarse(sys_n, sol, *ref_data)
        axis.append(n_label)
        errors["e1"].append(e1)
        errors["e2"].append(e2)
        errors["einf"].append(einf)
        runtimes.append(time.time() - t0)

    slopes = {key: -fit_slope(axis, vals) for key, vals in errors.items() if len(vals) >= 3}
    return ConvergenceReport(axis_name="N", axis=axis, errors=errors,
                             slopes=slopes, runtimes=runtimes,
                             config_hash=cfg.hash(), meta=meta)


# ---------------------------------------------------------------------------
# convergence in time
# ---------------------------------------------------------------------------

def _time_study_for_eps(cfg: ExperimentConfig, eps: float,
                        nts_values: Sequence[int]):
    scale = cfg.table_scale
    sys_ = _build(cfg, cfg.n)
    g = CosineFactor(eps) if cfg.time_factor == "cosine" else ConstantFactor()
    c0 = _initial_field(cfg, sys_)
    rows = _solution_rows(sys_)
    ref_steps = round(cfg.t_fin / cfg.dt_ref)
    # the reference always uses the order-3 scheme on the same grid
    ref = evolve(sys_, 3, g, cfg.dt_ref, ref_steps, c0)
    errs, runtimes = [], []
    for nts in nts_values:
        t0 = time.time()
        steps = scale * nts
        dt = cfg.t_fin / steps
        sol = evolve(sys_, cfg.order, g, dt, steps, c0)
        errs.append(float(np.linalg.norm((sol - ref)[rows])
                          / np.linalg.norm(ref[rows])))
        runtimes.append(time.time() - t0)
    return errs, runtimes


def convergence_time(cfg: ExperimentConfig) -> ConvergenceReport:
    """Temporal accuracy study: per-epsilon self-convergence against the
    dt_ref reference of the same order on the same grid."""
    cfg.validate()
    nts_values = list(cfg.nts_values or [10 * 2**k for k in range(7)])
    eps_values = list(cfg.eps_values or [cfg.epsilon])
    errors: dict = {}
    runtimes = []
    for eps in eps_values:
        errs, rts = _time_study_for_eps(cfg, eps, nts_values)
        errors[f"eps={eps:g}"] = errs
        runtimes.append(sum(rts))
    dts = [cfg.t_fin / (cfg.table_scale * nts) for nts in nts_values]
    slopes = {key: fit_slope(dts, vals, n_points=len(vals))
              for key, vals in errors.items()}
    return ConvergenceReport(axis_name="N_ts", axis=nts_values, errors=errors,
                             slopes=slopes, runtimes=runtimes,
                             config_hash=cfg.hash(),
                             meta={"dt": dts, "n": cfg.n,
                                   "table_scale": cfg.table_scale})


def eps_sweep(cfg: ExperimentConfig, mode: str = "time") -> ConvergenceReport:
    """Error as a function of epsilon at fixed dt values (mode 'time') or
    fixed grids (mode 'space', reference comparison on a shaped domain)."""
    cfg.validate()
    eps_values = list(cfg.eps_values or [10.0**-k for k in range(1, 7)])
    if mode == "time":
        nts_values = list(cfg.nts_values or [10, 40, 160])
        errors: dict = {f"N_ts={n}": [] for n in nts_values}
        runtimes = []
        for eps in eps_values:
            errs, rts = _time_study_for_eps(cfg, eps, nts_values)
            for n, e in zip(nts_values, errs):
                errors[f"N_ts={n}"].append(e)
            runtimes.append(sum(rts))
        meta = {"mode": "time", "nts_values": nts_values}
    elif mode == "space":
        n_values = list(cfg.n_values or [30, 40, 60, 80])
        errors = {f"N={n}": [] for n in n_values}
        runtimes = []
        for eps in eps_values:
            sub = dataclasses.replace(cfg, eps_values=None, epsilon=eps,
                                      n_values=n_values)
            rep = convergence_space(sub)
            for n, e in zip(rep.axis, rep.errors["e2"]):
                errors[f"N={n}"].append(e)
            runtimes.append(sum(rep.runtimes))
        meta = {"mode": "space", "n_values": n_values}
    else:
        raise ValueError(f"unknown eps-sweep mode {mode!r}")
    return ConvergenceReport(axis_name="epsilon", axis=eps_values,
                             errors=errors, slopes={}, runtimes=runtimes,
                             config_hash=cfg.hash(), meta=meta)


# ---------------------------------------------------------------------------
# detector and CPU comparisons
# ---------------------------------------------------------------------------

def detector_series(cfg: ExperimentConfig):
    """Concentration time series at the detector point P (bicubic samples);
    returns (times, values)."""
    cfg.validate()
    sys_ = _build(cfg, cfg.n)
    px, py = cfg.detector
    phi_p = float(sys_.cls.domain.phi_at(px, py))
    if phi_p >= 0.0:
        raise ValueError(f"detector {cfg.detector} lies inside the obstacle")
    g = _time_factor(cfg)
    c0 = _initial_field(cfg, sys_)
    steps = round(cfg.t_fin / cfg.dt)
    times, values = [], []
    xs = np.array([px])
    ys = np.array([py])

    def cb(k, t, c):
        if k % cfg.stride == 0 or k == steps:
            times.append(t)
            values.append(float(sample_field(sys_.grid, sys_.cls, c, xs, ys)[0]))

    evolve(sys_, cfg.order, g, cfg.dt, steps, c0, callback=cb)
    return np.array(times), np.array(values)


def cpu_pareto(cfg: ExperimentConfig):
    """(order, dt, error, seconds) rows for orders 2 and 3 over a dt list.

    The error is measured against an order-3 reference at dt_ref on the
    same grid; wall time covers assembly, factorization and stepping.
    """
    cfg.validate()
    dt_values = list(cfg.dt_values or
                     [1/5, 1/10, 1/20, 1/30, 1/40, 1/50, 1/60, 1/70, 1/80,
                      1/90, 1/100])
    sys_ = _build(cfg, cfg.n)
    g = _time_factor(cfg)
    c0 = _initial_field(cfg, sys_)
    rows = _solution_rows(sys_)
    ref = evolve(sys_, 3, g, cfg.dt_ref, round(cfg.t_fin / cfg.dt_ref), c0)
    ref_norm = np.linalg.norm(ref[rows])
    out = []
    for order in (2, 3):
        for dt in dt_values:
            steps = round(cfg.t_fin / dt)
            t0 = time.time()
            sol = evolve(sys_, order, g, cfg.t_fin / steps, steps, c0)
            seconds = time.time() - t0
            err = float(np.linalg.norm((sol - ref)[rows]) / ref_norm)
            out.append((order, cfg.t_fin / steps, err, seconds))
    return out


# ---------------------------------------------------------------------------
# CSV persistence
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(path: str, header: Sequence[str], rows, config_hash: str,
              meta: Optional[dict] = None) -> None:
    """UTF-8 CSV with a hash/metadata comment preamble and 17-digit floats."""
    lines = [f"# config_hash={config_hash}"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key}={value}")
    lines.append(f"# written_unix={time.time():.0f}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def report_rows(report: ConvergenceReport):
    """Flatten a ConvergenceReport into CSV header and rows."""
    keys = list(report.errors)
    header = [report.axis_name] + keys
    rows = []
    for i, val in enumerate(report.axis):
        rows.append([val] + [report.errors[k][i] for k in keys])
    return header, rows
