"""Implicit step operators of orders 1-3 and the time loop.

One step of order p solves  A^p c^{n+1} = mass c^n  (with constraint rows
overwritten), where

  A^1 = mass - dt L - m0 Q
  A^2 = A^1 + dt^2/2 L^2 + w01 LQ + w10 QL + m0^2/2 Q^2
  A^3 = A^2 - (dt^3/6 L^3 + w02 L^2Q + w11 LQL + tLQQ LQ^2
               + w20 QL^2 + tQLQ QLQ + tQQL Q^2L + m0^3/6 Q^3)

with the scalar step moments of g supplied in closed form, which is what
makes the accuracy of every order uniform in the oscillation period.
Constraint rows are excluded from all products (L and Q are already zero
there) and re-imposed on A afterwards, so Dirichlet rows are identical in
A^1, A^2 and A^3.

Per-step linear algebra: the step operators of a run differ only through a
handful of scalars, and whenever t^n mod eps cycles (detected up front)
the factorized operators are cached and reused.  Otherwise the solve falls
back to a Krylov iteration whose matvec composes the cached L/Q products,
preconditioned by the factorization of the first step's operator when one
is affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .system import SemiDiscreteSystem
from .timefactor import StepIntegrals, TimeFactor

__all__ = ["product_coefficients", "assemble_step_matrix", "Integrator", "evolve"]

_ORDER2_KEYS = ("LL", "LQ", "QL", "QQ")
_ORDER3_KEYS = ("LLL", "LLQ", "LQL", "LQQ", "QLL", "QLQ", "QQL", "QQQ")


def product_coefficients(order: int, si: StepIntegrals) -> dict[str, float]:
    """Scalar multiplying each operator word in A^order."""
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3, got {order}")
    dt = si.dt
    coeff = {"L": -dt, "Q": -si.m0}
    if order >= 2:
        coeff.update({
            "LL": 0.5 * dt * dt,
            "LQ": si.dLQ,
            "QL": si.dQL,
            "QQ": si.dQQ,
        })
    if order >= 3:
        coeff.update({
            "LLL": -dt**3 / 6.0,
            "LLQ": -si.tLLQ,
            "LQL": -si.tLQL,
            "LQQ": -si.tLQQ,
            "QLL": -si.tQLL,
            "QLQ": -si.tQLQ,
            "QQL": -si.tQQL,
            "QQQ": -si.tQQQ,
        })
    return coeff


def _products(L, Q, order: int) -> dict:
    """Operator words appearing in A^order (L/Q may be sparse or dense)."""
    words: dict = {"L": L, "Q": Q}
    if order >= 2:
        words["LL"] = L @ L
        if Q is not None:
            words["LQ"] = L @ Q
            words["QL"] = Q @ L
            words["QQ"] = Q @ Q
    if order >= 3:
        words["LLL"] = words["LL"] @ L
        if Q is not None:
            words["LLQ"] = words["LL"] @ Q
            words["LQL"] = words["LQ"] @ L
            words["LQQ"] = words["LQ"] @ Q
            words["QLL"] = words["QL"] @ L
            words["QLQ"] = words["QL"] @ Q
            words["QQL"] = words["QQ"] @ L
            words["QQQ"] = words["QQ"] @ Q
    return words


def assemble_step_matrix(order: int, L, Q, si: StepIntegrals, mass=None,
                         products: Optional[dict] = None):
    """Explicit step operator A^order (works for sparse and dense inputs)."""
    coeff = product_coefficients(order, si)
    words = products if products is not None else _products(L, Q, order)
    if mass is None:
        n = L.shape[0]
        mass = sp.identity(n, format="csr") if sp.issparse(L) else np.eye(n)
    A = mass.copy()
    for key, c in coeff.items():
        if key not in words or words[key] is None:
            continue
        A = A + c * words[key]
    return A


def _phase_key(t: float, eps: float) -> float:
    return math.fmod(t, eps) / eps


class _LinearSolver:
    """Direct factorization with residual reporting."""

    def __init__(self, A: sp.csr_matrix, order: int, dt: float):
        try:
            self.lu = spla.splu(A.tocsc())
        except RuntimeError as exc:
            raise RuntimeError(
                f"step operator (order {order}, dt={dt:g}) is singular or "
                f"could not be factorized: {exc}") from exc
        self.A = A

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self.lu.solve(rhs)


class Integrator:
    """Advances one semi-discrete system with the order-p step operator.

    The step size is fixed; per-step work is a linear solve whose operator
    depends on t^n only through the step moments of g.
    """

    def __init__(self, system: SemiDiscreteSystem, order: int, g: TimeFactor,
                 dt: float, t0: float = 0.0, n_steps: Optional[int] = None,
                 cache_cap: int = 128, products_limit: int = 4_000_000,
                 check_residual: bool = False):
        if dt <= 0.0:
            raise ValueError(f"dt must be positive, got {dt}")
        if order not in (1, 2, 3):
            raise ValueError(f"order must be 1, 2 or 3, got {order}")
        self.system = system
        self.order = int(order)
        self.g = g
        self.dt = float(dt)
        self.t0 = float(t0)
        self.check_residual = check_residual
        self._res_limit = 1e-10

        n = system.n
        L, Q = system.L, system.Q
        # keep products affordable: the deepest word costs roughly
        # nnz(L) * width(L) ** (order - 1) entries
        will_fit = (self.order == 1
                    or L.nnz * (12 ** (self.order - 1)) <= products_limit * 12)
        self.products = _products(L, Q, self.order) if will_fit else None

        self.cycle = self._detect_cycle(cache_cap, n_steps)
        self.cache_cap = cache_cap
        self._lu_cache: dict[int, _LinearSolver] = {}
        self._pre: Optional[_LinearSolver] = None
        self._n_solves = 0
        # direct solves are cheap on small systems; everywhere else start
        # with warm-started Krylov and escalate only if iterations degrade
        self._mode = "lu" if (self.cycle is not None and n <= 4000) else "iter"
        self._recent_iters: list[int] = []

    # -- operator pieces ---------------------------------------------------

    def integrals(self, step_index: int) -> StepIntegrals:
        a = self.t0 + step_index * self.dt
        b = self.t0 + (step_index + 1) * self.dt
        return self.g.integrals(a, b)

    def _detect_cycle(self, cap: int, n_steps: Optional[int]) -> Optional[int]:
        eps = getattr(self.g, "epsilon", None)
        if type(self.g).__name__ == "ConstantFactor":
            return 1
        if eps is None:
            return None
        p0 = _phase_key(self.t0, eps)
        limit = cap if n_steps is None else min(cap, n_steps)
        for c in range(1, limit + 1):
            pc = _phase_key(self.t0 + c * self.dt, eps)
            d = abs(pc - p0)
            if min(d, 1.0 - d) < 1e-9:
                return c
        return None

    def assemble(self, si: StepIntegrals) -> sp.csr_matrix:
        """Explicit A with constraint rows imposed."""
        sys_ = self.system
        if self.products is not None:
            A = assemble_step_matrix(self.order, sys_.L, sys_.Q, si,
                                     mass=sys_.mass, products=self.products)
        else:
            A = assemble_step_matrix(self.order, sys_.L, sys_.Q, si,
                                     mass=sys_.mass)
        if sys_.constraint_rows.size:
            keep = np.ones(sys_.n)
            keep[sys_.constraint_rows] = 0.0
            A = (sp.diags(keep) @ A + sys_.constraint_matrix).tocsr()
        return A.tocsr()

    def matvec(self, si: StepIntegrals, x: np.ndarray) -> np.ndarray:
        """A @ x by composing L/Q applications (no explicit product fill)."""
        sys_ = self.system
        L, Q = sys_.L, sys_.Q
        coeff = product_coefficients(self.order, si)
        y = sys_.mass @ x
        lx = L @ x
        y += coeff["L"] * lx
        qx = Q @ x if Q is not None else None
        if qx is not None:
            y += coeff["Q"] * qx
        if self.order >= 2:
            llx = L @ lx
            y += coeff["LL"] * llx
            if qx is not None:
                lqx = L @ qx
                qlx = Q @ lx
                qqx = Q @ qx
                y += coeff["LQ"] * lqx + coeff["QL"] * qlx + coeff["QQ"] * qqx
            if self.order >= 3:
                y += coeff["LLL"] * (L @ llx)
                if qx is not None:
                    y += (coeff["LLQ"] * (L @ lqx) + coeff["LQL"] * (L @ qlx)
                          + coeff["LQQ"] * (L @ qqx) + coeff["QLL"] * (Q @ llx)
                          + coeff["QLQ"] * (Q @ lqx) + coeff["QQL"] * (Q @ qlx)
                          + coeff["QQQ"] * (Q @ qqx))
        if sys_.constraint_rows.size:
            y[sys_.constraint_rows] = (sys_.constraint_matrix @ x)[sys_.constraint_rows]
        return y

    # -- stepping ----------------------------------------------------------

    def _solver_for(self, step_index: int, si: StepIntegrals):
        if self._mode == "lu" and self.cycle is not None:
            key = step_index % self.cycle
            solver = self._lu_cache.get(key)
            if solver is None:
                solver = _LinearSolver(self.assemble(si), self.order, self.dt)
                self._lu_cache[key] = solver
            return solver
        return None

    def _escalate(self, si: StepIntegrals) -> None:
        """Krylov iterations are dragging: cache factorizations per phase if
        the phase cycle is short, otherwise keep one fixed preconditioner."""
        self._recent_iters.clear()
        if self.cycle is not None and self.cycle <= self.cache_cap:
            self._mode = "lu"
        elif self._pre is None and self.system.n <= 120_000:
            self._pre = _LinearSolver(self.assemble(si), self.order, self.dt)

    def step(self, c: np.ndarray, step_index: int) -> np.ndarray:
        si = self.integrals(step_index)
        sys_ = self.system
        rhs = sys_.mass @ c
        if sys_.constraint_rows.size:
            t_next = self.t0 + (step_index + 1) * self.dt
            rhs[sys_.constraint_rows] = sys_.constraint_rhs(t_next)

        solver = self._solver_for(step_index, si)
        if solver is not None:
            out = solver.solve(rhs)
        else:
            out = self._iterative_solve(si, rhs, x0=c)
        self._n_solves += 1

        if self.check_residual:
            res = np.linalg.norm(self.matvec(si, out) - rhs)
            ref = max(np.linalg.norm(c), 1e-300)
            if res > self._res_limit * ref:
                raise RuntimeError(
                    f"step residual {res:.2e} exceeds {self._res_limit:.0e} * "
                    f"|c^n| at order {self.order}, dt={self.dt:g}")
        if not np.all(np.isfinite(out)):
            raise RuntimeError(
                f"non-finite solution at order {self.order}, dt={self.dt:g}")
        return out

    def _iterative_solve(self, si: StepIntegrals, rhs: np.ndarray,
                         x0: np.ndarray) -> np.ndarray:
        n = self.system.n
        op = spla.LinearOperator((n, n), matvec=lambda v: self.matvec(si, v))
        M = None
        if self._pre is not None:
            M = spla.LinearOperator((n, n), matvec=self._pre.solve)
        norm_rhs = np.linalg.norm(rhs)
        atol = 1e-13 * max(norm_rhs, 1e-300)
        iters = 0

        def count(_):
            nonlocal iters
            iters += 1

        x, info = spla.gmres(op, rhs, x0=x0, M=M, rtol=1e-13, atol=atol,
                             restart=40, maxiter=400, callback=count,
                             callback_type="legacy")
        if info != 0:
            res = np.linalg.norm(self.matvec(si, x) - rhs)
            if res > 1e-10 * max(norm_rhs, 1e-300):
                # stalled (e.g. badly scaled constraint rows): factorize once
                # and retry before giving up
                if self._pre is None and self.system.n <= 250_000:
                    self._pre = _LinearSolver(self.assemble(si), self.order,
                                              self.dt)
                    M = spla.LinearOperator((self.system.n, self.system.n),
                                            matvec=self._pre.solve)
                    x, info = spla.gmres(op, rhs, x0=x0, M=M, rtol=1e-13,
                                         atol=atol, restart=40, maxiter=400)
                    res = np.linalg.norm(self.matvec(si, x) - rhs)
                if res > 1e-10 * max(norm_rhs, 1e-300):
                    raise RuntimeError(
                        f"Krylov solve failed (info={info}, residual={res:.2e}) "
                        f"at order {self.order}, dt={self.dt:g}")
        self._recent_iters.append(iters)
        if len(self._recent_iters) >= 8:
            if np.mean(self._recent_iters[-8:]) > 30:
                self._escalate(si)
        return x

    def run(self, c0: np.ndarray, n_steps: int,
            callback: Optional[Callable[[int, float, np.ndarray], None]] = None
            ) -> np.ndarray:
        c = np.asarray(c0, dtype=float).copy()
        if callback is not None:
            callback(0, self.t0, c)
        for k in range(n_steps):
            c = self.step(c, k)
            if callback is not None:
                callback(k + 1, self.t0 + (k + 1) * self.dt, c)
        return c


def evolve(system: SemiDiscreteSystem, order: int, g: TimeFactor, dt: float,
           n_steps: int, c0: np.ndarray, t0: float = 0.0,
           callback=None, **kwargs) -> np.ndarray:
    """Advance c0 by n_steps steps of size dt; returns the final field."""
    if n_steps == 0:
        return np.asarray(c0, dtype=float).copy()
    integ = Integrator(system, order, g, dt, t0=t0, n_steps=n_steps, **kwargs)
    return integ.run(c0, n_steps, callback=callback)
