"""Scalar time factor g(t/eps) and exact evaluation of its step integrals.

The implicit step operators of orders 1..3 need a handful of scalar moments
of g over each step [a, b]: the plain integral, first/second polynomial
moments, and the nested simplex integrals that multiply the operator
products.  All of them are evaluated in closed form here; quadrature is
never used on the production path, which is what keeps the accuracy of the
schemes independent of the oscillation period.

A composite Gauss-Legendre oracle (`quadrature_oracle`) recomputes any of
the moments from the nested-integral definitions, resolving the oscillation
scale explicitly.  It exists for verification only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TimeFactor",
    "ConstantFactor",
    "CosineFactor",
    "StepIntegrals",
    "integrals_for_step",
    "quadrature_oracle",
    "INTEGRAL_NAMES",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class StepIntegrals:
    """Exact moments of g over one step [a, b], dt = b - a.

    Naming: `m0` is the plain integral of g; `wIJ` is the moment with
    weight (b-s)^I (s-a)^J / (I! J!)-style normalization spelled out below;
    the `t???` fields are the triple simplex integrals, letters L/Q telling
    whether each nesting level carries a g factor (Q) or not (L).

      m0   = int g(s) ds
      w10  = int (b-s) g(s) ds
      w01  = int (s-a) g(s) ds
      w20  = 1/2 int (b-s)^2 g(s) ds
      w11  = int (b-s)(s-a) g(s) ds
      w02  = 1/2 int (s-a)^2 g(s) ds
      dQQ  = int g(s) int_s^b g                      (= m0^2 / 2)
      tLQQ = int int_s^b g(sigma) int_sigma^b g
      tQLQ = int g(s) int_s^b int_sigma^b g(rho)
      tQQL = int g(s) int_s^b (b-sigma) g(sigma)
      tQQQ = int g int g int g over the simplex      (= m0^3 / 6)

    The double/triple integrals without their own closed-form field reduce
    by Fubini to the moments above: dLQ = w01, dQL = w10, tLLQ = w02,
    tLQL = w11, tQLL = w20.
    """

    dt: float
    m0: float
    w10: float
    w01: float
    w20: float
    w11: float
    w02: float
    dQQ: float
    tLQQ: float
    tQLQ: float
    tQQL: float
    tQQQ: float

    @property
    def dLQ(self) -> float:
        return self.w01

    @property
    def dQL(self) -> float:
        return self.w10

    @property
    def tLLQ(self) -> float:
        return self.w02

    @property
    def tLQL(self) -> float:
        return self.w11

    @property
    def tQLL(self) -> float:
        return self.w20


INTEGRAL_NAMES = (
    "m0", "w10", "w01", "w20", "w11", "w02",
    "dLQ", "dQL", "dQQ",
    "tLLQ", "tLQL", "tLQQ", "tQLL", "tQLQ", "tQQL", "tQQQ",
)


class TimeFactor:
    """Base class: a 1-periodic-in-(t/eps) scalar factor with exact moments.

    Subclasses must provide `__call__` (vectorized) and `integrals`.  New
    kinds are admissible only if every `StepIntegrals` field has a closed
    form; otherwise the epsilon-uniformity of the step operators is lost.
    """

    epsilon: float

    def __call__(self, t):
        raise NotImplementedError

    def integrals(self, a: float, b: float) -> StepIntegrals:
        raise NotImplementedError


class ConstantFactor(TimeFactor):
    """g identically 1 (non-oscillatory velocity)."""

    def __init__(self) -> None:
        self.epsilon = 1.0

    def __call__(self, t):
        return np.ones_like(np.asarray(t, dtype=float))

    def integrals(self, a: float, b: float) -> StepIntegrals:
        dt = b - a
        if dt <= 0.0:
            raise ValueError(f"step must have b > a, got [{a}, {b}]")
        half_dt2 = 0.5 * dt * dt
        dt3_6 = dt * dt * dt / 6.0
        return StepIntegrals(
            dt=dt, m0=dt,
            w10=half_dt2, w01=half_dt2,
            w20=dt3_6, w11=dt3_6, w02=dt3_6,
            dQQ=half_dt2,
            tLQQ=dt3_6, tQLQ=dt3_6, tQQL=dt3_6, tQQQ=dt3_6,
        )


class CosineFactor(TimeFactor):
    """g(t) = cos(2 pi t / eps), period eps in (0, 1]."""

    def __init__(self, epsilon: float) -> None:
        if not (0.0 < epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
        self.epsilon = float(epsilon)

    def _phase(self, t):
        # fmod is exact in IEEE arithmetic, so reducing t by the period
        # before scaling keeps full precision even when t/eps is huge.
        t = np.asarray(t, dtype=float)
        return TWO_PI * (np.fmod(t, self.epsilon) / self.epsilon)

    def __call__(self, t):
        return np.cos(self._phase(t))

    def integrals(self, a: float, b: float) -> StepIntegrals:
        dt = b - a
        if dt <= 0.0:
            raise ValueError(f"step must have b > a, got [{a}, {b}]")
        w = TWO_PI / self.epsilon
        pa = float(self._phase(a))
        pb = float(self._phase(b))
        pab = float(self._phase(a + b))
        pd = float(self._phase(dt))
        sa, ca = math.sin(pa), math.cos(pa)
        sb, cb = math.sin(pb), math.cos(pb)
        s2a, c2a = 2.0 * sa * ca, 2.0 * ca * ca - 1.0
        s2b, c2b = 2.0 * sb * cb, 2.0 * cb * cb - 1.0
        sd = math.sin(pd)
        cab = math.cos(pab)
        wd = w * dt

        m0 = (sb - sa) / w
        w10 = (ca - cb - wd * sa) / w**2
        w01 = (wd * sb + cb - ca) / w**2
        w20 = (-0.5 * wd * wd * sa + wd * ca + sa - sb) / w**3
        w11 = (2.0 * (sb - sa) - wd * (ca + cb)) / w**3
        w02 = (0.5 * wd * wd * sb + wd * cb + sa - sb) / w**3
        dqq = 0.5 * m0 * m0
        tlqq = (2.0 * wd * (2.0 - c2b) + s2a - 8.0 * sb * ca + 3.0 * s2b) / (8.0 * w**3)
        tqlq = (-wd * (math.cos(pd) - cab + 1.0)
                + 0.5 * (s2a - s2b) + 2.0 * sd) / (2.0 * w**3)
        tqql = (0.25 * wd * (2.0 - c2a) + sa * cb - 0.375 * s2a - 0.125 * s2b) / w**3
        tqqq = m0 * m0 * m0 / 6.0
        return StepIntegrals(
            dt=dt, m0=m0, w10=w10, w01=w01, w20=w20, w11=w11, w02=w02,
            dQQ=dqq, tLQQ=tlqq, tQLQ=tqlq, tQQL=tqql, tQQQ=tqqq,
        )


def integrals_for_step(g: TimeFactor, a: float, b: float) -> StepIntegrals:
    """All step moments of g over [a, b], from closed forms."""
    return g.integrals(a, b)


# ---------------------------------------------------------------------------
# Quadrature oracle (verification only)
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)
_GL01 = 0.5 * (_GL_NODES + 1.0)   # nodes mapped to [0, 1]
_GLW01 = 0.5 * _GL_WEIGHTS


class _Chunking:
    """Partition of [a, b] fine enough to resolve the oscillation."""

    def __init__(self, g: TimeFactor, a: float, b: float) -> None:
        scale = getattr(g, "epsilon", 1.0) / 16.0
        n = int(math.ceil((b - a) / scale))
        n = min(max(n, 8), 2_000_000)
        self.edges = np.linspace(a, b, n + 1)
        self.a, self.b, self.n = a, b, n
        self.widths = np.diff(self.edges)
        # Gauss-Legendre nodes of every chunk, shape (n, 12).
        self.nodes = self.edges[:-1, None] + self.widths[:, None] * _GL01[None, :]

    def integrate(self, f) -> float:
        vals = f(self.nodes.ravel()).reshape(self.n, 12)
        return float(np.sum(vals @ _GLW01 * self.widths))

    def antiderivative(self, f):
        """Return F with F(s) = int_s^b f, evaluable at arbitrary arrays."""
        per_chunk = (f(self.nodes.ravel()).reshape(self.n, 12) @ _GLW01) * self.widths
        suffix = np.concatenate([np.cumsum(per_chunk[::-1])[::-1], [0.0]])
        edges = self.edges

        def F(s):
            s = np.asarray(s, dtype=float)
            shp = s.shape
            s = s.ravel()
            k = np.clip(np.searchsorted(edges, s, side="right") - 1, 0, self.n - 1)
            right = edges[k + 1]
            span = right - s
            pts = s[:, None] + span[:, None] * _GL01[None, :]
            partial = (f(pts.ravel()).reshape(-1, 12) @ _GLW01) * span
            return (partial + suffix[k + 1]).reshape(shp)

        return F


def quadrature_oracle(g: TimeFactor, a: float, b: float, which: str) -> float:
    """Reference value of one step moment, by oscillation-resolving quadrature.

    Independent of the closed forms: every nested integral is computed from
    its definition with composite Gauss-Legendre subdivided at scale eps/16,
    inner integrals realized as numerical antiderivatives.
    """
    if b <= a:
        raise ValueError(f"oracle needs b > a, got [{a}, {b}]")
    if which not in INTEGRAL_NAMES:
        raise ValueError(f"unknown integral name {which!r}")
    ch = _Chunking(g, a, b)
    G = None

    def needG():
        nonlocal G
        if G is None:
            G = ch.antiderivative(g)
        return G

    if which == "m0":
        return ch.integrate(g)
    if which in ("w10", "dQL"):
        return ch.integrate(lambda s: (b - s) * g(s))
    if which in ("w01", "dLQ"):
        return ch.integrate(lambda s: (s - a) * g(s))
    if which in ("w20", "tQLL"):
        return 0.5 * ch.integrate(lambda s: (b - s) ** 2 * g(s))
    if which in ("w11", "tLQL"):
        # int_a^b int_s^b (b-sigma) g(sigma) dsigma ds, inner done numerically
        W = ch.antiderivative(lambda s: (b - s) * g(s))
        return ch.integrate(W)
    if which == "w02":
        return 0.5 * ch.integrate(lambda s: (s - a) ** 2 * g(s))
    if which == "tLLQ":
        G2 = ch.antiderivative(needG())
        return ch.integrate(G2)
    if which == "dQQ":
        return ch.integrate(lambda s: g(s) * needG()(s))
    if which == "tLQQ":
        U = ch.antiderivative(lambda s: g(s) * needG()(s))
        return ch.integrate(U)
    if which == "tQLQ":
        Gr = ch.antiderivative(lambda s: s * g(s))
        return ch.integrate(lambda s: g(s) * (Gr(s) - s * needG()(s)))
    if which == "tQQL":
        W = ch.antiderivative(lambda s: (b - s) * g(s))
        return ch.integrate(lambda s: g(s) * W(s))
    if which == "tQQQ":
        T = ch.antiderivative(lambda s: g(s) * needG()(s))
        return ch.integrate(lambda s: g(s) * T(s))
    raise AssertionError(which)
