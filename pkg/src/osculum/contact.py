"""Order of contact between a plane field in R^3 and a surface.

The order is read off from how fast the angle between the plane field and
the tangent planes of the surface shrinks near the marked point: order at
least k means the angle is O(rho^k) at distance rho.  A plane field is a
contact structure exactly when this order is at most 1 for every surface;
``geiges_check`` samples that criterion, it cannot prove it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from ._parallel import pmap
from .expr import SmoothExpr, evaluate, jet_of_expr, parse_expr, substitute, Var
from .jet import AtLeast, Jet, jet_compose, vanishing_order
from .manifolds import ParamPatch, immersion_check
from .separation import ExponentFit, fit_exponent

XYZ = ("x", "y", "z")
ANGLE_FLOOR = 1e-14
TANGENT_ANGLE_TOL = 1e-9
DEFAULT_SCALES = tuple(2.0**-i for i in range(5, 15))
ORDER_SLACK = 0.1


class DegeneratePlane(ValueError):
    pass


class AngleUnderflow(ArithmeticError):
    """The angle vanishes (below 1e-14) at every sampled scale."""


def _expr(e) -> SmoothExpr:
    return parse_expr(e) if isinstance(e, str) else e


@dataclass(frozen=True)
class Distribution2in3:
    """``xi = ker(a dx + b dy + c dz)``."""

    a: SmoothExpr
    b: SmoothExpr
    c: SmoothExpr

    @classmethod
    def from_form(cls, a, b, c) -> Distribution2in3:
        return cls(_expr(a), _expr(b), _expr(c))

    @property
    def coefficients(self) -> tuple:
        return (self.a, self.b, self.c)

    def normal(self, q) -> np.ndarray:
        n = np.array([float(evaluate(e, q, XYZ)) for e in self.coefficients])
        if not np.any(n):
            raise DegeneratePlane(f"the 1-form vanishes at {tuple(q)}")
        return n

    def rescaled(self, f) -> Distribution2in3:
        """Same kernel, form multiplied by the (non-vanishing) function f."""
        f = _expr(f)
        return Distribution2in3(f * self.a, f * self.b, f * self.c)


STANDARD_CONTACT = Distribution2in3.from_form("-y", "0", "1")  # ker(dz - y dx)
INTEGRABLE = Distribution2in3.from_form("0", "0", "1")  # ker dz


@dataclass(frozen=True)
class SurfacePatch:
    """Parametrized surface ``(u1, u2) -> R^3``; the marked point is the image of ``patch.base``."""

    patch: ParamPatch

    @classmethod
    def graph(cls, g, at: Sequence = (0, 0)) -> SurfacePatch:
        """``z = g(x, y)`` with marked point over ``at``."""
        g = substitute(_expr(g), {"x": Var("u1"), "y": Var("u2")})
        return cls.param([Var("u1"), Var("u2"), g], at)

    @classmethod
    def param(cls, components: Sequence, base: Sequence = (0, 0)) -> SurfacePatch:
        patch = ParamPatch.make(components, ("u1", "u2"), base)
        if patch.m != 3:
            raise ValueError("a surface in R^3 needs three components")
        if not immersion_check(patch):
            raise ValueError("the patch is not an immersion at its base point")
        return cls(patch)

    @property
    def marked_point(self) -> tuple:
        return self.patch.point()

    def point_at(self, u) -> np.ndarray:
        return np.array([float(evaluate(c, u, self.patch.params)) for c in self.patch.components])

    def normal_at(self, u) -> np.ndarray:
        jets = [jet_of_expr(c, u, 1, self.patch.params, "float") for c in self.patch.components]
        d1 = np.array([j.coeff(0, (1, 0)) for j in jets], dtype=float)
        d2 = np.array([j.coeff(0, (0, 1)) for j in jets], dtype=float)
        return np.cross(d1, d2)


def plane_angle(n1: Sequence[float], n2: Sequence[float]) -> float:
    """Angle in [0, pi/2] between the planes with normals n1 and n2."""
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    if not np.any(n1) or not np.any(n2):
        raise DegeneratePlane("zero normal vector")
    # atan2 keeps full relative precision for tiny angles
    return float(math.atan2(np.linalg.norm(np.cross(n1, n2)), abs(float(np.dot(n1, n2)))))


def angle_at(xi: Distribution2in3, S: SurfacePatch, u) -> float:
    return plane_angle(xi.normal(S.point_at(u)), S.normal_at(u))


@dataclass
class DirectionFit:
    direction: tuple
    fit: ExponentFit | None
    underflow: bool

    def as_dict(self) -> dict:
        return {
            "direction": list(self.direction),
            "order": self.fit.alpha if self.fit else None,
            "stderr": self.fit.stderr if self.fit else None,
            "underflow": self.underflow,
        }


@dataclass
class ContactEstimate:
    order: float | int | AtLeast
    tangent: bool
    angle_at_point: float
    worst: ExponentFit | None = None
    directions: list[DirectionFit] = field(default_factory=list)

    def as_dict(self) -> dict:
        o = self.order
        return {
            "order": str(o) if isinstance(o, AtLeast) else o,
            "tangent": self.tangent,
            "angle_at_point": self.angle_at_point,
            "directions": [d.as_dict() for d in self.directions],
        }


def _param_at_distance(S: SurfacePatch, p: np.ndarray, w: np.ndarray, rho: float) -> np.ndarray:
    u0 = np.array([float(b) for b in S.patch.base])

    def gap(t):
        return float(np.linalg.norm(S.point_at(u0 + t * w) - p)) - rho

    hi = rho
    while gap(hi) < 0:
        hi *= 2
        if hi > 1e3:
            raise ValueError("surface does not reach the requested distance")
    return u0 + brentq(gap, 0.0, hi, xtol=1e-13 * rho, maxiter=500) * w


def _direction_fit(xi, S, p, w, scales):
    angles = []
    for rho in scales:
        a = angle_at(xi, S, _param_at_distance(S, p, w, rho))
        if a < ANGLE_FLOOR:
            raise AngleUnderflow(f"angle {a:.2e} at scale {rho:.2e}")
        angles.append(a)
    return fit_exponent(scales, angles, kind="angle")


def _direction_job(xi, S, p, w, scales):
    try:
        return DirectionFit(tuple(w), _direction_fit(xi, S, p, np.asarray(w), scales), False)
    except AngleUnderflow:
        return DirectionFit(tuple(w), None, True)


def contact_order_estimate(
    xi: Distribution2in3,
    S: SurfacePatch,
    scales: Sequence[float] | None = None,
    n_dirs: int = 8,
    l_max: int = 10,
    seed: int = 0,
) -> ContactEstimate:
    """Fitted angle order at the marked point: the smallest slope over sampled directions.

    Returns order 0 without sampling when the planes differ at the point, and
    ``AtLeast(l_max)`` when the angle underflows along every direction.
    """
    u0 = tuple(float(b) for b in S.patch.base)
    p = S.point_at(u0)
    a0 = angle_at(xi, S, u0)
    if a0 > TANGENT_ANGLE_TOL:
        return ContactEstimate(0, False, a0)
    scales = sorted(map(float, scales or DEFAULT_SCALES), reverse=True)
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0, 2 * np.pi / n_dirs)
    dirs = [(math.cos(phase + 2 * np.pi * j / n_dirs), math.sin(phase + 2 * np.pi * j / n_dirs)) for j in range(n_dirs)]
    fits = pmap(_direction_job, [(xi, S, p, w, scales) for w in dirs])
    live = [d for d in fits if not d.underflow]
    if not live:
        return ContactEstimate(AtLeast(l_max), True, a0, None, fits)
    worst = min(live, key=lambda d: d.fit.alpha)
    return ContactEstimate(worst.fit.alpha, True, a0, worst.fit, fits)


def _cross(a: Sequence[Jet], b: Sequence[Jet]) -> list[Jet]:
    return [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]


def angle_order_along(xi: Distribution2in3, S: SurfacePatch, direction: Sequence, l_max: int = 10, mode: str = "auto"):
    """Exact angle order along ``t -> patch(base + t w)``: half the vanishing order of ``|n_xi x n_S|^2``.

    Returns a Fraction, or ``AtLeast(l_max)`` when no non-zero term shows up
    below that order.
    """
    K = 2 * l_max + 1
    patch = S.patch
    Sj = patch.jet(K + 1, mode)
    partials = [Sj.derivative(0), Sj.derivative(1)]
    n_s = _cross([partials[0].component(i) for i in range(3)], [partials[1].component(i) for i in range(3)])
    p = Sj.value()
    n_xi = [jet_compose(jet_of_expr(e, p, K, XYZ, mode), Sj.truncate(K)) for e in xi.coefficients]
    cross = _cross(n_xi, [j.truncate(K) for j in n_s])
    sq = cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]
    exact = sq.exact
    w = [Fraction(c) if exact else float(c) for c in direction]
    base = [Fraction(b) if exact else float(b) for b in patch.base]
    t0 = (Fraction(0),) if exact else (0.0,)
    curve = Jet(t0, K, [{(0,): base[i], (1,): w[i]} for i in range(2)])
    along = jet_compose(sq, curve)
    nu = vanishing_order(along, 0.0 if exact else 1e-12)
    if isinstance(nu, AtLeast) or nu > 2 * l_max:
        return AtLeast(l_max)
    return Fraction(nu, 2)


def random_tangent_quadratics(xi: Distribution2in3, n: int, seed: int = 0, at: Sequence = (0, 0, 0)) -> list[SurfacePatch]:
    """Graphs ``z = z0 + linear + random quadratic`` tangent to ``xi`` at ``at``."""
    x0, y0, z0 = (Fraction(v) for v in at)
    a, b, c = (evaluate(e, (x0, y0, z0), XYZ) for e in xi.coefficients)
    if c == 0:
        raise ValueError("xi is vertical at the point; no tangent graph over the xy-plane")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        q = [Fraction(int(rng.integers(-1000, 1001)), 1000) for _ in range(3)]
        g = (
            f"({z0}) - ({a / c})*(x - ({x0})) - ({b / c})*(y - ({y0}))"
            f" + ({q[0]})*(x - ({x0}))^2 + ({q[1]})*(x - ({x0}))*(y - ({y0})) + ({q[2]})*(y - ({y0}))^2"
        )
        out.append(SurfacePatch.graph(g, (x0, y0)))
    return out


@dataclass
class GeigesReport:
    verdict: str
    surfaces: list[dict]
    witness: dict | None
    note: str = (
        "sampling only: a PASS means no sampled surface exceeded order 1; "
        "it does not prove that the plane field is a contact structure"
    )

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "surfaces": self.surfaces, "witness": self.witness, "note": self.note}


def _order_key(o) -> float:
    return math.inf if isinstance(o, AtLeast) else float(o)


def geiges_check(
    xi: Distribution2in3,
    surfaces: Sequence[SurfacePatch],
    l_max: int = 10,
    scales: Sequence[float] | None = None,
    seed: int = 0,
) -> GeigesReport:
    """PASS when every sampled surface has estimated order at most 1 + 0.1."""
    rows = []
    witness = None
    for i, S in enumerate(surfaces):
        est = contact_order_estimate(xi, S, scales, l_max=l_max, seed=seed + i)
        o = est.order
        ok = _order_key(o) <= 1 + ORDER_SLACK
        rows.append(
            {
                "index": i,
                "marked_point": [str(v) for v in S.marked_point],
                "tangent": est.tangent,
                "order": str(o) if isinstance(o, AtLeast) else o,
                "verdict": "PASS" if ok else "FAIL",
            }
        )
        if witness is None and _order_key(o) >= 2 - ORDER_SLACK:
            witness = {"index": i, "order": str(o) if isinstance(o, AtLeast) else o}
    verdict = "PASS" if all(r["verdict"] == "PASS" for r in rows) else "FAIL"
    return GeigesReport(verdict, rows, witness)
