"""Iterated image-map lifts of graph maps in graph-type Grassmann charts.

In the chart that keeps the lower block of a tangent frame after
normalising its upper p x p block to the identity, the tangent plane of the
graph of ``h`` is just the Jacobian of ``h``.  So one lift sends
``u -> (u, h(u))`` to ``u -> (u, h(u), dh/du(u))`` with the Jacobian written
row-major.  Iterating l times starting from ``f`` yields the ordered partials
of ``f`` up to order l, the block of order nu repeated C(l, nu) times.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import comb, factorial
from typing import Sequence

from .expr import SmoothnessExceeded, SmoothExpr, jet_of_expr
from .jet import Jet
from .manifolds import AdaptedPair


class InsufficientJetOrder(ValueError):
    pass


@dataclass(frozen=True)
class GraphMapLevel:
    """Jet of the level-l graph map ``h``; ``labels[c] = (i, seq)`` names
    component c as the partial of ``f_i`` along the variable sequence ``seq``."""

    h: Jet
    level: int
    labels: tuple

    @property
    def p(self) -> int:
        return self.h.nvars

    @classmethod
    def start(cls, F: Jet) -> GraphMapLevel:
        return cls(F, 0, tuple((i, ()) for i in range(F.width)))


def image_map_step(g: GraphMapLevel) -> GraphMapLevel:
    """``h -> (h, dh/du)``; the truncation order drops by one."""
    h = g.h
    if h.order < 1:
        raise InsufficientJetOrder("an order-0 jet cannot be lifted")
    p = h.nvars
    parts = [h.truncate(h.order - 1)]
    labels = list(g.labels)
    derivs = [h.derivative(j) for j in range(p)]
    comps = []
    for c in range(h.width):
        for j in range(p):
            comps.append(derivs[j].comps[c])
            i, seq = g.labels[c]
            labels.append((i, seq + (j,)))
    parts.append(Jet(h.base, h.order - 1, comps))
    return GraphMapLevel(Jet.stack(parts), g.level + 1, tuple(labels))


def chart_coordinate_count(p: int, m: int, l: int) -> tuple[int, list[int]]:
    """Coordinates of the level-l chart and the bundle dimensions d_0..d_l.

    ``d_l = d_{l-1} + p (d_{l-1} - p)`` is the dimension of the Grassmann
    bundle of p-planes over a d_{l-1}-manifold.
    """
    if not 1 <= p < m or l < 0:
        raise ValueError("need 1 <= p < m and l >= 0")
    dims = [m]
    for _ in range(l):
        d = dims[-1]
        dims.append(d + p * (d - p))
    count = p + (m - p) * (1 + p) ** l
    assert count == dims[-1]
    return count, dims


def _ordered_partials(p: int, nu: int) -> list[tuple[int, ...]]:
    return list(product(range(p), repeat=nu))


@dataclass(frozen=True)
class ChartPoint:
    """Level-l chart coordinates ``(u, f; C(l,1) x f_[1], ..., C(l,l) x f_[l])``.

    ``f_[nu]`` lists the ordered partials of order nu of all components of f,
    component-major and then lexicographic in the variable sequence.
    """

    level: int
    p: int
    m: int
    coords: tuple

    @property
    def codim(self) -> int:
        return self.m - self.p

    def blocks(self) -> list[tuple[int, int, int, int]]:
        """``(nu, copy, start, length)`` for every block after the u-part."""
        out = []
        pos = self.p
        t = self.codim
        for nu in range(self.level + 1):
            size = t * self.p**nu
            for c in range(comb(self.level, nu)):
                out.append((nu, c, pos, size))
                pos += size
        return out

    def block(self, nu: int, copy: int = 0) -> tuple:
        for n, c, start, size in self.blocks():
            if (n, c) == (nu, copy):
                return self.coords[start : start + size]
        raise IndexError((nu, copy))

    def equals(self, other: ChartPoint, tol: float = 1e-10) -> bool:
        if (self.level, self.p, self.m) != (other.level, other.p, other.m):
            return False
        exact = all(isinstance(v, (int, Fraction)) for v in self.coords + other.coords)
        if exact:
            return self.coords == other.coords
        return all(abs(a - b) <= tol for a, b in zip(self.coords, other.coords))

    def to_json(self) -> dict:
        def num(v):
            if isinstance(v, Fraction):
                return v.numerator if v.denominator == 1 else str(v)
            return v

        return {
            "layout": {
                "level": self.level,
                "p": self.p,
                "m": self.m,
                "count": len(self.coords),
                "blocks": [[nu, comb(self.level, nu), self.codim * self.p**nu] for nu in range(self.level + 1)],
                "order": "u, then for nu ascending: copies of f_[nu], each component-major, "
                "variable sequences lexicographic",
            },
            "coords": [num(v) for v in self.coords],
        }


def _graph_jet(F, u0, k: int, variables, mode: str) -> Jet:
    if isinstance(F, Jet):
        if F.order < k:
            raise SmoothnessExceeded(k, F.order)
        return F.truncate(k)
    if isinstance(F, (SmoothExpr, str)):
        F = [F]
    from .expr import parse_expr

    exprs = [parse_expr(f) if isinstance(f, str) else f for f in F]
    return Jet.stack([jet_of_expr(e, u0, k, variables, mode) for e in exprs])


def lift_levels(F: Jet, k: int) -> list[GraphMapLevel]:
    levels = [GraphMapLevel.start(F.truncate(k))]
    for _ in range(k):
        levels.append(image_map_step(levels[-1]))
    return levels


def recursive_lift(F, u0: Sequence, k: int, variables: Sequence[str] | None = None, mode: str = "auto") -> ChartPoint:
    """Apply the image map k times and read off the chart point at ``u0``.

    The raw recursion interleaves blocks; coordinates are regrouped by their
    labels into the ChartPoint layout, and every label must occur exactly
    C(k, nu) times.
    """
    J = _graph_jet(F, u0, k, variables, mode)
    top = lift_levels(J, k)[-1]
    p = J.nvars
    values = top.h.value()
    seen: dict = {}
    for lab, v in zip(top.labels, values):
        seen.setdefault(lab, []).append(v)
    coords = list(J.base)
    for nu in range(k + 1):
        mult = comb(k, nu)
        keys = [(i, seq) for i in range(J.width) for seq in _ordered_partials(p, nu)]
        for key in keys:
            if len(seen.get(key, ())) != mult:
                raise AssertionError(f"label {key} occurs {len(seen.get(key, ()))} times, expected {mult}")
        for c in range(mult):
            coords.extend(seen[key][c] for key in keys)
    return ChartPoint(k, p, p + J.width, tuple(coords))


def closed_form_lift(F, u0: Sequence, k: int, variables: Sequence[str] | None = None, mode: str = "auto") -> ChartPoint:
    """Assemble the chart point directly from the ordered partials of F at ``u0``."""
    J = _graph_jet(F, u0, k, variables, mode)
    p = J.nvars
    coords = list(J.base)
    for nu in range(k + 1):
        block = []
        for i in range(J.width):
            for seq in _ordered_partials(p, nu):
                beta = [0] * p
                for j in seq:
                    beta[j] += 1
                mult = 1
                for b in beta:
                    mult *= factorial(b)
                block.append(J.coeff(i, beta) * mult)
        coords.extend(block * comb(k, nu))
    return ChartPoint(k, p, p + J.width, tuple(coords))


def lifts_equal(pair: AdaptedPair, k: int, mode: str = "auto", tol: float = 1e-10) -> bool:
    """Whether the level-k lifts of the two graph maps agree at the origin."""
    if k < 1:
        raise ValueError("lift comparison needs k >= 1")
    r = pair.class_r
    if k > r:
        raise SmoothnessExceeded(k, r)
    a = recursive_lift(pair.M.jet(k, mode), pair.M.origin, k)
    b = recursive_lift(pair.Mt.jet(k, mode), pair.Mt.origin, k)
    return a.equals(b, tol)


def max_equal_lift(pair: AdaptedPair, k_max: int, mode: str = "auto"):
    """Largest k <= min(k_max, r) with equal lifts (0 if none), and the bound used."""
    bound = int(min(k_max, pair.class_r))
    best = 0
    for k in range(1, bound + 1):
        if not lifts_equal(pair, k, mode):
            break
        best = k
    return best, bound
