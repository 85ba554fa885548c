"""Parametrized patches and their reduction to graphs over a common tangent plane."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.linalg import subspace_angles

from .expr import (
    Add,
    Const,
    Mul,
    SmoothExpr,
    Sub,
    Var,
    affine_coefficients,
    evaluate,
    jet_of_expr,
    parse_expr,
    smoothness_class,
    substitute,
)
from .jet import Jet, is_exact_number, unit


class NoCommonTangent(ValueError):
    """The tangent spaces differ, so the order of tangency is 0."""


class NotOnManifold(ValueError):
    pass


class NotImmersion(ValueError):
    pass


class GraphPresentationError(ValueError):
    pass


TANGENT_TOL = 1e-9


def _as_expr(c) -> SmoothExpr:
    return parse_expr(c) if isinstance(c, str) else c


@dataclass(frozen=True)
class ParamPatch:
    """``u -> (q_1(u), ..., q_m(u))`` near ``base``."""

    components: tuple[SmoothExpr, ...]
    params: tuple[str, ...]
    base: tuple

    @classmethod
    def make(cls, components: Sequence, params: Sequence[str], base: Sequence | None = None) -> ParamPatch:
        comps = tuple(_as_expr(c) for c in components)
        if base is None:
            base = (0,) * len(params)
        base = tuple(Fraction(b) if isinstance(b, (int, str)) else b for b in base)
        if len(base) != len(params):
            raise ValueError("base point and parameter list differ in length")
        return cls(comps, tuple(params), base)

    @property
    def p(self) -> int:
        return len(self.params)

    @property
    def m(self) -> int:
        return len(self.components)

    @property
    def class_r(self):
        return min(smoothness_class(c, self.base, self.params) for c in self.components)

    def point(self) -> tuple:
        return tuple(evaluate(c, self.base, self.params) for c in self.components)

    def jet(self, k: int, mode: str = "auto") -> Jet:
        return Jet.stack([jet_of_expr(c, self.base, k, self.params, mode) for c in self.components])

    def jacobian(self, mode: str = "auto") -> list[list]:
        j = self.jet(1, mode)
        return [[j.coeff(i, unit(self.p, c)) for c in range(self.p)] for i in range(self.m)]


def _exact_matrix(rows) -> bool:
    return all(is_exact_number(v) for r in rows for v in r)


def exact_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    a = [[Fraction(v) for v in r] for r in rows]
    rank = 0
    ncols = len(a[0]) if a else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(a)) if a[r][col] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for r in range(len(a)):
            if r != rank and a[r][col] != 0:
                f = a[r][col] / a[rank][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[rank])]
        rank += 1
    return rank


def exact_inverse(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    n = len(rows)
    a = [[Fraction(v) for v in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        lead = a[col][col]
        a[col] = [x / lead for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [r[n:] for r in a]


def immersion_check(q: ParamPatch, mode: str = "auto") -> bool:
    """True iff the Jacobian at the base point has rank p."""
    jac = q.jacobian(mode)
    if _exact_matrix(jac):
        return exact_rank(jac) == q.p
    sv = np.linalg.svd(np.array(jac, dtype=float), compute_uv=False)
    return bool(sv.min() > 1e-9)


def same_tangent_space(j1, j2) -> bool:
    if _exact_matrix(j1) and _exact_matrix(j2):
        p = len(j1[0])
        return exact_rank([r1 + r2 for r1, r2 in zip(j1, j2)]) == p
    a = subspace_angles(np.array(j1, dtype=float), np.array(j2, dtype=float))
    return bool(a.max() < TANGENT_TOL)


def _lin(terms, const=Fraction(0)) -> SmoothExpr:
    """Sum ``const + sum(c * expr)`` without zero terms or unit factors."""
    out = None
    for c, e in terms:
        if c == 0:
            continue
        t = e if c == 1 else Mul(Const(Fraction(c)), e)
        out = t if out is None else Add(out, t)
    if const != 0 or out is None:
        cst = Const(Fraction(const))
        out = cst if out is None else Add(out, cst)
    return out


@dataclass(frozen=True)
class GraphPresentation:
    """``v -> (v, F(v))`` in adapted coordinates ``y = A x + b``; base point 0."""

    F: tuple[SmoothExpr, ...]
    variables: tuple[str, ...]
    A: tuple[tuple, ...]
    b: tuple

    @property
    def p(self) -> int:
        return len(self.variables)

    @property
    def m(self) -> int:
        return self.p + len(self.F)

    @property
    def origin(self) -> tuple:
        return (Fraction(0),) * self.p

    @property
    def class_r(self):
        return min(smoothness_class(f, self.origin, self.variables) for f in self.F)

    def jet(self, k: int, mode: str = "auto") -> Jet:
        return Jet.stack([jet_of_expr(f, self.origin, k, self.variables, mode) for f in self.F])


@dataclass(frozen=True)
class AdaptedPair:
    M: GraphPresentation
    Mt: GraphPresentation

    def __post_init__(self):
        if (self.M.p, self.M.m) != (self.Mt.p, self.Mt.m) or self.M.variables != self.Mt.variables:
            raise ValueError("adapted pair must share dimensions and graph variables")

    @property
    def p(self) -> int:
        return self.M.p

    @property
    def m(self) -> int:
        return self.M.m

    @property
    def variables(self) -> tuple[str, ...]:
        return self.M.variables

    @property
    def class_r(self):
        return min(self.M.class_r, self.Mt.class_r)

    def difference(self) -> tuple[SmoothExpr, ...]:
        return tuple(Sub(ft, f) for f, ft in zip(self.M.F, self.Mt.F))


def _affine_parts(q: ParamPatch):
    return [affine_coefficients(c, q.params) for c in q.components]


def adapt_to_graphs(M: ParamPatch, Mt: ParamPatch, x0: Sequence, mode: str = "auto") -> AdaptedPair:
    """Write both patches as graphs over their common tangent plane at ``x0``.

    One affine ambient change is used: a translation to the origin followed
    by a shear that maps the tangent plane onto the first coordinate p-plane.
    Each patch must already be a graph over some coordinate p-plane, i.e. p
    of its components must be affine in the parameters.
    """
    if (M.p, M.m) != (Mt.p, Mt.m):
        raise ValueError("patches must have the same dimension and codimension")
    p, m = M.p, M.m
    if not 1 <= p < m:
        raise ValueError("need 1 <= p < m")
    x0 = tuple(Fraction(v) if isinstance(v, (int, str)) else v for v in x0)
    for q in (M, Mt):
        pt = q.point()
        if any(abs(a - b) > 1e-12 for a, b in zip(pt, x0)):
            raise NotOnManifold(f"patch passes through {pt}, not {x0}")
        if not immersion_check(q, mode):
            raise NotImmersion("Jacobian at the base point is rank deficient")
    J, Jt = M.jacobian(mode), Mt.jacobian(mode)
    if not same_tangent_space(J, Jt):
        raise NoCommonTangent("tangent spaces differ at the contact point")

    aff, afft = _affine_parts(M), _affine_parts(Mt)
    chosen = None
    for I in combinations(range(m), p):
        if all(aff[i] is not None and afft[i] is not None for i in I):
            L = [aff[i][1] for i in I]
            Lt = [afft[i][1] for i in I]
            if exact_rank(L) == p and exact_rank(Lt) == p:
                chosen = I
                break
    if chosen is None:
        raise GraphPresentationError("no coordinate p-plane over which both patches are graphs")
    I = chosen
    Jidx = [i for i in range(m) if i not in I]

    # tangent plane slope: x_J - x0_J = S (x_I - x0_I) to first order
    L = [aff[i][1] for i in I]
    Jrows = [J[i] for i in Jidx]
    Linv = exact_inverse(L)
    S = [[Fraction(sum(Jrows[r][k] * Linv[k][j] for k in range(p))) for j in range(p)] for r in range(m - p)]

    gvars = M.params
    gexprs = [Var(v) for v in gvars]

    def graph_of(q: ParamPatch, parts) -> tuple[SmoothExpr, ...]:
        Lq = [parts[i][1] for i in I]
        cq = [parts[i][0] for i in I]
        Lqi = exact_inverse(Lq)
        # u = Lq^{-1} (v + x0_I - cq)
        shift = [x0[I[j]] - cq[j] for j in range(p)]
        mapping = {}
        for a, name in enumerate(q.params):
            const = sum(Lqi[a][j] * shift[j] for j in range(p))
            mapping[name] = _lin([(Lqi[a][j], gexprs[j]) for j in range(p)], Fraction(const))
        out = []
        for r, jj in enumerate(Jidx):
            e = substitute(q.components[jj], mapping)
            tail = _lin([(-S[r][j], gexprs[j]) for j in range(p)], -Fraction(x0[jj]))
            if isinstance(tail, Const) and tail.value == 0:
                out.append(e)
            elif isinstance(e, Const) and e.value == 0 and isinstance(tail, Const):
                out.append(tail)
            else:
                out.append(Add(e, tail))
        return tuple(out)

    A = []
    for i in I:
        A.append(tuple(Fraction(int(c == i)) for c in range(m)))
    for r, jj in enumerate(Jidx):
        row = [Fraction(int(c == jj)) for c in range(m)]
        for j, i in enumerate(I):
            row[i] -= S[r][j]
        A.append(tuple(row))
    b = tuple(-sum(A[r][c] * Fraction(x0[c]) for c in range(m)) for r in range(m))
    G = GraphPresentation(graph_of(M, aff), gvars, tuple(A), b)
    Gt = GraphPresentation(graph_of(Mt, afft), gvars, tuple(A), b)
    return AdaptedPair(G, Gt)


def graph_patch(F: Sequence, variables: Sequence[str], base: Sequence | None = None) -> ParamPatch:
    """The patch ``u -> (u, F(u))``."""
    F = [_as_expr(f) for f in F]
    return ParamPatch.make([Var(v) for v in variables] + F, variables, base)


def graph_pair(F: Sequence, Ft: Sequence, variables: Sequence[str] = ("x",)) -> AdaptedPair:
    """Adapted pair for the graphs of ``F`` and ``Ft`` through the origin."""
    if isinstance(F, (str, SmoothExpr)):
        F = [F]
    if isinstance(Ft, (str, SmoothExpr)):
        Ft = [Ft]
    M = graph_patch(F, variables)
    Mt = graph_patch(Ft, variables)
    return adapt_to_graphs(M, Mt, M.point())
