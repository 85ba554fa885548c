"""Order of tangency as a mini-max over contact orders of curve pairs.

For every tangent direction w we look at pairs of curves, one in each
manifold, leaving the contact point with velocities parallel to w, and take
the best contact order any pair achieves; the order of tangency is the
minimum of that quantity over directions.  Curves are polynomial jets in the
graph parameters, so everything stays exact for polynomial inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from ._parallel import pmap
from .jet import AtLeast, Jet, jet_compose, vanishing_order
from .manifolds import AdaptedPair
from .taylor import FLOAT_ZERO_TOL, order_from_graphs

DEFAULT_L_MAX = 10


class NoWitness(ValueError):
    pass


def _rank_key(v) -> float:
    # AtLeast(b) sorts above every integer <= b
    return v.bound + 0.5 if isinstance(v, AtLeast) else v


def _show(v):
    return str(v) if isinstance(v, AtLeast) else v


def curve_jet(coeffs: Sequence[Sequence], order: int) -> Jet:
    """Curve ``t -> sum_j coeffs[j-1] * t^j`` in R^p (no constant term)."""
    p = len(coeffs[0])
    exact = all(isinstance(c, (int, Fraction)) for row in coeffs for c in row)
    t0 = (Fraction(0),) if exact else (0.0,)
    comps = []
    for i in range(p):
        comps.append({(j + 1,): row[i] for j, row in enumerate(coeffs) if j + 1 <= order})
    return Jet(t0, order, comps)


def ambient_curve(F: Jet, u: Jet) -> Jet:
    """``t -> (u(t), F(u(t)))`` for a graph map jet ``F`` about 0."""
    if F.exact and not u.exact:
        F = F.to_float()
    if u.exact and not F.exact:
        u = u.to_float()
    return Jet.stack([u, jet_compose(F, u)])


def curve_contact_order(delta: Jet, delta_t: Jet, l_max: int = DEFAULT_L_MAX, tol: float = FLOAT_ZERO_TOL):
    """Largest l with ``|delta(t) - delta_t(t)| = o(|t|^l)``, or AtLeast."""
    diff = delta - delta_t
    nu = vanishing_order(diff, 0.0 if diff.exact else tol)
    if isinstance(nu, int) and nu - 1 <= l_max:
        return nu - 1
    return AtLeast(min(diff.order, l_max))


@dataclass
class DirectionRecord:
    direction: tuple
    inner_max: int | AtLeast
    attained_by: str

    def as_dict(self) -> dict:
        return {
            "direction": [str(c) for c in self.direction],
            "inner_max": _show(self.inner_max),
            "attained_by": self.attained_by,
        }


@dataclass
class MinimaxReport:
    records: list[DirectionRecord]
    outer_min: int | AtLeast
    attaining: list[tuple]
    meta: dict
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "outer_min": _show(self.outer_min),
            "attaining_directions": [[str(c) for c in w] for w in self.attaining],
            "directions": [r.as_dict() for r in self.records],
            "meta": self.meta,
            "warnings": self.warnings,
        }


def _rand_q(rng, lo: float, hi: float, den: int = 1000) -> Fraction:
    return Fraction(int(rng.integers(round(lo * den), round(hi * den) + 1)), den)


def _direction_inner_max(F: Jet, Ft: Jet, w: tuple, pairs: list, order: int, l_max: int):
    canon = curve_jet([w], order)
    best = curve_contact_order(ambient_curve(F, canon), ambient_curve(Ft, canon), l_max)
    who = "canonical"
    for idx, (cu, cut) in enumerate(pairs):
        u, ut = curve_jet(cu, order), curve_jet(cut, order)
        c = curve_contact_order(ambient_curve(F, u), ambient_curve(Ft, ut), l_max)
        if _rank_key(c) > _rank_key(best):
            best, who = c, f"random#{idx}"
    return best, who


def _sample_pairs(rng, w: tuple, n_curves: int, degree: int, exact: bool) -> list:
    p = len(w)

    def num(lo, hi):
        q = _rand_q(rng, lo, hi)
        return q if exact else float(q)

    def curve(c):
        rows = [tuple(c * wi for wi in w)]
        rows += [tuple(num(-1, 1) for _ in range(p)) for _ in range(2, degree + 1)]
        return rows

    pairs = []
    for i in range(n_curves):
        c = num(0.5, 2)
        u = curve(c)
        if i % 2 == 0:
            # same jet up to a random order, then a random perturbation
            J = int(rng.integers(2, degree + 1))
            ut = [row if j + 1 < J else tuple(num(-1, 1) for _ in range(p)) for j, row in enumerate(u)]
        else:
            ut = curve(num(0.5, 2))
        pairs.append((u, ut))
    return pairs


def _directions(rng, p: int, n_dirs: int, exact: bool, extra: Sequence = ()) -> list[tuple]:
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    dirs = []
    for i in range(p):
        for sgn in (1, -1):
            dirs.append(tuple(sgn * one if j == i else zero for j in range(p)))
    for w in extra:
        dirs.append(tuple(Fraction(c) if exact else float(c) for c in w))
    while len(dirs) < 2 * p + len(extra) + n_dirs:
        g = rng.standard_normal(p)
        g = g / np.linalg.norm(g)
        w = tuple(Fraction(round(1000 * c), 1000) for c in g)
        if any(w):
            dirs.append(w if exact else tuple(float(c) for c in w))
    return dirs


def minimax_tangency(
    pair: AdaptedPair,
    n_dirs: int = 64,
    n_curves: int = 8,
    curve_degree: int = 6,
    l_max: int = DEFAULT_L_MAX,
    seed: int = 0,
    mode: str = "auto",
    extra_directions: Sequence = (),
) -> MinimaxReport:
    """Sampled left-hand side of the curve mini-max characterization.

    Directions: both signs of every coordinate axis, ``extra_directions``,
    then ``n_dirs`` random ones.  Per direction the inner maximum runs over
    the straight-line pair ``u = u~ = t w`` and ``n_curves`` random
    polynomial pairs with velocities parallel to w.
    """
    r = pair.class_r
    order = int(min(l_max + 1, r))
    F, Ft = pair.M.jet(order, mode), pair.Mt.jet(order, mode)
    exact = F.exact and Ft.exact
    rng = np.random.default_rng(seed)
    dirs = _directions(rng, pair.p, n_dirs, exact, extra_directions)
    jobs = [(F, Ft, w, _sample_pairs(rng, w, n_curves, curve_degree, exact), order, l_max) for w in dirs]
    results = pmap(_direction_inner_max, jobs)
    records = [DirectionRecord(w, best, who) for w, (best, who) in zip(dirs, results)]
    outer = min((rec.inner_max for rec in records), key=_rank_key)
    attaining = [rec.direction for rec in records if _rank_key(rec.inner_max) == _rank_key(outer)]
    warnings = []
    taylor = order_from_graphs(pair, l_max, mode)
    if taylor.saturated_by_class:
        warnings.append(
            f"order equals the smoothness class r={taylor.class_r}; the mini-max equality "
            "needs s < r, so this value is not certified"
        )
    elif order <= l_max:
        warnings.append(f"curve jets truncated at the smoothness class r={r}")
    meta = {
        "seed": seed,
        "n_dirs": n_dirs,
        "n_curves": n_curves,
        "curve_degree": curve_degree,
        "l_max": l_max,
        "jet_order": order,
        "exact": exact,
    }
    return MinimaxReport(records, outer, attaining, meta, warnings)


@dataclass(frozen=True)
class Witness:
    direction: tuple
    component: int
    value: object
    unit_value: float
    canonical_contact: int | AtLeast
    certified: bool

    @property
    def unit(self) -> tuple:
        n = math.sqrt(sum(float(c) ** 2 for c in self.direction))
        return tuple(float(c) / n for c in self.direction)

    def as_dict(self) -> dict:
        return {
            "direction": [str(c) for c in self.direction],
            "unit": list(self.unit),
            "component": self.component,
            "value": str(self.value),
            "unit_value": self.unit_value,
            "canonical_contact": _show(self.canonical_contact),
            "certified": self.certified,
        }


def _candidate_directions(p: int, radius: int):
    seen = set()
    for n in range(1, radius + 1):
        box = [v for v in product(range(-n, n + 1), repeat=p) if max(map(abs, v)) == n]
        box = [v for v in box if next(c for c in v if c) > 0]
        box.sort(key=lambda v: (sum(1 for c in v if c), [-c for c in v]))
        for v in box:
            if v not in seen:
                seen.add(v)
                yield v


def find_witness_direction(pair: AdaptedPair, s: int, mode: str = "auto", tol: float = FLOAT_ZERO_TOL) -> Witness:
    """Direction along which the degree-(s+1) part of the graph difference is non-zero.

    Along such a direction every admissible curve pair has contact order at
    most s, while the straight-line pair reaches s; the latter is checked on
    jets and reported as ``canonical_contact``.
    """
    r = pair.class_r
    if not s < r:
        raise ValueError(f"witness needs s < r (s={s}, r={r})")
    D = pair.Mt.jet(s + 1, mode) - pair.M.jet(s + 1, mode)
    ztol = 0.0 if D.exact else tol
    if not D.truncate(s).is_zero(ztol):
        raise NoWitness(f"graph difference has non-zero terms below degree {s + 1}; s is too large")
    H = D.homogeneous_part(s + 1)
    if H.is_zero(ztol):
        raise NoWitness(f"degree-{s + 1} part vanishes identically; s is too small")
    # a non-zero form of degree d cannot vanish on all of {-d..d}^p
    for w in _candidate_directions(pair.p, s + 1):
        vals = H.evaluate(w)
        for j, v in enumerate(vals):
            if abs(v) > ztol:
                norm = math.sqrt(sum(c * c for c in w))
                unit_value = float(v) / norm ** (s + 1)
                wq = tuple(Fraction(c) for c in w)
                canon = curve_jet([wq], s + 1)
                F, Ft = pair.M.jet(s + 1, mode), pair.Mt.jet(s + 1, mode)
                cc = curve_contact_order(ambient_curve(F, canon), ambient_curve(Ft, canon), s + 1)
                return Witness(w, j, v, unit_value, cc, cc == s)
    raise NoWitness("no direction found")  # pragma: no cover
