"""Order of tangency by comparing Taylor polynomials of graph maps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .jet import AtLeast, vanishing_order
from .manifolds import AdaptedPair, NoCommonTangent, ParamPatch, adapt_to_graphs

DEFAULT_K_MAX = 16
FLOAT_ZERO_TOL = 1e-10


@dataclass(frozen=True)
class OrderResult:
    s: int | AtLeast
    saturated_by_class: bool = False
    class_r: float | int = math.inf

    def at_least(self, k: int) -> bool:
        if isinstance(self.s, AtLeast):
            return k <= self.s.bound
        return k <= self.s

    def as_dict(self) -> dict:
        return {
            "order": str(self.s) if isinstance(self.s, AtLeast) else self.s,
            "saturated_by_class": self.saturated_by_class,
            "class_r": "inf" if self.class_r == math.inf else self.class_r,
        }


def order_from_graphs(
    pair: AdaptedPair,
    k_max: int = DEFAULT_K_MAX,
    mode: str = "auto",
    tol: float = FLOAT_ZERO_TOL,
) -> OrderResult:
    """Largest k with equal degree-k Taylor polynomials of the two graph maps.

    The comparison stops at the smoothness class r of the pair; if all
    coefficients up to degree r agree the result is r with
    ``saturated_by_class`` set.  Float coefficients count as zero below ``tol``.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    r = pair.class_r
    K = int(min(k_max + 1, r))
    diff = pair.Mt.jet(K, mode) - pair.M.jet(K, mode)
    nu = vanishing_order(diff, 0.0 if diff.exact else tol)
    if isinstance(nu, int):
        return OrderResult(nu - 1, False, r)
    if K <= k_max:
        # the class bound, not a differing coefficient, ended the search
        return OrderResult(K, True, r)
    return OrderResult(AtLeast(k_max), False, r)


def tangency_order(
    M: ParamPatch,
    Mt: ParamPatch,
    x0: Sequence,
    k_max: int = DEFAULT_K_MAX,
    mode: str = "auto",
) -> OrderResult:
    try:
        pair = adapt_to_graphs(M, Mt, x0, mode)
    except NoCommonTangent:
        return OrderResult(0, False, min(M.class_r, Mt.class_r))
    return order_from_graphs(pair, k_max, mode)
