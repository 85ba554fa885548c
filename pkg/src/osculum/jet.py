"""Truncated multivariate Taylor jets.

A jet stores, for each output component, a map from multi-indices to
Taylor coefficients ``d^beta f(base) / beta!``.  Coefficients are either
``Fraction`` (exact mode) or ``float``; the arithmetic below never mixes
the two on its own, so a jet built from exact inputs stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Sequence


class DimensionError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class AtLeast:
    """Lower bound sentinel: the true value is ``>= bound``."""

    bound: int

    def __str__(self):
        return f">={self.bound}"


def degree(beta: Sequence[int]) -> int:
    return sum(beta)


def grlex_key(beta: Sequence[int]):
    # degree ascending, then lexicographically descending (u1^2 before u1*u2)
    return (sum(beta), tuple(-b for b in beta))


def multi_indices(p: int, k: int) -> list[tuple[int, ...]]:
    """All multi-indices in ``p`` variables with degree <= k, graded-lex."""
    out = [beta for beta in product(range(k + 1), repeat=p) if sum(beta) <= k]
    out.sort(key=grlex_key)
    return out


def unit(p: int, j: int) -> tuple[int, ...]:
    return tuple(1 if i == j else 0 for i in range(p))


def factorial_multi(beta: Sequence[int]) -> int:
    out = 1
    for b in beta:
        out *= math.factorial(b)
    return out


def is_exact_number(c) -> bool:
    return isinstance(c, (int, Fraction)) and not isinstance(c, bool)


def _clean(d: dict) -> dict:
    return {k: v for k, v in d.items() if v != 0}


def _mul_dicts(a: dict, b: dict, k: int) -> dict:
    out: dict = {}
    for alpha, x in a.items():
        da = sum(alpha)
        if da > k:
            continue
        for beta, y in b.items():
            if da + sum(beta) > k:
                continue
            key = tuple(i + j for i, j in zip(alpha, beta))
            out[key] = out.get(key, 0) + x * y
    return _clean(out)


class Jet:
    """Truncated Taylor expansion of a map ``R^p -> R^t`` about ``base``.

    Treat instances as immutable.
    """

    __slots__ = ("base", "order", "comps")

    def __init__(self, base: Sequence, order: int, comps: Iterable[dict]):
        if order < 0:
            raise ValueError("truncation order must be non-negative")
        self.base = tuple(base)
        self.order = int(order)
        p = len(self.base)
        cs = []
        for c in comps:
            d = {}
            for beta, v in c.items():
                beta = tuple(beta)
                if len(beta) != p:
                    raise DimensionError(f"multi-index {beta} has wrong length for p={p}")
                if sum(beta) <= self.order and v != 0:
                    d[beta] = v
            cs.append(d)
        if not cs:
            raise DimensionError("a jet needs at least one component")
        self.comps = tuple(cs)

    # construction helpers

    @classmethod
    def constant(cls, value, base: Sequence, order: int, width: int = 1) -> Jet:
        zero = (0,) * len(base)
        return cls(base, order, [{zero: value} for _ in range(width)])

    @classmethod
    def variable(cls, j: int, base: Sequence, order: int) -> Jet:
        p = len(base)
        d = {(0,) * p: base[j]}
        if order >= 1:
            d[unit(p, j)] = Fraction(1) if is_exact_number(base[j]) else 1.0
        return cls(base, order, [d])

    @classmethod
    def stack(cls, jets: Sequence[Jet]) -> Jet:
        first = jets[0]
        for j in jets[1:]:
            if j.base != first.base:
                raise DimensionError("cannot stack jets with different base points")
        order = min(j.order for j in jets)
        comps = [c for j in jets for c in j.comps]
        return cls(first.base, order, comps)

    # basic shape

    @property
    def nvars(self) -> int:
        return len(self.base)

    @property
    def width(self) -> int:
        return len(self.comps)

    @property
    def exact(self) -> bool:
        return all(is_exact_number(v) for c in self.comps for v in c.values()) and all(
            is_exact_number(b) for b in self.base
        )

    def coeff(self, i: int, beta: Sequence[int]):
        return self.comps[i].get(tuple(beta), 0)

    def component(self, i: int) -> Jet:
        return Jet(self.base, self.order, [self.comps[i]])

    def value(self) -> tuple:
        zero = (0,) * self.nvars
        return tuple(c.get(zero, 0) for c in self.comps)

    def truncate(self, k: int) -> Jet:
        return Jet(self.base, min(k, self.order), self.comps)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(v) <= tol for c in self.comps for v in c.values())

    def homogeneous_part(self, d: int) -> Jet:
        return Jet(self.base, self.order, [{b: v for b, v in c.items() if sum(b) == d} for c in self.comps])

    def terms(self, i: int = 0) -> list[tuple[tuple[int, ...], object]]:
        """Non-zero coefficients of component ``i`` in graded-lex order."""
        return sorted(self.comps[i].items(), key=lambda kv: grlex_key(kv[0]))

    # arithmetic

    def _check(self, other: Jet):
        if not isinstance(other, Jet):
            raise TypeError(f"expected Jet, got {type(other).__name__}")
        if self.nvars != other.nvars:
            raise DimensionError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
        if self.base != other.base:
            raise DimensionError("jets are expanded about different base points")
        if self.width != other.width and 1 not in (self.width, other.width):
            raise DimensionError(f"width mismatch: {self.width} vs {other.width}")

    def _pairs(self, other: Jet):
        n = max(self.width, other.width)
        a = self.comps * n if self.width == 1 else self.comps
        b = other.comps * n if other.width == 1 else other.comps
        return zip(a, b)

    def __add__(self, other):
        if not isinstance(other, Jet):
            return self + Jet.constant(other, self.base, self.order, self.width)
        self._check(other)
        out = []
        for a, b in self._pairs(other):
            d = dict(a)
            for k, v in b.items():
                d[k] = d.get(k, 0) + v
            out.append(d)
        return Jet(self.base, min(self.order, other.order), out)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.base, self.order, [{k: -v for k, v in c.items()} for c in self.comps])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return self.scale(other)
        self._check(other)
        k = min(self.order, other.order)
        return Jet(self.base, k, [_mul_dicts(a, b, k) for a, b in self._pairs(other)])

    __rmul__ = __mul__

    def scale(self, c) -> Jet:
        return Jet(self.base, self.order, [{k: v * c for k, v in d.items()} for d in self.comps])

    def __pow__(self, n: int) -> Jet:
        if not isinstance(n, int) or n < 0:
            raise ValueError("jets only support non-negative integer powers; use series_apply")
        one = Fraction(1) if self.exact else 1.0
        result = Jet.constant(one, self.base, self.order, self.width)
        acc = self
        while n:
            if n & 1:
                result = result * acc
            n >>= 1
            if n:
                acc = acc * acc
        return result

    def derivative(self, j: int) -> Jet:
        """Partial derivative in variable ``j``; truncation order drops by one."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        out = []
        for c in self.comps:
            d = {}
            for beta, v in c.items():
                if beta[j] == 0:
                    continue
                nb = list(beta)
                nb[j] -= 1
                d[tuple(nb)] = v * beta[j]
            out.append(d)
        return Jet(self.base, self.order - 1, out)

    def evaluate(self, offset: Sequence) -> tuple:
        """Value of the Taylor polynomial at ``base + offset``."""
        out = []
        for c in self.comps:
            s = 0
            for beta, v in c.items():
                term = v
                for h, b in zip(offset, beta):
                    if b:
                        term = term * h**b
                s = s + term
            out.append(s)
        return tuple(out)

    def to_float(self) -> Jet:
        return Jet(
            tuple(float(b) for b in self.base),
            self.order,
            [{k: float(v) for k, v in c.items()} for c in self.comps],
        )

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return (
            self.base == other.base
            and self.order == other.order
            and self.comps == other.comps
        )

    __hash__ = None

    def __repr__(self):
        parts = []
        for i in range(self.width):
            parts.append(" + ".join(f"{v}*u^{b}" for b, v in self.terms(i)) or "0")
        return f"Jet(base={self.base}, order={self.order}, [{'; '.join(parts)}])"


def jet_add(a: Jet, b: Jet) -> Jet:
    return a + b


def jet_sub(a: Jet, b: Jet) -> Jet:
    return a - b


def jet_mul(a: Jet, b: Jet) -> Jet:
    return a * b


def jet_compose(outer: Jet, inner: Jet, tol: float = 1e-12) -> Jet:
    """Jet of ``outer(inner(u))``.

    ``outer`` is expanded in q variables about a point b; ``inner`` must have
    width q and value b at its own base point.
    """
    if inner.width != outer.nvars:
        raise DimensionError(f"inner width {inner.width} != outer variable count {outer.nvars}")
    q = outer.nvars
    val = inner.value()
    for i in range(q):
        if abs(val[i] - outer.base[i]) > tol:
            raise DimensionError("inner jet does not hit the outer base point")
    k = min(outer.order, inner.order)
    zero = (0,) * inner.nvars
    shifted = [{b: v for b, v in c.items() if b != zero} for c in inner.comps]
    one = Fraction(1) if inner.exact and outer.exact else 1.0
    powers: list[list[dict]] = [[{zero: one}] for _ in range(q)]

    def power(i: int, e: int) -> dict:
        pw = powers[i]
        while len(pw) <= e:
            pw.append(_mul_dicts(pw[-1], shifted[i], k))
        return pw[e]

    out = []
    for c in outer.comps:
        acc: dict = {}
        for beta, v in c.items():
            if sum(beta) > k:
                continue
            term = {zero: v}
            for i, e in enumerate(beta):
                if e:
                    term = _mul_dicts(term, power(i, e), k)
            for key, x in term.items():
                acc[key] = acc.get(key, 0) + x
        out.append(_clean(acc))
    return Jet(inner.base, k, out)


def series_apply(coeffs: Callable[[int], object], j: Jet) -> Jet:
    """Compose a univariate power series with a scalar jet.

    ``coeffs(n)`` is the n-th Taylor coefficient of the outer function at
    the value of ``j``; evaluation is Horner in the non-constant part.
    """
    if j.width != 1:
        raise DimensionError("series_apply needs a scalar jet")
    zero = (0,) * j.nvars
    delta = Jet(j.base, j.order, [{b: v for b, v in j.comps[0].items() if b != zero}])
    k = j.order
    acc = Jet.constant(coeffs(k), j.base, k)
    for n in range(k - 1, -1, -1):
        acc = acc * delta + coeffs(n)
    return acc


def vanishing_order(j: Jet, tol: float = 0.0) -> int | AtLeast:
    """Total degree of the first non-zero coefficient, minimised over components."""
    best = None
    for c in j.comps:
        for beta, v in c.items():
            if abs(v) > tol:
                d = sum(beta)
                if best is None or d < best:
                    best = d
    if best is None:
        return AtLeast(j.order + 1)
    return best
