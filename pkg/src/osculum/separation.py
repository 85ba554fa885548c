"""Regular separation exponents of pairs of plane curve branches.

Two estimates are offered:

* ``leading_exponent_graph``: the exact exponent of the leading term of
  ``Ft - F`` when both branches are graphs built from powers of x and |x|;
* ``estimate_separation_exponent``: a log-log fit of the distance from a
  point of one branch to the other branch against the distance to the
  contact point.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.stats import linregress
from scipy.optimize import brentq

from .expr import (
    AbsPow,
    Add,
    Const,
    Div,
    Mul,
    Neg,
    Pow,
    SmoothExpr,
    Sub,
    TaylorLeaf,
    Var,
    parse_expr,
    rational_power,
    InexactError,
)
from .manifolds import AdaptedPair, ParamPatch, adapt_to_graphs, graph_pair
from .taylor import OrderResult, order_from_graphs


class UnsupportedShape(ValueError):
    pass


class NoSeparation(ValueError):
    pass


class DegenerateDistance(ValueError):
    pass


class NewtonDivergence(ArithmeticError):
    pass


DIST_FLOOR = 1e-14
SCAN_SAMPLES = 4096
GOLDEN_ITERS = 60


# symbolic leading exponent

def _monomials(e: SmoothExpr, var: str) -> dict:
    """``{(exponent, parity): coeff}`` meaning ``coeff * sgn(x)^parity * |x|^exponent``."""
    if isinstance(e, Const):
        return {(Fraction(0), 0): e.value} if e.value else {}
    if isinstance(e, Var):
        if e.name != var:
            raise UnsupportedShape(f"unexpected variable {e.name!r}")
        return {(Fraction(1), 1): Fraction(1)}
    if isinstance(e, (Add, Sub)):
        out = dict(_monomials(e.a, var))
        sgn = 1 if isinstance(e, Add) else -1
        for k, v in _monomials(e.b, var).items():
            out[k] = out.get(k, 0) + sgn * v
        return {k: v for k, v in out.items() if v != 0}
    if isinstance(e, Neg):
        return {k: -v for k, v in _monomials(e.a, var).items()}
    if isinstance(e, Mul):
        return _mono_mul(_monomials(e.a, var), _monomials(e.b, var))
    if isinstance(e, Div):
        den = _monomials(e.b, var)
        if len(den) != 1 or next(iter(den)) != (0, 0):
            raise UnsupportedShape("division by a non-constant")
        c = den[(0, 0)]
        return {k: v / c for k, v in _monomials(e.a, var).items()}
    if isinstance(e, Pow):
        if e.n < 0:
            raise UnsupportedShape("negative power")
        out = {(Fraction(0), 0): Fraction(1)}
        base = _monomials(e.a, var)
        for _ in range(e.n):
            out = _mono_mul(out, base)
        return out
    if isinstance(e, AbsPow):
        inner = _monomials(e.a, var)
        if len(inner) != 1:
            raise UnsupportedShape("abs of a sum")
        (ex, _), c = next(iter(inner.items()))
        try:
            coef = rational_power(abs(c), e.alpha)
        except InexactError:
            coef = float(abs(c)) ** float(e.alpha)
        return {(ex * e.alpha, 0): coef}
    raise UnsupportedShape(f"unsupported node {type(e).__name__}")


def _mono_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (ea, pa), ca in a.items():
        for (eb, pb), cb in b.items():
            k = (ea + eb, (pa + pb) % 2)
            out[k] = out.get(k, 0) + ca * cb
    return {k: v for k, v in out.items() if v != 0}


def leading_exponent_graph(F, Ft, var: str = "x") -> Fraction:
    """Smallest exponent among the non-cancelling terms of ``Ft - F``."""
    F = parse_expr(F) if isinstance(F, str) else F
    Ft = parse_expr(Ft) if isinstance(Ft, str) else Ft
    terms = _monomials(Sub(Ft, F), var)
    if not terms:
        raise NoSeparation("the two graphs coincide")
    return min(ex for ex, _ in terms)


# numeric estimator

@dataclass
class ExponentFit:
    rho: list[float]
    dist: list[float]
    alpha: float
    stderr: float
    intercept: float
    kind: str = "set-distance"

    @property
    def scale_range(self) -> tuple[float, float]:
        return (min(self.rho), max(self.rho))

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "alpha": self.alpha,
            "stderr": self.stderr,
            "scale_range": list(self.scale_range),
            "n_samples": len(self.rho),
        }

    def samples_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rho", "distance"])
        for r, d in zip(self.rho, self.dist):
            w.writerow([repr(r), repr(d)])
        return buf.getvalue()


def fit_exponent(rho: Sequence[float], dist: Sequence[float], kind: str = "set-distance") -> ExponentFit:
    rho = list(map(float, rho))
    dist = list(map(float, dist))
    if any(b >= a for a, b in zip(rho, rho[1:])):
        raise ValueError("scales must be strictly decreasing")
    if min(dist) <= 0:
        raise DegenerateDistance("non-positive distance sample")
    res = linregress(np.log(rho), np.log(dist))
    return ExponentFit(rho, dist, float(res.slope), float(res.stderr), float(res.intercept), kind)


def _golden(f: Callable[[float], float], a: float, b: float, iters: int = GOLDEN_ITERS) -> float:
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (a + b) / 2


@dataclass
class BranchSampler:
    """A branch ``t -> point(t)``, ``t`` in ``[0, t_max]``, leaving ``contact`` at t = 0.

    ``point`` must accept numpy arrays.  ``residual(x, y)`` is the defining
    equation of the ambient algebraic set.
    """

    name: str
    point: Callable
    t_max: float
    residual: Callable | None = None
    contact: tuple = (0.0, 0.0)

    def xy(self, t) -> np.ndarray:
        return np.asarray(self.point(t), dtype=float)

    def radius(self, t: float) -> float:
        x, y = self.xy(t)
        return math.hypot(x - self.contact[0], y - self.contact[1])

    def param_at_distance(self, rho: float) -> float:
        if self.radius(self.t_max) < rho:
            raise ValueError(f"branch {self.name} does not reach distance {rho}")
        return brentq(lambda t: self.radius(t) - rho, 0.0, self.t_max, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)

    def dist_to(self, q: Sequence[float]) -> float:
        """Distance from ``q`` to the branch: coarse scan, then golden-section refinement."""
        qx, qy = float(q[0]), float(q[1])
        ts = np.linspace(0.0, self.t_max, SCAN_SAMPLES)
        px, py = self.xy(ts)
        d2 = (px - qx) ** 2 + (py - qy) ** 2
        i = int(np.argmin(d2))
        lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, SCAN_SAMPLES - 1)]

        def f(t):
            x, y = self.xy(t)
            return (x - qx) ** 2 + (y - qy) ** 2

        t = _golden(f, lo, hi)
        return math.sqrt(min(f(t), d2[i]))

    def max_residual(self, n: int = 200) -> float:
        if self.residual is None:
            return 0.0
        ts = np.linspace(0.0, self.t_max, n)
        x, y = self.xy(ts)
        return float(np.max(np.abs(self.residual(x, y))))


def default_scales(exponent: float, coarsest: int = 3, finest: int = 12) -> list[float]:
    """Powers of two ``2^-coarsest .. 2^-j`` keeping ``rho^exponent`` above ~1e-11."""
    j = min(finest, max(coarsest + 5, int(36.5 / exponent)))
    return [2.0**-i for i in range(coarsest, j + 1)]


def estimate_separation_exponent(
    X: BranchSampler,
    Y: BranchSampler,
    scales: Sequence[float] | None = None,
    seed: int = 0,
) -> ExponentFit:
    """Fit ``log dist(x, Y)`` against ``log |x - x0|`` for ``x`` on X.

    ``seed`` is accepted for interface uniformity; the procedure is
    deterministic.
    """
    if scales is None:
        scales = [2.0**-i for i in range(3, 13)]
    scales = sorted(map(float, scales), reverse=True)
    dist = []
    for rho in scales:
        x = X.xy(X.param_at_distance(rho))
        d = Y.dist_to(x)
        if d < DIST_FLOOR:
            raise DegenerateDistance(f"distance {d:.3e} at scale {rho:.3e} is below {DIST_FLOOR}")
        dist.append(d)
    return fit_exponent(scales, dist)


def estimate_graph_exponent(F: Callable, Ft: Callable, scales: Sequence[float] | None = None) -> ExponentFit:
    """Fit ``log |Ft(x) - F(x)|`` against ``log x``."""
    if scales is None:
        scales = [2.0**-i for i in range(3, 13)]
    scales = sorted(map(float, scales), reverse=True)
    dist = [abs(float(Ft(x)) - float(F(x))) for x in scales]
    if min(dist) < DIST_FLOOR:
        raise DegenerateDistance("graph difference underflows")
    return fit_exponent(scales, dist, kind="graph-difference")


# the branch Z = {y^d + y x^(d-1) + x^s = 0} near the origin

def _check_ds(d: int, s: int):
    if not (isinstance(d, int) and isinstance(s, int) and 1 < d < s):
        raise ValueError(f"need integers 1 < d < s, got d={d}, s={s}")


def tworzewski_radius(d: int, s: int, branch: str = "tangent") -> float:
    """|x| below which the Newton iteration for ``branch`` contracts ("both" takes the smaller)."""
    _check_ds(d, s)
    e = (d - 1) * (s - d)
    r_tan = min((0.5 * (2 / 3) ** d) ** (1 / e), (1 / (2 * d) * (2 / 3) ** (d - 1)) ** (1 / e))
    if branch == "tangent" or d % 2:
        return r_tan
    # transversal branch: z near -1, perturbation x^(s-d) enters d-fold
    r_tr = (1 / (4 * d * 2**d)) ** (1 / (s - d))
    return r_tr if branch == "transversal" else min(r_tan, r_tr)


def _newton(g, dg, z0, iters: int = 100):
    z = z0
    for _ in range(iters):
        step = g(z) / dg(z)
        z = z - step
        if np.all(np.abs(step) <= 1e-16 * (1 + np.abs(z))):
            return z
    if np.all(np.abs(g(z)) < 1e-15):
        return z
    raise NewtonDivergence("Newton iteration did not converge")


def tworzewski_z(d: int, s: int, x):
    """``z(x)`` with ``(z - 1)^d x^((d-1)(s-d)) + z = 0``, ``z(0) = 0``; real or complex x."""
    _check_ds(d, s)
    x = np.asarray(x)
    if np.any(np.abs(x) >= tworzewski_radius(d, s)):
        raise NewtonDivergence(f"|x| outside convergence radius {tworzewski_radius(d, s):.4f}")
    e = (d - 1) * (s - d)
    xe = x**e
    return _newton(lambda z: (z - 1) ** d * xe + z, lambda z: d * (z - 1) ** (d - 1) * xe + 1, np.zeros_like(x, dtype=x.dtype if np.iscomplexobj(x) else float))


def tworzewski_z2(d: int, s: int, x):
    """Second root ``z~(x)`` with ``(z - x^(s-d))^d + z = 0``, ``z~(0) = -1`` (even d only)."""
    _check_ds(d, s)
    if d % 2:
        raise ValueError("the transversal branch exists only for even d")
    x = np.asarray(x)
    if np.any(np.abs(x) >= tworzewski_radius(d, s, "transversal")):
        raise NewtonDivergence("|x| outside convergence radius")
    w = x ** (s - d)
    z0 = -np.ones_like(x, dtype=complex if np.iscomplexobj(x) else float)
    return _newton(lambda z: (z - w) ** d + z, lambda z: d * (z - w) ** (d - 1) + 1, z0)


def tworzewski_solve(d: int, s: int, x) -> dict:
    """Branches of Z through the origin evaluated at ``x``.

    ``tangent``: ``y = x^(s-d+1) (z(x) - 1)``; for even d also
    ``transversal``: ``y = x z~(x) - x^(s-d+1)``.  Each carries its residual.
    """
    a = s - d + 1
    x = np.asarray(x, dtype=float)
    z = tworzewski_z(d, s, x)
    y = x**a * (z - 1)
    out = {"tangent": y, "tangent_residual": tworzewski_residual(d, s, x, y)}
    if d % 2 == 0:
        z2 = tworzewski_z2(d, s, x)
        y2 = x * z2 - x**a
        out["transversal"] = y2
        out["transversal_residual"] = tworzewski_residual(d, s, x, y2)
    for k in ("tangent_residual", "transversal_residual"):
        if k in out and np.any(np.abs(out[k]) >= 1e-12):
            raise NewtonDivergence(f"{k} too large")
    return out


def tworzewski_residual(d: int, s: int, x, y):
    return y**d + y * x ** (d - 1) + x**s


def taylor_coefficients(func: Callable, order: int, radius: float, n: int = 64) -> list[float]:
    """Taylor coefficients at 0 of an analytic ``func`` from samples on a circle.

    Discrete Cauchy integral (an FFT of ``func`` on ``|x| = radius``).
    """
    if n <= order:
        raise ValueError("need more samples than coefficients")
    w = radius * np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.asarray(func(w), dtype=complex)
    c = np.fft.fft(vals) / n
    return [float(c[k].real / radius**k) for k in range(order + 1)]


def extract_branch_jet(d: int, s: int, order: int = 16, tol: float = 1e-8, which: str = "tangent") -> list[float]:
    """Taylor coefficients of ``z`` (tangent) or ``z~`` (transversal); |c| < tol becomes 0."""
    R = 0.5 * tworzewski_radius(d, s, which)
    f = (lambda w: tworzewski_z(d, s, w)) if which == "tangent" else (lambda w: tworzewski_z2(d, s, w))
    coeffs = taylor_coefficients(f, order, R)
    return [0.0 if abs(c) < tol else c for c in coeffs]


def tworzewski_graph(d: int, s: int, order: int = 16) -> SmoothExpr:
    """``x^(s-d+1) * (z(x) - 1)`` with ``z`` a Taylor leaf from extracted coefficients."""
    a = s - d + 1
    z = TaylorLeaf("z", "x", tuple(extract_branch_jet(d, s, order)), lambda x: float(tworzewski_z(d, s, x)))
    return Mul(Pow(Var("x"), a), Sub(z, Const(Fraction(1))))


def tworzewski_pair(d: int, s: int, order: int = 16) -> AdaptedPair:
    N = ParamPatch.make(["x", "0"], ["x"])
    Z = ParamPatch.make([Var("x"), tworzewski_graph(d, s, order)], ["x"])
    return adapt_to_graphs(N, Z, (0, 0))


def transversal_slope(d: int, s: int) -> float:
    """Slope at 0 of the second branch, from its extracted Taylor coefficients."""
    c = extract_branch_jet(d, s, 4, which="transversal")
    # y~ = x z~(x) - x^(s-d+1): slope is z~(0), minus 1 when s - d + 1 == 1
    return c[0] - (1.0 if s - d + 1 == 1 else 0.0)


# catalog

@dataclass
class CatalogEntry:
    name: str
    params: dict
    equation: str
    X: BranchSampler
    Y: BranchSampler
    exponent: Fraction
    order: int | None = None
    scales: list[float] = field(default_factory=list)
    graphs: tuple | None = None  # (F, Ft) expressions in x
    pair_factory: Callable[[], AdaptedPair] | None = None

    def pair(self) -> AdaptedPair | None:
        if self.pair_factory is not None:
            return self.pair_factory()
        if self.graphs is not None:
            return graph_pair(*self.graphs)
        return None

    def residual_max(self) -> float:
        return max(self.X.max_residual(), self.Y.max_residual())


def _colley_kennedy(N: int) -> CatalogEntry:
    if not isinstance(N, int) or N < 1:
        raise ValueError("N must be a positive integer")
    half = N + 0.5
    X = BranchSampler("C-", lambda t: (t, t**N - np.power(t, half)), 0.5, lambda x, y: (y - x**N) ** 2 - x ** (2 * N + 1))
    Y = BranchSampler("C+", lambda t: (t, t**N + np.power(t, half)), 0.5, X.residual)
    F = f"x^{N} - abs(x)^({2 * N + 1}/2)"
    Ft = f"x^{N} + abs(x)^({2 * N + 1}/2)"
    exp = Fraction(2 * N + 1, 2)
    return CatalogEntry(
        "colley_kennedy", {"N": N}, f"(y - x^{N})^2 = x^{2 * N + 1}", X, Y, exp, N,
        default_scales(float(exp)), (parse_expr(F), parse_expr(Ft)),
    )


def _quatrefoil() -> CatalogEntry:
    def res(x, y):
        return (x * y) ** 2 - 0.25 * (x**2 + y**2) ** 3

    def petal(phi):
        return np.cos(phi) * np.sin(2 * phi), np.sin(phi) * np.sin(2 * phi)

    X = BranchSampler("petal(0+)", lambda t: petal(t), 0.5, res)
    Y = BranchSampler("petal(pi-)", lambda t: petal(np.pi - t), 0.5, res)
    return CatalogEntry("quatrefoil", {}, "(xy)^2 = (x^2 + y^2)^3 / 4", X, Y, Fraction(2), None, default_scales(2.0))


def _cardioid() -> CatalogEntry:
    def res(x, y):
        return (x**2 + y**2 - 0.5 * x) ** 2 - 0.25 * (x**2 + y**2)

    def at(phi, eps):
        r = np.sin(eps / 2) ** 2  # (1 + cos(phi)) / 2 at phi = pi +- eps, without cancellation
        return r * np.cos(phi), r * np.sin(phi)

    X = BranchSampler("y<=0", lambda t: at(np.pi + t, t), 1.0, res)
    Y = BranchSampler("y>=0", lambda t: at(np.pi - t, t), 1.0, res)
    return CatalogEntry("cardioid", {}, "(x^2 + y^2 - x/2)^2 = (x^2 + y^2) / 4", X, Y, Fraction(3, 2), None,
        # corrections are O(rho) here, so the fit starts finer than elsewhere
        default_scales(1.5, 6, 18))


def _tworzewski(d: int, s: int) -> CatalogEntry:
    _check_ds(d, s)
    tmax = 0.5 * tworzewski_radius(d, s)
    res = lambda x, y: tworzewski_residual(d, s, x, y)  # noqa: E731
    X = BranchSampler("N", lambda t: (t, np.zeros_like(np.asarray(t, dtype=float))), tmax, lambda x, y: y)
    Y = BranchSampler(
        "Z", lambda t: (t, np.asarray(t, dtype=float) ** (s - d + 1) * (tworzewski_z(d, s, np.asarray(t, dtype=float)) - 1)), tmax, res
    )
    exp = Fraction(s - d + 1)
    return CatalogEntry(
        "tworzewski", {"d": d, "s": s}, f"y^{d} + y x^{d - 1} + x^{s} = 0 vs y = 0", X, Y, exp, s - d,
        default_scales(float(exp), max(3, math.ceil(-math.log2(tmax)) + 1)), None, lambda: tworzewski_pair(d, s),
    )


CATALOG_NAMES = ("colley_kennedy", "quatrefoil", "cardioid", "tworzewski")


def catalog(name: str, **params) -> CatalogEntry:
    if name == "colley_kennedy":
        return _colley_kennedy(int(params.get("N", 2)))
    if name == "quatrefoil":
        return _quatrefoil()
    if name == "cardioid":
        return _cardioid()
    if name == "tworzewski":
        if "d" not in params or "s" not in params:
            raise ValueError("tworzewski needs parameters d and s")
        return _tworzewski(int(params["d"]), int(params["s"]))
    raise KeyError(f"unknown catalog entry {name!r}; known: {', '.join(CATALOG_NAMES)}")


def order_vs_exponent(entry: CatalogEntry, scales: Sequence[float] | None = None) -> dict:
    """Tangency order s next to the fitted separation exponent, and whether it equals s + 1."""
    pair = entry.pair()
    if pair is None:
        raise ValueError(f"{entry.name} has no graph presentation")
    res = order_from_graphs(pair, 16, "float" if entry.name == "tworzewski" else "auto")
    fit = estimate_separation_exponent(entry.X, entry.Y, scales or entry.scales)
    s = res.s
    return {
        "order": s if isinstance(s, int) else str(s),
        "saturated_by_class": res.saturated_by_class,
        "exponent_fit": fit.alpha,
        "exponent_exact": str(entry.exponent),
        "exponent_is_s_plus_1": isinstance(s, int) and abs(fit.alpha - (s + 1)) <= 0.05,
    }
