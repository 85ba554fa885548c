"""Expression trees for scalar functions, with a parser and Taylor jets.

Grammar::

    expr     := term (('+' | '-') term)*
    term     := factor (('*' | '/') factor)*
    factor   := '-' factor | base ('^' exponent)?
    base     := number | ident | '(' expr ')' | FUNC '(' expr ')'
    exponent := integer | '(' integer '/' integer ')'

``FUNC`` is one of abs, sqrt, sin, cos.  A fractional exponent is only
legal directly on ``abs(...)``.  Identifiers are x, y, z and u1..u9.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .jet import AtLeast, Jet, is_exact_number, series_apply

VARIABLES = ("x", "y", "z") + tuple(f"u{i}" for i in range(1, 10))
FUNCTIONS = ("abs", "sqrt", "sin", "cos")
INF = math.inf


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifier(ExprSyntaxError):
    pass


class SmoothnessExceeded(ValueError):
    """Requested Taylor order exceeds the smoothness class at the point."""

    def __init__(self, requested: int, available):
        super().__init__(f"requested order {requested} exceeds smoothness class {available}")
        self.requested = requested
        self.available = available


class InexactError(ArithmeticError):
    """An exact-mode computation would need an irrational number."""


class DomainError(ValueError):
    pass


# nodes


class SmoothExpr:
    __slots__ = ()

    def __str__(self):
        return to_text(self)

    def __add__(self, o):
        return Add(self, _wrap(o))

    def __radd__(self, o):
        return Add(_wrap(o), self)

    def __sub__(self, o):
        return Sub(self, _wrap(o))

    def __rsub__(self, o):
        return Sub(_wrap(o), self)

    def __mul__(self, o):
        return Mul(self, _wrap(o))

    def __rmul__(self, o):
        return Mul(_wrap(o), self)

    def __truediv__(self, o):
        return Div(self, _wrap(o))

    def __neg__(self):
        return Neg(self)

    def __pow__(self, n: int):
        return Pow(self, n)


def _wrap(o) -> SmoothExpr:
    if isinstance(o, SmoothExpr):
        return o
    return Const(Fraction(o))


@dataclass(frozen=True, eq=True, repr=True)
class Const(SmoothExpr):
    value: Fraction


@dataclass(frozen=True)
class Var(SmoothExpr):
    name: str


@dataclass(frozen=True)
class Add(SmoothExpr):
    a: SmoothExpr
    b: SmoothExpr


@dataclass(frozen=True)
class Sub(SmoothExpr):
    a: SmoothExpr
    b: SmoothExpr


@dataclass(frozen=True)
class Mul(SmoothExpr):
    a: SmoothExpr
    b: SmoothExpr


@dataclass(frozen=True)
class Div(SmoothExpr):
    a: SmoothExpr
    b: SmoothExpr


@dataclass(frozen=True)
class Neg(SmoothExpr):
    a: SmoothExpr


@dataclass(frozen=True)
class Pow(SmoothExpr):
    a: SmoothExpr
    n: int


@dataclass(frozen=True)
class AbsPow(SmoothExpr):
    """``|a|^alpha`` for rational ``alpha > 0``; plain ``abs`` has alpha = 1."""

    a: SmoothExpr
    alpha: Fraction


@dataclass(frozen=True)
class Sqrt(SmoothExpr):
    a: SmoothExpr


@dataclass(frozen=True)
class Sin(SmoothExpr):
    a: SmoothExpr


@dataclass(frozen=True)
class Cos(SmoothExpr):
    a: SmoothExpr


@dataclass(frozen=True, eq=False)
class TaylorLeaf(SmoothExpr):
    """A function of one variable known through its Taylor coefficients at 0.

    Used for branches obtained numerically.  ``coeffs[n]`` is the n-th
    coefficient, valid up to ``len(coeffs) - 1``; ``func`` gives point values.
    Not part of the text grammar.
    """

    name: str
    var: str
    coeffs: tuple
    func: Callable[[float], float] | None = None


# parser

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d*)?|\.\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(src: str):
    toks = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            break
        if m.group(1) is not None:
            toks.append(("num", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            toks.append(("id", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            toks.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    toks.append(("end", "", len(src)))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, op: str):
        kind, text, pos = self.take()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"expected {op!r}, found {text or 'end of input'!r}", pos)

    def is_op(self, op: str) -> bool:
        kind, text, _ = self.peek()
        return kind == "op" and text == op

    def parse(self) -> SmoothExpr:
        e = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r}", pos)
        return e

    def expr(self):
        e = self.term()
        while self.is_op("+") or self.is_op("-"):
            op = self.take()[1]
            r = self.term()
            e = Add(e, r) if op == "+" else Sub(e, r)
        return e

    def term(self):
        e = self.factor()
        while self.is_op("*") or self.is_op("/"):
            op = self.take()[1]
            r = self.factor()
            e = Mul(e, r) if op == "*" else Div(e, r)
        return e

    def factor(self):
        if self.is_op("-"):
            self.take()
            return Neg(self.factor())
        b, is_abs = self.base()
        if self.is_op("^"):
            pos = self.take()[2]
            num, den = self.exponent()
            if is_abs and num == 0:
                raise ExprSyntaxError("exponent of abs must be positive", pos)
            if den == 1:
                if is_abs:
                    return AbsPow(b.a, Fraction(num))
                return Pow(b, num)
            if not is_abs:
                raise ExprSyntaxError("fractional exponents are only allowed on abs(...)", pos)
            return AbsPow(b.a, Fraction(num, den))
        return b

    def exponent(self):
        kind, text, pos = self.take()
        if kind == "num":
            if not text.isdigit():
                raise ExprSyntaxError("exponent must be an integer", pos)
            return int(text), 1
        if kind == "op" and text == "(":
            k1, n, p1 = self.take()
            if k1 != "num" or not n.isdigit():
                raise ExprSyntaxError("expected integer numerator", p1)
            self.expect("/")
            k2, d, p2 = self.take()
            if k2 != "num" or not d.isdigit() or int(d) == 0:
                raise ExprSyntaxError("expected non-zero integer denominator", p2)
            self.expect(")")
            return int(n), int(d)
        raise ExprSyntaxError(f"bad exponent {text!r}", pos)

    def base(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Const(Fraction(text)), False
        if kind == "id":
            if text in FUNCTIONS:
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                if text == "abs":
                    return AbsPow(inner, Fraction(1)), True
                return {"sqrt": Sqrt, "sin": Sin, "cos": Cos}[text](inner), False
            if text in VARIABLES:
                return Var(text), False
            raise UnknownIdentifier(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            e = self.expr()
            self.expect(")")
            return e, False
        raise ExprSyntaxError(f"unexpected {text or 'end of input'!r}", pos)


def parse_expr(source: str) -> SmoothExpr:
    return _Parser(source).parse()


# printer

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e) -> int:
    if isinstance(e, AbsPow) and e.alpha != 1:
        return 4
    return _PREC.get(type(e), 5)


def _const_text(v: Fraction) -> str:
    d = v.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if v.denominator == 1:
        s = str(v.numerator)
    elif d == 1:
        s = format(Decimal(v.numerator) / Decimal(v.denominator), "f")
    else:
        s = f"({abs(v.numerator)}/{v.denominator})"
        return f"(-{s})" if v < 0 else s
    return f"({s})" if v < 0 else s


def to_text(e: SmoothExpr) -> str:
    """Render ``e`` so that ``parse_expr(to_text(e)) == e`` for parsed trees."""
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, TaylorLeaf):
        return f"{e.name}({e.var})"
    if isinstance(e, (Add, Sub, Mul, Div)):
        op = {Add: " + ", Sub: " - ", Mul: "*", Div: "/"}[type(e)]
        p = _prec(e)
        left = to_text(e.a)
        if _prec(e.a) < p:
            left = f"({left})"
        right = to_text(e.b)
        if _prec(e.b) <= p:
            right = f"({right})"
        return left + op + right
    if isinstance(e, Neg):
        inner = to_text(e.a)
        if _prec(e.a) < 3:
            inner = f"({inner})"
        return "-" + inner
    if isinstance(e, Pow):
        inner = to_text(e.a)
        if _prec(e.a) < 5 or (isinstance(e.a, Const) and e.a.value.denominator != 1):
            inner = f"({inner})"
        return f"{inner}^{e.n}"
    if isinstance(e, AbsPow):
        s = f"abs({to_text(e.a)})"
        if e.alpha == 1:
            return s
        if e.alpha.denominator == 1:
            return f"{s}^{e.alpha.numerator}"
        return f"{s}^({e.alpha.numerator}/{e.alpha.denominator})"
    if isinstance(e, (Sqrt, Sin, Cos)):
        name = {Sqrt: "sqrt", Sin: "sin", Cos: "cos"}[type(e)]
        return f"{name}({to_text(e.a)})"
    raise TypeError(f"not an expression node: {e!r}")


# structural helpers


def children(e: SmoothExpr) -> tuple:
    if isinstance(e, (Add, Sub, Mul, Div)):
        return (e.a, e.b)
    if isinstance(e, (Neg, Pow, AbsPow, Sqrt, Sin, Cos)):
        return (e.a,)
    return ()


def free_variables(e: SmoothExpr) -> tuple[str, ...]:
    """Variables occurring in ``e``, in canonical order."""
    seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Var):
            seen.add(n.name)
        elif isinstance(n, TaylorLeaf):
            seen.add(n.var)
        stack.extend(children(n))
    order = {v: i for i, v in enumerate(VARIABLES)}
    return tuple(sorted(seen, key=lambda v: order.get(v, len(order))))


def substitute(e: SmoothExpr, mapping: Mapping[str, SmoothExpr]) -> SmoothExpr:
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, TaylorLeaf):
        if e.var in mapping and mapping[e.var] != Var(e.var):
            raise ValueError("cannot substitute into a Taylor leaf")
        return e
    if isinstance(e, Const):
        return e
    kids = tuple(substitute(c, mapping) for c in children(e))
    if isinstance(e, Pow):
        return Pow(kids[0], e.n)
    if isinstance(e, AbsPow):
        return AbsPow(kids[0], e.alpha)
    return type(e)(*kids)


def affine_coefficients(e: SmoothExpr, variables: Sequence[str]):
    """``(const, [coef_j])`` if ``e`` is syntactically affine in ``variables``, else None."""
    n = len(variables)

    def go(node):
        if isinstance(node, Const):
            return node.value, [Fraction(0)] * n
        if isinstance(node, Var):
            if node.name not in variables:
                return None
            lin = [Fraction(0)] * n
            lin[variables.index(node.name)] = Fraction(1)
            return Fraction(0), lin
        if isinstance(node, (Add, Sub)):
            a, b = go(node.a), go(node.b)
            if a is None or b is None:
                return None
            s = 1 if isinstance(node, Add) else -1
            return a[0] + s * b[0], [x + s * y for x, y in zip(a[1], b[1])]
        if isinstance(node, Neg):
            a = go(node.a)
            return None if a is None else (-a[0], [-x for x in a[1]])
        if isinstance(node, Mul):
            a, b = go(node.a), go(node.b)
            if a is None or b is None:
                return None
            if not any(a[1]):
                return a[0] * b[0], [a[0] * y for y in b[1]]
            if not any(b[1]):
                return a[0] * b[0], [x * b[0] for x in a[1]]
            return None
        if isinstance(node, Div):
            a, b = go(node.a), go(node.b)
            if a is None or b is None or any(b[1]) or b[0] == 0:
                return None
            return a[0] / b[0], [x / b[0] for x in a[1]]
        if isinstance(node, Pow) and node.n in (0, 1):
            a = go(node.a)
            if a is None:
                return None
            return (a if node.n == 1 else (Fraction(1), [Fraction(0)] * n))
        return None

    return go(e)


# numeric evaluation


def _env_from(point, variables):
    if isinstance(point, Mapping):
        return dict(point)
    if variables is None:
        raise ValueError("positional point needs an explicit variable list")
    return dict(zip(variables, point))


def evaluate(e: SmoothExpr, point, variables: Sequence[str] | None = None):
    """Value of ``e`` at ``point`` (mapping or sequence ordered like ``variables``).

    Exact (Fraction) whenever the inputs allow it.
    """
    env = _env_from(point, variables)
    return _eval(e, env)


def _eval(e, env):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, TaylorLeaf):
        x = env[e.var]
        if x == 0:
            return e.coeffs[0]
        if e.func is None:
            raise DomainError(f"leaf {e.name} has no point evaluator")
        return e.func(float(x))
    if isinstance(e, Add):
        return _eval(e.a, env) + _eval(e.b, env)
    if isinstance(e, Sub):
        return _eval(e.a, env) - _eval(e.b, env)
    if isinstance(e, Mul):
        return _eval(e.a, env) * _eval(e.b, env)
    if isinstance(e, Div):
        d = _eval(e.b, env)
        if d == 0:
            raise DomainError("division by zero")
        return _eval(e.a, env) / d
    if isinstance(e, Neg):
        return -_eval(e.a, env)
    if isinstance(e, Pow):
        return _eval(e.a, env) ** e.n
    if isinstance(e, AbsPow):
        v = abs(_eval(e.a, env))
        if e.alpha.denominator == 1:
            return v ** e.alpha.numerator
        try:
            return rational_power(v, e.alpha)
        except InexactError:
            return float(v) ** float(e.alpha)
    if isinstance(e, Sqrt):
        v = _eval(e.a, env)
        if v < 0:
            raise DomainError("sqrt of a negative number")
        try:
            return rational_power(v, Fraction(1, 2))
        except InexactError:
            return math.sqrt(v)
    if isinstance(e, Sin):
        v = _eval(e.a, env)
        return Fraction(0) if v == 0 and is_exact_number(v) else math.sin(v)
    if isinstance(e, Cos):
        v = _eval(e.a, env)
        return Fraction(1) if v == 0 and is_exact_number(v) else math.cos(v)
    raise TypeError(f"not an expression node: {e!r}")


def rational_power(a, alpha: Fraction):
    """``a ** alpha`` exactly for rational ``a >= 0``; InexactError otherwise.

    Floats are passed through in floating point.
    """
    if not is_exact_number(a):
        return float(a) ** float(alpha)
    a = Fraction(a)
    if a < 0:
        raise DomainError("negative base for a rational power")
    if alpha.denominator == 1:
        return a ** alpha.numerator
    if a == 0:
        return Fraction(0)
    from sympy import integer_nthroot

    q = alpha.denominator
    num, ok1 = integer_nthroot(a.numerator, q)
    den, ok2 = integer_nthroot(a.denominator, q)
    if not (ok1 and ok2):
        raise InexactError(f"{a}^({alpha}) is irrational")
    return Fraction(int(num), int(den)) ** alpha.numerator


# smoothness class and jets


def _is_zero(v, exact: bool) -> bool:
    return v == 0 if exact else abs(v) < 1e-12


def _abs_pow_class(alpha: Fraction, inner_class):
    if alpha.denominator != 1:
        own = math.floor(alpha)
    elif alpha.numerator % 2 == 0:
        own = INF
    else:
        own = alpha.numerator - 1
    return min(own, inner_class)


def smoothness_class(e: SmoothExpr, point, variables: Sequence[str] | None = None):
    """Differentiability class of ``e`` at ``point`` (an int, or ``math.inf``).

    Analytic nodes keep the class of their children; ``|e|^alpha`` at a zero
    of ``e`` is ``floor(alpha)`` for non-integer alpha, ``alpha - 1`` for odd
    integers; ``sqrt`` at a zero is class 0.  A Taylor leaf is trusted up to
    the length of its coefficient list.
    """
    env = _env_from(point, variables)
    exact = all(is_exact_number(v) for v in env.values())
    return _class(e, env, exact)[0]


def _class(e, env, exact):
    """Returns (class, value)."""
    if isinstance(e, (Const, Var)):
        return INF, _eval(e, env)
    if isinstance(e, TaylorLeaf):
        if env[e.var] != 0:
            raise DomainError(f"leaf {e.name} is only expanded about 0")
        return len(e.coeffs) - 1, e.coeffs[0]
    kids = [_class(c, env, exact) for c in children(e)]
    cls = min((k[0] for k in kids), default=INF)
    v = _eval(e, env)
    if isinstance(e, Div) and _is_zero(kids[1][1], exact):
        raise DomainError("denominator vanishes at the base point")
    if isinstance(e, AbsPow) and _is_zero(kids[0][1], exact):
        cls = _abs_pow_class(e.alpha, cls)
    if isinstance(e, Sqrt):
        if kids[0][1] < 0:
            raise DomainError("sqrt of a negative number")
        if _is_zero(kids[0][1], exact):
            cls = 0
    return cls, v


def jet_of_expr(
    e: SmoothExpr,
    base,
    k: int,
    variables: Sequence[str] | None = None,
    mode: str = "auto",
) -> Jet:
    """Order-``k`` Taylor jet of ``e`` about ``base``.

    ``mode`` is "exact" (Fractions; raises InexactError when an irrational
    number would be needed), "float", or "auto" (exact, falling back to
    float).  Raises SmoothnessExceeded when ``k`` exceeds the smoothness
    class of ``e`` at ``base``.
    """
    if isinstance(base, Mapping):
        variables = tuple(variables or free_variables(e))
        base = [base[v] for v in variables]
    if variables is None:
        variables = free_variables(e)
    variables = tuple(variables)
    if len(base) != len(variables):
        raise ValueError(f"base point has {len(base)} entries for variables {variables}")
    if mode == "auto":
        try:
            return jet_of_expr(e, base, k, variables, "exact")
        except InexactError:
            return jet_of_expr(e, base, k, variables, "float")
    if mode == "exact":
        if not all(is_exact_number(b) for b in base):
            raise InexactError("exact mode needs a rational base point")
        base = tuple(Fraction(b) for b in base)
    elif mode == "float":
        base = tuple(float(b) for b in base)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return _JetBuilder(variables, base, k, mode == "exact").build(e)


class _JetBuilder:
    def __init__(self, variables, base, k, exact):
        self.variables = variables
        self.base = base
        self.k = k
        self.exact = exact
        self.one = Fraction(1) if exact else 1.0

    def num(self, v):
        if self.exact:
            if not is_exact_number(v):
                raise InexactError("float encountered in exact mode")
            return Fraction(v)
        return float(v)

    def const(self, v) -> Jet:
        return Jet.constant(self.num(v), self.base, self.k)

    def build(self, e) -> Jet:
        k = self.k
        if isinstance(e, Const):
            return self.const(e.value)
        if isinstance(e, Var):
            if e.name not in self.variables:
                raise ValueError(f"variable {e.name!r} not among {self.variables}")
            return Jet.variable(self.variables.index(e.name), self.base, k)
        if isinstance(e, TaylorLeaf):
            return self.leaf(e)
        if isinstance(e, Add):
            return self.build(e.a) + self.build(e.b)
        if isinstance(e, Sub):
            return self.build(e.a) - self.build(e.b)
        if isinstance(e, Mul):
            return self.build(e.a) * self.build(e.b)
        if isinstance(e, Neg):
            return -self.build(e.a)
        if isinstance(e, Pow):
            a = self.build(e.a)
            if e.n >= 0:
                return a**e.n
            return self.reciprocal(a) ** (-e.n)
        if isinstance(e, Div):
            return self.build(e.a) * self.reciprocal(self.build(e.b))
        if isinstance(e, AbsPow):
            return self.abs_pow(e)
        if isinstance(e, Sqrt):
            a = self.build(e.a)
            a0 = a.value()[0]
            if a0 < 0:
                raise DomainError("sqrt of a negative number")
            if _is_zero(a0, self.exact):
                if k > 0:
                    raise SmoothnessExceeded(k, 0)
                return self.const(0)
            return self.power(a, Fraction(1, 2))
        if isinstance(e, (Sin, Cos)):
            a = self.build(e.a)
            a0 = a.value()[0]
            if a0 == 0:
                s, c = self.num(0), self.num(1)
            elif self.exact:
                raise InexactError("sin/cos at a non-zero rational is irrational")
            else:
                s, c = math.sin(a0), math.cos(a0)
            # n-th derivative cycles through (s, c, -s, -c) for sin
            cyc = (s, c, -s, -c) if isinstance(e, Sin) else (c, -s, -c, s)
            return series_apply(lambda n: cyc[n % 4] / math.factorial(n), a)
        raise TypeError(f"not an expression node: {e!r}")

    def leaf(self, e: TaylorLeaf) -> Jet:
        if len(self.variables) and e.var not in self.variables:
            raise ValueError(f"variable {e.var!r} not among {self.variables}")
        j = self.variables.index(e.var)
        if self.base[j] != 0:
            raise DomainError(f"leaf {e.name} is only expanded about 0")
        avail = len(e.coeffs) - 1
        if self.k > avail:
            raise SmoothnessExceeded(self.k, avail)
        p = len(self.variables)
        d = {}
        for n, c in enumerate(e.coeffs[: self.k + 1]):
            beta = tuple(n if i == j else 0 for i in range(p))
            d[beta] = self.num(c)
        return Jet(self.base, self.k, [d])

    def reciprocal(self, a: Jet) -> Jet:
        a0 = a.value()[0]
        if _is_zero(a0, self.exact):
            raise DomainError("denominator vanishes at the base point")
        inv = self.one / a0
        return series_apply(lambda n: (-1) ** n * inv ** (n + 1), a)

    def power(self, a: Jet, alpha: Fraction) -> Jet:
        """``a ** alpha`` for a jet with positive constant term."""
        a0 = a.value()[0]
        if self.exact:
            top = rational_power(a0, alpha)
        else:
            top = float(a0) ** float(alpha)
        inv = self.one / a0
        coeffs = [top]
        binom = self.one
        for n in range(1, self.k + 1):
            binom = binom * (self.num(alpha) - (n - 1)) / n
            coeffs.append(binom * top * inv**n)
        return series_apply(lambda n: coeffs[n], a)

    def abs_pow(self, e: AbsPow) -> Jet:
        a = self.build(e.a)
        a0 = a.value()[0]
        alpha = e.alpha
        if _is_zero(a0, self.exact):
            cls = _abs_pow_class(alpha, INF)
            if alpha.denominator == 1 and alpha.numerator % 2 == 0:
                return a**alpha.numerator
            if self.k > cls:
                raise SmoothnessExceeded(self.k, cls)
            # |e|^alpha = O(|u|^alpha) and k < alpha: every coefficient vanishes
            return self.const(0)
        if a0 < 0:
            a = -a
        if alpha.denominator == 1:
            return a**alpha.numerator
        return self.power(a, alpha)
