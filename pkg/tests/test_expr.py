import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from osculum.expr import (
    AbsPow,
    Add,
    Const,
    Cos,
    Div,
    ExprSyntaxError,
    InexactError,
    Mul,
    Neg,
    Pow,
    SmoothnessExceeded,
    Sin,
    Sqrt,
    Sub,
    UnknownIdentifier,
    Var,
    evaluate,
    free_variables,
    jet_of_expr,
    parse_expr,
    smoothness_class,
    substitute,
    to_text,
)

F = Fraction


def test_parse_colley_kennedy_graph():
    e = parse_expr("x^2 - abs(x)^(5/2)")
    assert e == Sub(Pow(Var("x"), 2), AbsPow(Var("x"), F(5, 2)))
    assert free_variables(e) == ("x",)


def test_fractional_power_needs_abs():
    with pytest.raises(ExprSyntaxError) as err:
        parse_expr("x^(5/2)")
    assert err.value.position == 1


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        parse_expr("x + w")


def test_trailing_garbage():
    with pytest.raises(ExprSyntaxError):
        parse_expr("x + )")


def test_smoothness_classes():
    x = ["x"]
    assert smoothness_class(parse_expr("x^2 - abs(x)^(5/2)"), [0], x) == 2
    assert smoothness_class(parse_expr("abs(x)^3"), [0], x) == 2
    assert smoothness_class(parse_expr("abs(x)^2"), [0], x) == math.inf
    assert smoothness_class(parse_expr("abs(x)^(5/2)"), [1], x) == math.inf
    assert smoothness_class(parse_expr("sqrt(x)"), [0], x) == 0


def test_jet_of_colley_kennedy_graph():
    e = parse_expr("x^2 - abs(x)^(5/2)")
    j = jet_of_expr(e, [0], 2, ["x"])
    assert j.terms() == [((2,), F(1))]
    with pytest.raises(SmoothnessExceeded):
        jet_of_expr(e, [0], 3, ["x"])


def test_jet_of_sin_and_reciprocal():
    j = jet_of_expr(parse_expr("sin(x)"), [0], 5, ["x"], mode="float")
    assert j.coeff(0, (3,)) == pytest.approx(-1 / 6)
    assert j.coeff(0, (5,)) == pytest.approx(1 / 120)
    r = jet_of_expr(parse_expr("1/(1 - x)"), [0], 4, ["x"])
    assert [r.coeff(0, (n,)) for n in range(5)] == [1] * 5


def test_jet_of_sqrt_about_one():
    # sqrt(1 + h) = 1 + h/2 - h^2/8 + h^3/16
    j = jet_of_expr(parse_expr("sqrt(x)"), [1], 3, ["x"])
    assert [j.coeff(0, (n,)) for n in range(4)] == [1, F(1, 2), F(-1, 8), F(1, 16)]


def test_exact_mode_rejects_irrational():
    with pytest.raises(InexactError):
        jet_of_expr(parse_expr("sqrt(x)"), [2], 1, ["x"], mode="exact")
    j = jet_of_expr(parse_expr("sqrt(x)"), [2], 1, ["x"])
    assert j.coeff(0, (0,)) == pytest.approx(math.sqrt(2))


def test_substitute_and_evaluate():
    e = substitute(parse_expr("x*y + 1"), {"x": Var("u1"), "y": parse_expr("u1^2")})
    assert evaluate(e, {"u1": F(2)}) == 9


leaves = st.one_of(
    st.sampled_from([Var("x"), Var("y"), Var("z")]),
    st.fractions(min_value=-20, max_value=20, max_denominator=8).map(Const),
)


def _trees(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: Add(*t)),
        st.tuples(children, children).map(lambda t: Sub(*t)),
        st.tuples(children, children).map(lambda t: Mul(*t)),
        st.tuples(children, children).map(lambda t: Div(*t)),
        children.map(Neg),
        st.tuples(children, st.integers(0, 4)).map(lambda t: Pow(*t)),
        st.tuples(children, st.sampled_from([F(1), F(3, 2), F(5, 2), F(2)])).map(lambda t: AbsPow(*t)),
        children.map(Sqrt),
        children.map(Sin),
        children.map(Cos),
    )


trees = st.recursive(leaves, _trees, max_leaves=12)


def _num(e, pt):
    try:
        v = evaluate(e, pt)
    except (ZeroDivisionError, ValueError, ArithmeticError, OverflowError):
        return None
    return float(v)


@settings(max_examples=300)
@given(trees)
def test_print_parse_round_trip(e):
    text = to_text(e)
    back = parse_expr(text)
    # after one parse, printing and parsing reproduce the tree exactly
    assert parse_expr(to_text(back)) == back
    pt = {"x": F(1, 3), "y": F(-2, 5), "z": F(7, 4)}
    a, b = _num(e, pt), _num(back, pt)
    if a is not None and b is not None and math.isfinite(a):
        assert b == pytest.approx(a, rel=1e-12, abs=1e-12)
