from fractions import Fraction

import numpy as np
import pytest

from helpers import poly_text, rand_graph_pair, rand_poly
from osculum.expr import jet_of_expr, parse_expr
from osculum.jet import AtLeast, vanishing_order
from osculum.manifolds import ParamPatch, adapt_to_graphs, graph_pair
from osculum.taylor import order_from_graphs, tangency_order


def test_quintic_perturbation_has_order_four():
    assert order_from_graphs(graph_pair("x^2", "x^2 + x^5")).s == 4


def test_colley_kennedy_saturates_at_class():
    r = order_from_graphs(graph_pair("x^2 - abs(x)^(5/2)", "x^2 + abs(x)^(5/2)"))
    assert r.s == 2
    assert r.saturated_by_class
    assert r.class_r == 2


def test_surfaces_in_r3():
    r = order_from_graphs(graph_pair("u1^2 + u2^2", "u1^2 + u2^2 + u1^2*u2^2", ["u1", "u2"]))
    assert r.s == 3


def test_identical_patches_are_at_least_k_max():
    r = order_from_graphs(graph_pair("x^3", "x^3"), k_max=7)
    assert r.s == AtLeast(7)
    assert r.as_dict()["order"] == ">=7"


def test_transversal_patches_have_order_zero():
    M = ParamPatch.make(["u1", "0"], ["u1"])
    Mt = ParamPatch.make(["u1", "u1"], ["u1"])
    assert tangency_order(M, Mt, (0, 0)).s == 0


def test_float_mode_matches_exact():
    pair = graph_pair("x^2 + sin(x)^4", "x^2 + sin(x)^4 + 3*x^6")
    assert order_from_graphs(pair, mode="float").s == order_from_graphs(pair, mode="auto").s == 5


def test_nonzero_polynomials_fail_the_jet_test():
    # a non-zero polynomial of degree <= k is never o(|u|^k)
    rng = np.random.default_rng(11)
    for _ in range(200):
        p = int(rng.integers(1, 4))
        k = int(rng.integers(1, 6))
        c = rand_poly(rng, p, 0, k, density=0.3, force=False)
        vars_ = ["u1", "u2", "u3"][:p]
        e = parse_expr(poly_text(c, vars_))
        nu = vanishing_order(jet_of_expr(e, [0] * p, k, vars_))
        if c:
            assert nu <= k
        else:
            assert nu == AtLeast(k + 1)


def _moved(F, variables, shift, slope, perm):
    """Graph of F translated by ``shift``, sheared by ``slope`` and with coordinates permuted."""
    p = len(variables)
    comps = [f"{v} + ({shift[i]})" for i, v in enumerate(variables)]
    for r, f in enumerate(F):
        lin = " + ".join(f"({slope[r][j]})*{v}" for j, v in enumerate(variables))
        comps.append(f"({f}) + {lin} + ({shift[p + r]})")
    comps = [comps[i] for i in perm]
    point = [shift[i] for i in perm]
    return ParamPatch.make(comps, variables), point


def test_order_is_invariant_under_affine_moves():
    rng = np.random.default_rng(5)
    for _ in range(100):
        p = int(rng.integers(1, 3))
        t = int(rng.integers(1, 3))
        s = int(rng.integers(1, 5))
        F, Ft, vars_ = rand_graph_pair(rng, p, t, s, max_deg=5)
        shift = [Fraction(int(rng.integers(-3, 4)), 2) for _ in range(p + t)]
        slope = [[Fraction(int(rng.integers(-3, 4))) for _ in range(p)] for _ in range(t)]
        perm = list(rng.permutation(p + t))
        M, x0 = _moved(F, vars_, shift, slope, perm)
        Mt, _ = _moved(Ft, vars_, shift, slope, perm)
        assert tangency_order(M, Mt, x0, k_max=8).s == s
