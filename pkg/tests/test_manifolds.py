from fractions import Fraction

import numpy as np
import pytest

from osculum.manifolds import (
    GraphPresentationError,
    NoCommonTangent,
    NotImmersion,
    NotOnManifold,
    ParamPatch,
    adapt_to_graphs,
    exact_inverse,
    exact_rank,
    graph_pair,
    immersion_check,
    same_tangent_space,
)

F = Fraction


def test_exact_rank_and_inverse():
    assert exact_rank([[1, 2], [2, 4]]) == 1
    inv = exact_inverse([[2, 1], [1, 1]])
    assert inv == [[1, -1], [-1, 2]]
    with pytest.raises(ZeroDivisionError):
        exact_inverse([[1, 2], [2, 4]])


def test_immersion_check():
    assert immersion_check(ParamPatch.make(["u1", "u1^2"], ["u1"]))
    assert not immersion_check(ParamPatch.make(["u1^2", "u1^3"], ["u1"]))


def test_same_tangent_space_float_and_exact():
    assert same_tangent_space([[1], [0]], [[2], [0]])
    assert not same_tangent_space([[1], [0]], [[1], [1]])
    assert same_tangent_space([[1.0], [1e-12]], [[1.0], [0.0]])


def test_graph_pair_difference_is_graph_difference():
    pair = graph_pair("x^2", "x^2 + x^5")
    assert pair.p == 1 and pair.m == 2
    d = pair.Mt.jet(5) - pair.M.jet(5)
    assert d.terms() == [((5,), F(1))]


def test_translated_sheared_patch_is_adapted():
    # the parabola y = x^2 moved to (1, 2) and sheared to slope 3
    M = ParamPatch.make(["u1 + 1", "2 + 3*u1 + u1^2"], ["u1"])
    Mt = ParamPatch.make(["u1 + 1", "2 + 3*u1 + u1^2 + u1^4"], ["u1"])
    pair = adapt_to_graphs(M, Mt, (1, 2))
    assert pair.M.jet(3).terms() == [((2,), F(1))]
    assert (pair.Mt.jet(4) - pair.M.jet(4)).terms() == [((4,), F(1))]


def test_errors():
    M = ParamPatch.make(["u1", "u1^2"], ["u1"])
    with pytest.raises(NoCommonTangent):
        adapt_to_graphs(M, ParamPatch.make(["u1", "u1"], ["u1"]), (0, 0))
    with pytest.raises(NotOnManifold):
        adapt_to_graphs(M, M, (1, 0))
    with pytest.raises(NotImmersion):
        adapt_to_graphs(ParamPatch.make(["u1^2", "u1^3"], ["u1"]), M, (0, 0))
    # neither component is affine in the parameter
    with pytest.raises(GraphPresentationError):
        adapt_to_graphs(ParamPatch.make(["sin(u1)", "u1^2"], ["u1"]), M, (0, 0))
